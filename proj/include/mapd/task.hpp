#pragma once
#include "mapd/world.hpp"

namespace mapd {

enum class TaskStatus { Pending, Claimed, PickedUp, Done };

struct Task {
  int id = -1;
  NodeId pickup = -1;    // s
  NodeId delivery = -1;  // g
  TaskStatus status = TaskStatus::Pending;
  int agent = -1;      // executor once claimed
  int done_time = -1;  // delivery timestep
};

}  // namespace mapd
