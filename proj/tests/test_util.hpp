#pragma once

#include <vector>

#include "dronesched/instance.hpp"
#include "dronesched/schedule.hpp"

namespace dronesched::testutil {

// 2 nodes, horizon 5, cost(0,1)=1, one agent 0->0, demand at (1,2).
inline Instance tiny1() {
  TravelTimeMatrix travel{{{0, 1}, {1, 0}}};
  DemandMatrix demand(2, 5);
  demand.at(1, 2) = 1;
  return build_instance(5, travel, {AgentSpec{0, 0, 0}}, demand);
}

// 3 nodes, horizon 6, cost(0,1)=1, cost(0,2)=2, cost(1,2)=1, one agent 0->0,
// demand at (1,2) and (2,3).
inline Instance tiny2() {
  TravelTimeMatrix travel{{{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}};
  DemandMatrix demand(3, 6);
  demand.at(1, 2) = 1;
  demand.at(2, 3) = 1;
  return build_instance(6, travel, {AgentSpec{0, 0, 0}}, demand);
}

// The unique optimal schedule on tiny1: out at t=0, cover (1,2), back home.
inline Schedule tiny1_round_trip() {
  Schedule s;
  s.trajectories = {{AgentState::hover(0), AgentState::transit(0, 1, 1),
                     AgentState::hover(1), AgentState::transit(1, 0, 1),
                     AgentState::hover(0)}};
  return s;
}

inline Schedule all_hover(const Instance& inst) {
  Schedule s;
  for (const AgentSpec& a : inst.agents) {
    s.trajectories.emplace_back(inst.horizon, AgentState::hover(a.init_node));
  }
  return s;
}

}  // namespace dronesched::testutil
