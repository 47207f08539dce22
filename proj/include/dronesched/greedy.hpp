#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "dronesched/errors.hpp"
#include "dronesched/instance.hpp"
#include "dronesched/rng.hpp"
#include "dronesched/schedule.hpp"

namespace dronesched {

struct SolveResult {
  Schedule schedule;
  int covered = 0;
  int total = 0;
  int trips = 0;
  int restarts_used = 0;
  double elapsed_seconds = 0.0;
};

struct RestartRecord {
  int restart = 0;
  int covered = 0;
  int trips = 0;
  bool improved = false;
};

namespace detail {

// Steps needed after arriving at `node` before the agent can be parked at its
// final node: 0 if already there, otherwise one full return trip.
inline int return_slack(const Instance& inst, const AgentSpec& agent,
                        int node) {
  return node == agent.fin_node ? 0
                                : inst.travel(node, agent.fin_node) + 1;
}

// Plans one agent against the shared demand grid, zeroing every cell it
// covers. Returns the number of cells newly covered.
inline int plan_agent(const Instance& inst, const AgentSpec& agent,
                      BinaryGrid& demand, Trajectory& traj) {
  const int last = inst.horizon - 1;
  const int nodes = inst.num_nodes();

  traj.assign(inst.horizon, AgentState::hover(agent.init_node));
  int covered = 0;
  int cur = agent.init_node;
  int t = 0;
  for (;;) {
    traj[t] = AgentState::hover(cur);
    if (demand.at(cur, t)) {
      demand.at(cur, t) = 0;
      ++covered;
    }
    if (t == last) break;

    // One-step lookahead: cheapest node (the current one counts, at cost 0)
    // whose demand fires exactly at arrival and which keeps the final node
    // reachable. Scanning in index order breaks cost ties toward lower ids.
    int best = -1;
    int best_cost = std::numeric_limits<int>::max();
    for (int k = 0; k < nodes; ++k) {
      const int cost = inst.travel(cur, k);
      if (cost >= best_cost) continue;
      const int arrive = t + cost + 1;
      if (arrive > last) continue;
      if (!demand.at(k, arrive)) continue;
      if (arrive + return_slack(inst, agent, k) > last) continue;
      best = k;
      best_cost = cost;
    }

    if (best == cur) {  // demand at the current node one step ahead
      ++t;
      continue;
    }
    if (best >= 0) {
      for (int s = 1; s <= best_cost; ++s) {
        traj[t + s] = AgentState::transit(cur, best, s);
      }
      t += best_cost + 1;
      cur = best;
      continue;
    }
    // No candidate: stay while the final node remains reachable, else the
    // return trip must leave now (landing exactly at the last step).
    if (t + 1 + return_slack(inst, agent, cur) <= last) {
      ++t;
      continue;
    }
    const int cost = inst.travel(cur, agent.fin_node);
    for (int s = 1; s <= cost; ++s) {
      traj[t + s] = AgentState::transit(cur, agent.fin_node, s);
    }
    t += cost + 1;
    cur = agent.fin_node;
  }
  return covered;
}

}  // namespace detail

// Initial trajectories: each agent hovers at its init node through the latest
// feasible departure, then (if init != fin) flies to its final node so that
// the last step hovers there. Identical to a rollout that never finds demand.
inline std::vector<Trajectory> preprocess(const Instance& inst) {
  std::vector<Trajectory> trajectories(inst.num_agents());
  for (int a = 0; a < inst.num_agents(); ++a) {
    const AgentSpec& agent = inst.agents[a];
    Trajectory& traj = trajectories[a];
    traj.assign(inst.horizon, AgentState::hover(agent.init_node));
    if (agent.init_node == agent.fin_node) continue;
    const int cost = inst.travel(agent.init_node, agent.fin_node);
    const int depart = inst.horizon - 2 - cost;  // last hover at the init node
    for (int s = 1; s <= cost; ++s) {
      traj[depart + s] = AgentState::transit(agent.init_node, agent.fin_node, s);
    }
    traj[inst.horizon - 1] = AgentState::hover(agent.fin_node);
  }
  return trajectories;
}

// Plans agents sequentially in `order` against one shared demand copy, so a
// cell claimed by an earlier agent is invisible to later ones. Returns the
// schedule and the number of demand cells covered.
inline std::pair<Schedule, int> rollout(const Instance& inst,
                                        const std::vector<int>& order) {
  std::vector<char> seen(inst.num_agents(), 0);
  if (static_cast<int>(order.size()) != inst.num_agents()) {
    throw Error("rollout order must list every agent exactly once");
  }
  for (int a : order) {
    if (a < 0 || a >= inst.num_agents() || seen[a]) {
      throw Error("rollout order must be a permutation of agent ids");
    }
    seen[a] = 1;
  }

  BinaryGrid demand = inst.demand;
  Schedule sched;
  sched.trajectories.resize(inst.num_agents());
  int covered = 0;
  for (int a : order) {
    covered +=
        detail::plan_agent(inst, inst.agents[a], demand, sched.trajectories[a]);
  }
  return {std::move(sched), covered};
}

// Random-restart driver: restart i rolls out a fresh uniform permutation from
// the substream (seed, i) and the incumbent is kept on (covered desc, trips
// asc, earlier restart). Stops after `threshold` consecutive restarts without
// improvement. Deterministic for fixed (instance, threshold, seed).
inline SolveResult greedy_solve(const Instance& inst, int threshold,
                                std::uint64_t seed,
                                std::vector<RestartRecord>* trace = nullptr) {
  if (threshold < 1) throw Error("threshold must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  SolveResult result;
  result.total = inst.demand.total();

  std::optional<std::pair<int, int>> best;  // (covered, trips)
  int non_improving = 0;
  int restart = 0;
  while (non_improving < threshold) {
    SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(restart));
    std::vector<int> order(inst.num_agents());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    auto [sched, covered] = rollout(inst, order);
    const int trips = trip_count(sched);
    const bool improved =
        !best || covered > best->first ||
        (covered == best->first && trips < best->second);
    if (improved) {
      best = {covered, trips};
      result.schedule = std::move(sched);
      result.covered = covered;
      result.trips = trips;
      non_improving = 0;
    } else {
      ++non_improving;
    }
    if (trace) trace->push_back({restart, covered, trips, improved});
    ++restart;
  }

  result.restarts_used = restart;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace dronesched
