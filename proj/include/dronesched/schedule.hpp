#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dronesched/errors.hpp"
#include "dronesched/instance.hpp"

namespace dronesched {

// One time step of an agent: hovering at a node, or mid-flight between two
// nodes. A trip departing Hover(n) at time t occupies Transit(n, n', s) for
// s = 1..cost(n, n') at times t+1..t+cost and first hovers at n' at
// t + cost + 1. Only hovering covers demand.
struct AgentState {
  enum class Kind : std::uint8_t { kHover, kTransit };

  Kind kind = Kind::kHover;
  int node = 0;    // hover location (kHover)
  int origin = 0;  // transit fields (kTransit)
  int dest = 0;
  int step = 0;    // 1..cost(origin, dest)

  static AgentState hover(int node) {
    AgentState s;
    s.kind = Kind::kHover;
    s.node = node;
    return s;
  }

  static AgentState transit(int origin, int dest, int step) {
    AgentState s;
    s.kind = Kind::kTransit;
    s.origin = origin;
    s.dest = dest;
    s.step = step;
    return s;
  }

  bool is_hover() const { return kind == Kind::kHover; }

  bool operator==(const AgentState& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::kHover) return node == o.node;
    return origin == o.origin && dest == o.dest && step == o.step;
  }

  std::string to_string() const {
    if (is_hover()) return "hover(" + std::to_string(node) + ")";
    return "transit(" + std::to_string(origin) + "->" + std::to_string(dest) +
           ", step " + std::to_string(step) + ")";
  }
};

// One state per time step; length equals the instance horizon.
using Trajectory = std::vector<AgentState>;

struct Schedule {
  std::vector<Trajectory> trajectories;  // agent-indexed

  int num_agents() const { return static_cast<int>(trajectories.size()); }

  bool operator==(const Schedule&) const = default;
};

struct CoverageReport {
  int covered = 0;
  int total = 0;
  BinaryGrid covered_flags;  // hover presence per (node, time), any agent
  int trips = 0;             // departures summed over agents
};

// Number of hover -> transit transitions summed over agents.
inline int trip_count(const Schedule& sched) {
  int trips = 0;
  for (const Trajectory& traj : sched.trajectories) {
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      if (traj[t].is_hover() && !traj[t + 1].is_hover()) ++trips;
    }
  }
  return trips;
}

// Checks boundary pinning, per-state well-formedness, and the legal
// transitions Hover(n)->Hover(n), Hover(n)->Transit(n,n',1),
// Transit(n,n',s)->Transit(n,n',s+1) while s < cost, and
// Transit(n,n',cost)->Hover(n'). Throws ValidationError naming the agent and
// the earliest offending time step; returns the coverage report on success.
inline CoverageReport validate_schedule(const Instance& inst,
                                        const Schedule& sched) {
  const int horizon = inst.horizon;
  const int nodes = inst.num_nodes();
  if (sched.num_agents() != inst.num_agents()) {
    throw ValidationError(-1, -1,
                          "schedule has " + std::to_string(sched.num_agents()) +
                              " trajectories, instance has " +
                              std::to_string(inst.num_agents()) + " agents");
  }

  auto check_state = [&](int a, int t, const AgentState& s) {
    if (s.is_hover()) {
      if (s.node < 0 || s.node >= nodes) {
        throw ValidationError(a, t,
                              "agent " + std::to_string(a) + " at t=" +
                                  std::to_string(t) + ": " + s.to_string() +
                                  " references an invalid node");
      }
      return;
    }
    if (s.origin < 0 || s.origin >= nodes || s.dest < 0 || s.dest >= nodes ||
        s.origin == s.dest) {
      throw ValidationError(a, t,
                            "agent " + std::to_string(a) + " at t=" +
                                std::to_string(t) + ": " + s.to_string() +
                                " has invalid endpoints");
    }
    if (s.step < 1 || s.step > inst.travel(s.origin, s.dest)) {
      throw ValidationError(
          a, t,
          "agent " + std::to_string(a) + " at t=" + std::to_string(t) + ": " +
              s.to_string() + " step outside 1.." +
              std::to_string(inst.travel(s.origin, s.dest)));
    }
  };

  for (int a = 0; a < inst.num_agents(); ++a) {
    const Trajectory& traj = sched.trajectories[a];
    if (static_cast<int>(traj.size()) != horizon) {
      throw ValidationError(a, -1,
                            "agent " + std::to_string(a) + " trajectory has " +
                                std::to_string(traj.size()) +
                                " states, expected " + std::to_string(horizon));
    }
    check_state(a, 0, traj[0]);
    const AgentState expected_start = AgentState::hover(inst.agents[a].init_node);
    if (!(traj[0] == expected_start)) {
      throw ValidationError(a, 0,
                            "agent " + std::to_string(a) +
                                " boundary violation at t=0: expected " +
                                expected_start.to_string() + ", found " +
                                traj[0].to_string());
    }
    for (int t = 0; t + 1 < horizon; ++t) {
      const AgentState& cur = traj[t];
      const AgentState& nxt = traj[t + 1];
      check_state(a, t + 1, nxt);
      bool legal;
      if (cur.is_hover()) {
        legal = (nxt.is_hover() && nxt.node == cur.node) ||
                (!nxt.is_hover() && nxt.origin == cur.node && nxt.step == 1);
      } else if (cur.step < inst.travel(cur.origin, cur.dest)) {
        legal = !nxt.is_hover() && nxt.origin == cur.origin &&
                nxt.dest == cur.dest && nxt.step == cur.step + 1;
      } else {
        legal = nxt.is_hover() && nxt.node == cur.dest;
      }
      if (!legal) {
        throw ValidationError(a, t + 1,
                              "agent " + std::to_string(a) +
                                  " illegal transition at t=" +
                                  std::to_string(t + 1) + ": " +
                                  cur.to_string() + " -> " + nxt.to_string());
      }
    }
    const AgentState expected_end = AgentState::hover(inst.agents[a].fin_node);
    if (!(traj[horizon - 1] == expected_end)) {
      throw ValidationError(a, horizon - 1,
                            "agent " + std::to_string(a) +
                                " boundary violation at t=" +
                                std::to_string(horizon - 1) + ": expected " +
                                expected_end.to_string() + ", found " +
                                traj[horizon - 1].to_string());
    }
  }

  CoverageReport report;
  report.covered_flags = BinaryGrid(nodes, horizon);
  for (const Trajectory& traj : sched.trajectories) {
    for (int t = 0; t < horizon; ++t) {
      if (traj[t].is_hover()) report.covered_flags.at(traj[t].node, t) = 1;
    }
  }
  report.total = inst.demand.total();
  for (int n = 0; n < nodes; ++n) {
    for (int t = 0; t < horizon; ++t) {
      if (inst.demand.at(n, t) && report.covered_flags.at(n, t)) {
        ++report.covered;
      }
    }
  }
  report.trips = trip_count(sched);
  return report;
}

// (covered, total) demand cells; multiple agents on one cell count once.
inline std::pair<int, int> coverage_score(const Instance& inst,
                                          const Schedule& sched) {
  const CoverageReport report = validate_schedule(inst, sched);
  return {report.covered, report.total};
}

// --- JSON interchange -------------------------------------------------------
//
// Schedule file, version 1:
//   {"version":1,
//    "agents":[[{"s":"h","n":0},{"s":"t","from":0,"to":1,"k":1}, ...], ...],
//    "summary":{"covered":1,"total":1,"trips":2}}
// Writers emit the summary; parsers recompute it and reject mismatches.

inline std::string serialize_schedule(const Instance& inst,
                                      const Schedule& sched) {
  const CoverageReport report = validate_schedule(inst, sched);
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["agents"] = nlohmann::ordered_json::array();
  for (const Trajectory& traj : sched.trajectories) {
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const AgentState& s : traj) {
      if (s.is_hover()) {
        steps.push_back({{"s", "h"}, {"n", s.node}});
      } else {
        steps.push_back(
            {{"s", "t"}, {"from", s.origin}, {"to", s.dest}, {"k", s.step}});
      }
    }
    j["agents"].push_back(std::move(steps));
  }
  j["summary"] = {{"covered", report.covered},
                  {"total", report.total},
                  {"trips", report.trips}};
  return j.dump();
}

inline Schedule parse_schedule(const Instance& inst, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schedule is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("schedule must be a JSON object");
  if (detail::require_int(j, "version") != 1) {
    throw ParseError("unsupported schedule version");
  }
  const nlohmann::json& ja = detail::require_field(j, "agents");
  if (!ja.is_array()) throw ParseError("'agents' must be an array");

  Schedule sched;
  for (const auto& steps : ja) {
    if (!steps.is_array()) throw ParseError("each agent entry must be an array");
    Trajectory traj;
    for (const auto& s : steps) {
      if (!s.is_object()) throw ParseError("steps must be objects");
      const nlohmann::json& kind = detail::require_field(s, "s");
      if (kind == "h") {
        traj.push_back(AgentState::hover(detail::require_int(s, "n")));
      } else if (kind == "t") {
        traj.push_back(AgentState::transit(detail::require_int(s, "from"),
                                           detail::require_int(s, "to"),
                                           detail::require_int(s, "k")));
      } else {
        throw ParseError("step kind must be \"h\" or \"t\"");
      }
    }
    sched.trajectories.push_back(std::move(traj));
  }

  const CoverageReport report = validate_schedule(inst, sched);
  const nlohmann::json& summary = detail::require_field(j, "summary");
  if (detail::require_int(summary, "covered") != report.covered ||
      detail::require_int(summary, "total") != report.total ||
      detail::require_int(summary, "trips") != report.trips) {
    throw ParseError("schedule summary does not match recomputed coverage");
  }
  return sched;
}

}  // namespace dronesched
