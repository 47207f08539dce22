#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dronesched/errors.hpp"
#include "dronesched/rng.hpp"

namespace dronesched {

// Symmetric matrix of travel times in whole time steps.
// Invariants: square, zero diagonal, off-diagonal entries >= 1.
struct TravelTimeMatrix {
  std::vector<std::vector<int>> cost;

  int size() const { return static_cast<int>(cost.size()); }
  int operator()(int i, int j) const { return cost[i][j]; }

  bool operator==(const TravelTimeMatrix&) const = default;
};

struct AgentSpec {
  int id = 0;
  int init_node = 0;
  int fin_node = 0;

  bool operator==(const AgentSpec&) const = default;
};

// Binary node x time grid, row-major per node.
struct BinaryGrid {
  int num_nodes = 0;
  int horizon = 0;
  std::vector<std::uint8_t> cells;

  BinaryGrid() = default;
  BinaryGrid(int num_nodes_, int horizon_)
      : num_nodes(num_nodes_),
        horizon(horizon_),
        cells(static_cast<std::size_t>(num_nodes_) * horizon_, 0) {}

  std::uint8_t at(int node, int t) const {
    return cells[static_cast<std::size_t>(node) * horizon + t];
  }
  std::uint8_t& at(int node, int t) {
    return cells[static_cast<std::size_t>(node) * horizon + t];
  }

  int total() const {
    int sum = 0;
    for (std::uint8_t c : cells) sum += c;
    return sum;
  }

  bool operator==(const BinaryGrid&) const = default;
};

// Demanded (node, time) visit cells: demand.at(n, t) == 1 means some agent
// should hover over node n at step t.
using DemandMatrix = BinaryGrid;

// Immutable problem statement. Time steps run over {0, ..., horizon-1};
// every agent hovers at its init node at t=0 and at its fin node at
// t=horizon-1. Hover at the destination of a trip departing at t happens at
// t + cost + 1, so an agent is feasible iff init == fin or
// cost(init, fin) + 1 <= horizon - 1.
struct Instance {
  int horizon = 0;
  TravelTimeMatrix travel;
  std::vector<AgentSpec> agents;
  DemandMatrix demand;

  int num_nodes() const { return travel.size(); }
  int num_agents() const { return static_cast<int>(agents.size()); }

  bool operator==(const Instance&) const = default;
};

// Validating constructor. Throws InstanceError on any invariant violation;
// messages identify the offending entry or agent.
inline Instance build_instance(int horizon, TravelTimeMatrix travel,
                               std::vector<AgentSpec> agents,
                               DemandMatrix demand) {
  if (horizon < 2) {
    throw InstanceError("horizon must be >= 2, got " + std::to_string(horizon));
  }
  const int n = travel.size();
  if (n < 1) throw InstanceError("travel matrix must have at least one node");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(travel.cost[i].size()) != n) {
      throw InstanceError("travel matrix is not square: row " +
                          std::to_string(i) + " has " +
                          std::to_string(travel.cost[i].size()) + " entries, expected " +
                          std::to_string(n));
    }
    if (travel.cost[i][i] != 0) {
      throw InstanceError("travel diagonal must be zero: cost[" +
                          std::to_string(i) + "][" + std::to_string(i) + "] = " +
                          std::to_string(travel.cost[i][i]));
    }
    for (int j = 0; j < n; ++j) {
      if (i != j && travel.cost[i][j] < 1) {
        throw InstanceError("off-diagonal travel entries must be >= 1: cost[" +
                            std::to_string(i) + "][" + std::to_string(j) + "] = " +
                            std::to_string(travel.cost[i][j]));
      }
      if (travel.cost[i][j] != travel.cost[j][i]) {
        throw InstanceError("travel matrix is asymmetric at (" +
                            std::to_string(i) + "," + std::to_string(j) + "): " +
                            std::to_string(travel.cost[i][j]) + " vs " +
                            std::to_string(travel.cost[j][i]));
      }
    }
  }
  if (demand.num_nodes != n || demand.horizon != horizon) {
    throw InstanceError("demand grid is " + std::to_string(demand.num_nodes) +
                        "x" + std::to_string(demand.horizon) + ", expected " +
                        std::to_string(n) + "x" + std::to_string(horizon));
  }
  for (std::uint8_t c : demand.cells) {
    if (c > 1) throw InstanceError("demand entries must be 0 or 1");
  }
  for (std::size_t a = 0; a < agents.size(); ++a) {
    agents[a].id = static_cast<int>(a);
    const AgentSpec& ag = agents[a];
    if (ag.init_node < 0 || ag.init_node >= n || ag.fin_node < 0 ||
        ag.fin_node >= n) {
      throw InstanceError("agent " + std::to_string(a) +
                          " references an invalid node index");
    }
    if (ag.init_node != ag.fin_node &&
        travel(ag.init_node, ag.fin_node) + 1 > horizon - 1) {
      throw InstanceError("agent " + std::to_string(a) +
                          " cannot reach its final node in time: cost " +
                          std::to_string(travel(ag.init_node, ag.fin_node)) +
                          " + 1 > " + std::to_string(horizon - 1));
    }
  }
  return Instance{horizon, std::move(travel), std::move(agents),
                  std::move(demand)};
}

// Seeded random instance. Travel times are symmetric uniform draws from
// [travel_min, travel_max]; each node gets round(demand_fraction * horizon)
// distinct demand times drawn without replacement from {1, ..., horizon-2}
// (agents are pinned at t=0 and t=horizon-1, so demand there is excluded);
// agent init nodes are uniform and fin == init unless
// independent_fin is set, in which case fin is redrawn until feasible.
// The draw order is fixed, so identical arguments yield identical instances.
inline Instance generate_instance(int n_nodes, int horizon, int n_agents,
                                  double demand_fraction, int travel_min,
                                  int travel_max, std::uint64_t seed,
                                  bool independent_fin = false) {
  if (n_nodes < 1) throw InstanceError("n_nodes must be >= 1");
  if (horizon < 2) throw InstanceError("horizon must be >= 2");
  if (n_agents < 0) throw InstanceError("n_agents must be >= 0");
  if (demand_fraction < 0.0 || demand_fraction > 1.0) {
    throw InstanceError("demand_fraction must be in [0, 1]");
  }
  if (travel_min < 1 || travel_min > travel_max) {
    throw InstanceError("need 1 <= travel_min <= travel_max");
  }

  SplitMix64 rng = SplitMix64::stream(seed, 0);

  TravelTimeMatrix travel;
  travel.cost.assign(n_nodes, std::vector<int>(n_nodes, 0));
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = i + 1; j < n_nodes; ++j) {
      const int c = travel_min + static_cast<int>(rng.below(
                                     static_cast<std::uint64_t>(travel_max) -
                                     travel_min + 1));
      travel.cost[i][j] = c;
      travel.cost[j][i] = c;
    }
  }

  const int times_per_node =
      static_cast<int>(std::llround(demand_fraction * horizon));
  const int slots = horizon - 2;  // demand may only sit in {1, ..., horizon-2}
  if (times_per_node > slots) {
    throw InstanceError("demand_fraction " + std::to_string(demand_fraction) +
                        " asks for " + std::to_string(times_per_node) +
                        " demand times per node but only " +
                        std::to_string(slots > 0 ? slots : 0) +
                        " interior steps exist");
  }
  DemandMatrix demand(n_nodes, horizon);
  std::vector<int> pool(slots > 0 ? slots : 0);
  for (int n = 0; n < n_nodes; ++n) {
    for (int s = 0; s < slots; ++s) pool[s] = s + 1;
    for (int i = 0; i < times_per_node; ++i) {
      const int j =
          i + static_cast<int>(rng.below(static_cast<std::uint64_t>(slots - i)));
      std::swap(pool[i], pool[j]);
      demand.at(n, pool[i]) = 1;
    }
  }

  std::vector<AgentSpec> agents(n_agents);
  for (int a = 0; a < n_agents; ++a) {
    agents[a].id = a;
    agents[a].init_node = static_cast<int>(rng.below(n_nodes));
    agents[a].fin_node = agents[a].init_node;
    if (independent_fin) {
      for (;;) {
        const int fin = static_cast<int>(rng.below(n_nodes));
        if (fin == agents[a].init_node ||
            travel(agents[a].init_node, fin) + 1 <= horizon - 1) {
          agents[a].fin_node = fin;
          break;
        }
      }
    }
  }

  return build_instance(horizon, std::move(travel), std::move(agents),
                        std::move(demand));
}

// --- JSON interchange -------------------------------------------------------
//
// Instance file, version 1:
//   {"version":1,"num_nodes":2,"horizon":5,"travel":[[0,1],[1,0]],
//    "agents":[{"init":0,"final":0}],"demand":[[1,2]]}
// Demand pairs are written sorted lexicographically; any read order is
// accepted, duplicates are rejected.

inline std::string serialize_instance(const Instance& inst) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["num_nodes"] = inst.num_nodes();
  j["horizon"] = inst.horizon;
  j["travel"] = inst.travel.cost;
  j["agents"] = nlohmann::ordered_json::array();
  for (const AgentSpec& a : inst.agents) {
    j["agents"].push_back({{"init", a.init_node}, {"final", a.fin_node}});
  }
  std::vector<std::pair<int, int>> pairs;
  for (int n = 0; n < inst.num_nodes(); ++n) {
    for (int t = 0; t < inst.horizon; ++t) {
      if (inst.demand.at(n, t)) pairs.emplace_back(n, t);
    }
  }
  j["demand"] = nlohmann::ordered_json::array();
  for (const auto& [n, t] : pairs) j["demand"].push_back({n, t});
  return j.dump();
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const char* name) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError(std::string("missing field '") + name + "'");
  }
  return *it;
}

inline int require_int(const nlohmann::json& j, const char* name) {
  const nlohmann::json& v = require_field(j, name);
  if (!v.is_number_integer()) {
    throw ParseError(std::string("field '") + name + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace detail

inline Instance parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  if (detail::require_int(j, "version") != 1) {
    throw ParseError("unsupported instance version");
  }
  const int num_nodes = detail::require_int(j, "num_nodes");
  const int horizon = detail::require_int(j, "horizon");

  const nlohmann::json& jt = detail::require_field(j, "travel");
  if (!jt.is_array()) throw ParseError("'travel' must be an array of arrays");
  TravelTimeMatrix travel;
  for (const auto& row : jt) {
    if (!row.is_array()) throw ParseError("'travel' must be an array of arrays");
    std::vector<int> r;
    for (const auto& v : row) {
      if (!v.is_number_integer()) throw ParseError("'travel' entries must be integers");
      r.push_back(v.get<int>());
    }
    travel.cost.push_back(std::move(r));
  }
  if (travel.size() != num_nodes) {
    throw ParseError("num_nodes is " + std::to_string(num_nodes) +
                     " but travel has " + std::to_string(travel.size()) +
                     " rows");
  }

  const nlohmann::json& ja = detail::require_field(j, "agents");
  if (!ja.is_array()) throw ParseError("'agents' must be an array");
  std::vector<AgentSpec> agents;
  for (const auto& a : ja) {
    if (!a.is_object()) throw ParseError("agent entries must be objects");
    AgentSpec spec;
    spec.init_node = detail::require_int(a, "init");
    spec.fin_node = detail::require_int(a, "final");
    agents.push_back(spec);
  }

  const nlohmann::json& jd = detail::require_field(j, "demand");
  if (!jd.is_array()) throw ParseError("'demand' must be an array of [node, time] pairs");
  DemandMatrix demand(num_nodes, horizon);
  for (const auto& p : jd) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
        !p[1].is_number_integer()) {
      throw ParseError("'demand' entries must be [node, time] integer pairs");
    }
    const int n = p[0].get<int>();
    const int t = p[1].get<int>();
    if (n < 0 || n >= num_nodes) {
      throw ParseError("demand node index out of range: " + std::to_string(n));
    }
    if (t < 0 || t >= horizon) {
      throw ParseError("demand time out of range: " + std::to_string(t));
    }
    if (demand.at(n, t)) {
      throw ParseError("duplicate demand pair [" + std::to_string(n) + "," +
                       std::to_string(t) + "]");
    }
    demand.at(n, t) = 1;
  }

  return build_instance(horizon, std::move(travel), std::move(agents),
                        std::move(demand));
}

}  // namespace dronesched
