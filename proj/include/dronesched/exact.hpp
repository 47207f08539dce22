#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <boost/functional/hash.hpp>

#include "dronesched/errors.hpp"
#include "dronesched/greedy.hpp"
#include "dronesched/instance.hpp"
#include "dronesched/schedule.hpp"

namespace dronesched {

// Bit position per demanded (node, time) cell, lexicographic on (node, time).
struct DemandIndex {
  int num_nodes = 0;
  int horizon = 0;
  std::vector<std::pair<int, int>> cells;  // bit -> (node, time)
  std::vector<int> bit_at;                 // node * horizon + t -> bit or -1

  static DemandIndex build(const Instance& inst) {
    DemandIndex index;
    index.num_nodes = inst.num_nodes();
    index.horizon = inst.horizon;
    index.bit_at.assign(
        static_cast<std::size_t>(index.num_nodes) * index.horizon, -1);
    for (int n = 0; n < index.num_nodes; ++n) {
      for (int t = 0; t < index.horizon; ++t) {
        if (inst.demand.at(n, t)) {
          index.bit_at[static_cast<std::size_t>(n) * index.horizon + t] =
              static_cast<int>(index.cells.size());
          index.cells.emplace_back(n, t);
        }
      }
    }
    return index;
  }

  int size() const { return static_cast<int>(cells.size()); }
  int bit_of(int node, int t) const {
    return bit_at[static_cast<std::size_t>(node) * horizon + t];
  }
};

using MaskBits = boost::dynamic_bitset<std::uint64_t>;

// The demand cells one feasible trajectory covers, with the fewest departures
// found for exactly this bit set and one witness trajectory achieving it.
struct CoverageMask {
  MaskBits bits;
  int trips = 0;
  Trajectory witness;
};

struct ExactOptions {
  // Budget on tracked (node, time, mask) states per agent during enumeration.
  std::size_t max_masks_per_agent = 200'000;
  double timeout_seconds = 60.0;
};

namespace detail {

using Deadline = std::chrono::steady_clock::time_point;

inline Deadline deadline_from(double seconds) {
  return std::chrono::steady_clock::now() +
         std::chrono::duration_cast<std::chrono::steady_clock::duration>(
             std::chrono::duration<double>(seconds));
}

inline void check_deadline(const Deadline& deadline, const char* where) {
  if (std::chrono::steady_clock::now() > deadline) {
    throw TimeoutError(std::string("exact solve timed out during ") + where);
  }
}

struct SearchNode {
  int node;
  int t;
  int trips;
  int parent;  // arena index, -1 at the root
  MaskBits mask;
};

// Turns an arena chain of hover points into a full trajectory.
inline Trajectory witness_from_chain(const Instance& inst, int agent,
                                     const std::vector<SearchNode>& arena,
                                     int leaf) {
  std::vector<std::pair<int, int>> hovers;  // (node, t), reversed
  for (int idx = leaf; idx != -1; idx = arena[idx].parent) {
    hovers.emplace_back(arena[idx].node, arena[idx].t);
  }
  std::reverse(hovers.begin(), hovers.end());

  Trajectory traj(inst.horizon, AgentState::hover(inst.agents[agent].init_node));
  for (std::size_t i = 0; i + 1 < hovers.size(); ++i) {
    const auto [from, t_from] = hovers[i];
    const auto [to, t_to] = hovers[i + 1];
    if (to == from) {
      traj[t_to] = AgentState::hover(to);
      continue;
    }
    const int cost = inst.travel(from, to);
    for (int s = 1; s <= cost; ++s) {
      traj[t_from + s] = AgentState::transit(from, to, s);
    }
    traj[t_to] = AgentState::hover(to);
  }
  if (!hovers.empty()) traj[0] = AgentState::hover(hovers.front().first);
  return traj;
}

inline std::vector<CoverageMask> enumerate_masks_impl(
    const Instance& inst, int agent, const DemandIndex& index,
    const ExactOptions& opts, const Deadline& deadline) {
  const AgentSpec& spec = inst.agents[agent];
  const int last = inst.horizon - 1;
  const int nodes = inst.num_nodes();
  const std::size_t bits = static_cast<std::size_t>(index.size());

  auto slack = [&](int node) {
    return node == spec.fin_node ? 0 : inst.travel(node, spec.fin_node) + 1;
  };

  std::vector<SearchNode> arena;
  using MaskMap = std::unordered_map<MaskBits, int, boost::hash<MaskBits>>;
  // Dedup per (node, time) on the exact bit set, keeping minimal trips.
  // Insertion order drives expansion so results do not depend on hashing.
  std::vector<MaskMap> state_of(static_cast<std::size_t>(nodes) * inst.horizon);
  std::vector<std::vector<int>> order_of(state_of.size());

  auto cell = [&](int node, int t) {
    return static_cast<std::size_t>(node) * inst.horizon + t;
  };

  auto upsert = [&](int node, int t, MaskBits mask, int trips, int parent) {
    MaskMap& map = state_of[cell(node, t)];
    auto [it, inserted] = map.try_emplace(mask, -1);
    if (inserted) {
      if (arena.size() >= opts.max_masks_per_agent) {
        throw CapacityError(
            "mask enumeration for agent " + std::to_string(agent) +
            " exceeded the budget of " +
            std::to_string(opts.max_masks_per_agent) + " states");
      }
      it->second = static_cast<int>(arena.size());
      arena.push_back({node, t, trips, parent, std::move(mask)});
      order_of[cell(node, t)].push_back(it->second);
    } else if (trips < arena[it->second].trips) {
      arena[it->second].trips = trips;
      arena[it->second].parent = parent;
    }
  };

  MaskBits root(bits);
  if (index.bit_of(spec.init_node, 0) >= 0) {
    root.set(index.bit_of(spec.init_node, 0));
  }
  upsert(spec.init_node, 0, std::move(root), 0, -1);

  for (int t = 0; t < last; ++t) {
    check_deadline(deadline, "mask enumeration");
    for (int n = 0; n < nodes; ++n) {
      // order_of may grow while iterating, but only at times > t.
      const std::vector<int>& frontier = order_of[cell(n, t)];
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        const int idx = frontier[i];
        const int trips = arena[idx].trips;
        if (t + 1 + slack(n) <= last) {
          MaskBits mask = arena[idx].mask;
          if (const int b = index.bit_of(n, t + 1); b >= 0) mask.set(b);
          upsert(n, t + 1, std::move(mask), trips, idx);
        }
        for (int k = 0; k < nodes; ++k) {
          if (k == n) continue;
          const int arrive = t + inst.travel(n, k) + 1;
          if (arrive > last || arrive + slack(k) > last) continue;
          MaskBits mask = arena[idx].mask;
          if (const int b = index.bit_of(k, arrive); b >= 0) mask.set(b);
          upsert(k, arrive, std::move(mask), trips + 1, idx);
        }
      }
    }
  }

  struct Final {
    MaskBits bits;
    int trips;
    int leaf;
  };
  std::vector<Final> finals;
  for (int idx : order_of[cell(spec.fin_node, last)]) {
    finals.push_back({arena[idx].mask, arena[idx].trips, idx});
  }
  std::sort(finals.begin(), finals.end(), [](const Final& a, const Final& b) {
    const std::size_t pa = a.bits.count(), pb = b.bits.count();
    if (pa != pb) return pa > pb;
    if (a.trips != b.trips) return a.trips < b.trips;
    return a.bits < b.bits;
  });

  // Drop masks that are strict subsets of a retained mask with <= trips; the
  // superset can always stand in for them in any union.
  std::vector<char> dropped(finals.size(), 0);
  std::size_t pair_ticks = 0;
  for (std::size_t i = 0; i < finals.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (dropped[j]) continue;
      if ((++pair_ticks & 0xfff) == 0) check_deadline(deadline, "mask pruning");
      if (finals[j].bits.count() > finals[i].bits.count() &&
          finals[j].trips <= finals[i].trips &&
          finals[i].bits.is_subset_of(finals[j].bits)) {
        dropped[i] = 1;
        break;
      }
    }
  }

  std::vector<CoverageMask> result;
  for (std::size_t i = 0; i < finals.size(); ++i) {
    if (dropped[i]) continue;
    result.push_back({std::move(finals[i].bits), finals[i].trips,
                      witness_from_chain(inst, agent, arena, finals[i].leaf)});
  }
  return result;
}

}  // namespace detail

// All coverage masks an agent can realize, deduplicated on the exact bit set
// with minimal trips, subset-dominated masks pruned, one witness per mask.
inline std::vector<CoverageMask> enumerate_masks(
    const Instance& inst, int agent, const DemandIndex& index,
    const ExactOptions& opts = {}) {
  return detail::enumerate_masks_impl(inst, agent, index, opts,
                                      detail::deadline_from(opts.timeout_seconds));
}

// Optimality oracle: picks one mask per agent maximizing the union of covered
// cells (ties toward fewer total trips) by depth-first branch and bound.
// Coverage optimality is exact; trips minimality holds among retained masks.
inline SolveResult exact_solve(const Instance& inst,
                               const ExactOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const detail::Deadline deadline = detail::deadline_from(opts.timeout_seconds);
  const DemandIndex index = DemandIndex::build(inst);
  const int num_agents = inst.num_agents();

  std::vector<std::vector<CoverageMask>> masks(num_agents);
  for (int a = 0; a < num_agents; ++a) {
    masks[a] = detail::enumerate_masks_impl(inst, a, index, opts, deadline);
  }

  std::vector<int> agent_order(num_agents);
  std::iota(agent_order.begin(), agent_order.end(), 0);
  auto max_pop = [&](int a) {
    std::size_t best = 0;
    for (const CoverageMask& m : masks[a]) best = std::max(best, m.bits.count());
    return best;
  };
  std::vector<std::size_t> pops(num_agents);
  std::vector<int> min_trips(num_agents, 0);
  for (int a = 0; a < num_agents; ++a) {
    pops[a] = max_pop(a);
    int mt = masks[a].empty() ? 0 : masks[a][0].trips;
    for (const CoverageMask& m : masks[a]) mt = std::min(mt, m.trips);
    min_trips[a] = mt;
  }
  std::stable_sort(agent_order.begin(), agent_order.end(),
                   [&](int a, int b) { return pops[a] > pops[b]; });

  // suffix[i] bounds what levels i.. can still add.
  std::vector<std::size_t> suffix_pop(num_agents + 1, 0);
  std::vector<int> suffix_trips(num_agents + 1, 0);
  for (int i = num_agents - 1; i >= 0; --i) {
    suffix_pop[i] = suffix_pop[i + 1] + pops[agent_order[i]];
    suffix_trips[i] = suffix_trips[i + 1] + min_trips[agent_order[i]];
  }

  std::optional<std::pair<std::size_t, int>> best;  // (covered, trips)
  std::vector<int> choice(num_agents, -1);
  std::vector<int> best_choice(num_agents, -1);
  std::size_t bb_ticks = 0;

  auto dfs = [&](auto&& self, int level, const MaskBits& covered,
                 int trips) -> void {
    if ((++bb_ticks & 0xff) == 0) detail::check_deadline(deadline, "branch and bound");
    if (level == num_agents) {
      const std::size_t cov = covered.count();
      if (!best || cov > best->first ||
          (cov == best->first && trips < best->second)) {
        best = {cov, trips};
        best_choice = choice;
      }
      return;
    }
    const std::size_t bound = covered.count() + suffix_pop[level];
    if (best) {
      if (bound < best->first) return;
      if (bound == best->first && trips + suffix_trips[level] >= best->second) {
        return;
      }
    }
    const int agent = agent_order[level];
    std::vector<int> cand(masks[agent].size());
    std::iota(cand.begin(), cand.end(), 0);
    std::stable_sort(cand.begin(), cand.end(), [&](int x, int y) {
      return (masks[agent][x].bits - covered).count() >
             (masks[agent][y].bits - covered).count();
    });
    for (int c : cand) {
      choice[agent] = c;
      self(self, level + 1, covered | masks[agent][c].bits,
           trips + masks[agent][c].trips);
    }
    choice[agent] = -1;
  };
  dfs(dfs, 0, MaskBits(static_cast<std::size_t>(index.size())), 0);

  SolveResult result;
  result.total = index.size();
  result.schedule.trajectories.resize(num_agents);
  for (int a = 0; a < num_agents; ++a) {
    result.schedule.trajectories[a] = masks[a][best_choice[a]].witness;
  }
  const CoverageReport report = validate_schedule(inst, result.schedule);
  result.covered = report.covered;
  result.trips = report.trips;
  if (best && static_cast<std::size_t>(result.covered) != best->first) {
    throw Error("internal error: witness coverage disagrees with search");
  }
  result.restarts_used = 0;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

// Independent brute-force reference: enumerates every joint trajectory
// combination outright and returns the best covered count. Feasibility
// pruning only; guarded against state-space blowup.
inline int exhaustive_reference(const Instance& inst,
                                long long max_states = 10'000'000) {
  const int last = inst.horizon - 1;
  const int nodes = inst.num_nodes();
  const int num_agents = inst.num_agents();

  // Hover cells of every feasible trajectory, per agent.
  std::vector<std::vector<std::vector<std::pair<int, int>>>> all(num_agents);
  long long steps = 0;
  for (int a = 0; a < num_agents; ++a) {
    const AgentSpec& spec = inst.agents[a];
    std::vector<std::pair<int, int>> hovers;
    auto walk = [&](auto&& self, int node, int t) -> void {
      if (++steps > max_states) {
        throw CapacityError("exhaustive reference exceeded its state guard");
      }
      hovers.emplace_back(node, t);
      if (t == last) {
        all[a].push_back(hovers);
        hovers.pop_back();
        return;
      }
      const int home = node == spec.fin_node
                           ? 0
                           : inst.travel(node, spec.fin_node) + 1;
      if (t + 1 + home <= last) self(self, node, t + 1);
      for (int k = 0; k < nodes; ++k) {
        if (k == node) continue;
        const int arrive = t + inst.travel(node, k) + 1;
        const int back = k == spec.fin_node ? 0 : inst.travel(k, spec.fin_node) + 1;
        if (arrive <= last && arrive + back <= last) self(self, k, arrive);
      }
      hovers.pop_back();
    };
    walk(walk, spec.init_node, 0);
  }

  long long product = 1;
  for (const auto& trajs : all) {
    product *= static_cast<long long>(trajs.size());
    if (product > max_states) {
      throw CapacityError("exhaustive reference exceeded its state guard");
    }
  }

  std::vector<int> occupancy(static_cast<std::size_t>(nodes) * inst.horizon, 0);
  int covered = 0;
  int best = 0;
  auto joint = [&](auto&& self, int a) -> void {
    if (a == num_agents) {
      best = std::max(best, covered);
      return;
    }
    for (const auto& hovers : all[a]) {
      for (const auto& [n, t] : hovers) {
        int& occ = occupancy[static_cast<std::size_t>(n) * inst.horizon + t];
        if (++occ == 1 && inst.demand.at(n, t)) ++covered;
      }
      self(self, a + 1);
      for (const auto& [n, t] : hovers) {
        int& occ = occupancy[static_cast<std::size_t>(n) * inst.horizon + t];
        if (--occ == 0 && inst.demand.at(n, t)) --covered;
      }
    }
  };
  joint(joint, 0);
  return best;
}

}  // namespace dronesched
