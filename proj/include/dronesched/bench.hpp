#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dronesched/errors.hpp"
#include "dronesched/exact.hpp"
#include "dronesched/greedy.hpp"
#include "dronesched/instance.hpp"
#include "dronesched/schedule.hpp"

namespace dronesched {

// Experiment grid: the cartesian product of nodes x horizons x agents x
// demand fractions, each point solved once per seed by every configured
// solver. The exact solver is only admitted at its intended small scale.
struct ExperimentConfig {
  std::string experiment;  // exp1 | exp2 | exp3
  std::vector<int> nodes;
  std::vector<int> horizons;
  std::vector<int> agents;
  std::vector<double> demand_fractions;
  std::vector<std::uint64_t> seeds;
  int threshold = 50;
  bool run_greedy = true;
  bool run_exact = false;
  int travel_min = 1;
  int travel_max = 3;
  ExactOptions exact_options;
};

inline void validate_config(const ExperimentConfig& config) {
  if (config.experiment != "exp1" && config.experiment != "exp2" &&
      config.experiment != "exp3") {
    throw Error("experiment must be exp1, exp2, or exp3");
  }
  if (config.nodes.empty() || config.horizons.empty() || config.agents.empty() ||
      config.demand_fractions.empty() || config.seeds.empty()) {
    throw Error("experiment grids and seeds must be non-empty");
  }
  if (!config.run_greedy && !config.run_exact) {
    throw Error("at least one solver must be enabled");
  }
  if (config.threshold < 1) throw Error("threshold must be >= 1");
  if (config.travel_min < 1 || config.travel_min > config.travel_max) {
    throw Error("need 1 <= travel_min <= travel_max");
  }
  if (config.run_exact) {
    for (int n : config.nodes) {
      if (n > 8) throw Error("exact solver admits at most 8 nodes");
    }
    for (int h : config.horizons) {
      if (h > 15) throw Error("exact solver admits at most 15 time steps");
    }
    for (int a : config.agents) {
      if (a > 5) throw Error("exact solver admits at most 5 agents");
    }
  }
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");

  ExperimentConfig config;
  config.experiment = detail::require_field(j, "experiment").get<std::string>();
  auto int_list = [&](const char* name) {
    const nlohmann::json& v = detail::require_field(j, name);
    if (!v.is_array()) throw ParseError(std::string("'") + name + "' must be an array");
    std::vector<int> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) {
        throw ParseError(std::string("'") + name + "' must hold integers");
      }
      out.push_back(x.get<int>());
    }
    return out;
  };
  config.nodes = int_list("nodes");
  config.horizons = int_list("horizons");
  config.agents = int_list("agents");
  const nlohmann::json& fractions = detail::require_field(j, "demand_fractions");
  if (!fractions.is_array()) throw ParseError("'demand_fractions' must be an array");
  for (const auto& x : fractions) {
    if (!x.is_number()) throw ParseError("'demand_fractions' must hold numbers");
    config.demand_fractions.push_back(x.get<double>());
  }
  const nlohmann::json& seeds = detail::require_field(j, "seeds");
  if (!seeds.is_array()) throw ParseError("'seeds' must be an array");
  for (const auto& x : seeds) {
    if (!x.is_number_integer()) throw ParseError("'seeds' must hold integers");
    config.seeds.push_back(x.get<std::uint64_t>());
  }
  if (j.contains("threshold")) config.threshold = j["threshold"].get<int>();
  if (j.contains("solvers")) {
    config.run_greedy = false;
    config.run_exact = false;
    for (const auto& s : j["solvers"]) {
      if (s == "greedy") {
        config.run_greedy = true;
      } else if (s == "exact") {
        config.run_exact = true;
      } else {
        throw ParseError("solvers must be \"greedy\" or \"exact\"");
      }
    }
  }
  if (j.contains("travel")) {
    const auto& travel = j["travel"];
    if (!travel.is_array() || travel.size() != 2) {
      throw ParseError("'travel' must be [min, max]");
    }
    config.travel_min = travel[0].get<int>();
    config.travel_max = travel[1].get<int>();
  }
  if (j.contains("exact_max_masks")) {
    config.exact_options.max_masks_per_agent = j["exact_max_masks"].get<std::size_t>();
  }
  if (j.contains("exact_timeout_seconds")) {
    config.exact_options.timeout_seconds = j["exact_timeout_seconds"].get<double>();
  }
  validate_config(config);
  return config;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct SolverRun {
  std::string status = "ok";  // ok | capacity | timeout
  int covered = 0;
  int total = 0;
  int trips = 0;
  double wall_ms = 0.0;
};

struct CellRuns {
  std::optional<SolverRun> exact;
  std::optional<SolverRun> greedy;
};

// Simple aggregate accumulator over the seeds of one grid point.
struct Stats {
  int count = 0;
  double sum = 0.0, lo = 0.0, hi = 0.0;
  void add(double v) {
    if (count == 0) {
      lo = hi = v;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    sum += v;
    ++count;
  }
  double mean() const { return sum / count; }
};

inline int worker_count(std::size_t tasks) {
  unsigned threads = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("DRONESCHED_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) threads = static_cast<unsigned>(parsed);
  }
  if (threads == 0) threads = 1;
  return static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(tasks, 1)));
}

}  // namespace detail

inline constexpr const char* kBenchCsvHeader =
    "experiment,solver,nodes,horizon,agents,demand_fraction,seed,covered,"
    "total,ratio,trips,status,wall_ms";

// Runs the configured grid and returns CSV text: one row per
// (grid point, seed, solver) plus mean/min/max aggregate rows per
// (grid point, solver). Content except wall_ms is deterministic for a given
// config. Grid cells run in parallel, capped by DRONESCHED_THREADS (0 =
// auto); rows are assembled in grid order afterwards.
inline std::string run_experiment(const ExperimentConfig& config) {
  validate_config(config);

  struct GridPoint {
    int nodes, horizon, agents;
    double fraction;
  };
  std::vector<GridPoint> points;
  for (int n : config.nodes) {
    for (int h : config.horizons) {
      for (int a : config.agents) {
        for (double f : config.demand_fractions) {
          points.push_back({n, h, a, f});
        }
      }
    }
  }

  const std::size_t num_tasks = points.size() * config.seeds.size();
  std::vector<detail::CellRuns> cells(num_tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run_task = [&](std::size_t task) {
    const GridPoint& point = points[task / config.seeds.size()];
    const std::uint64_t seed = config.seeds[task % config.seeds.size()];
    const Instance inst =
        generate_instance(point.nodes, point.horizon, point.agents,
                          point.fraction, config.travel_min, config.travel_max,
                          seed);
    detail::CellRuns& cell = cells[task];
    if (config.run_exact) {
      detail::SolverRun run;
      run.total = inst.demand.total();
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SolveResult result = exact_solve(inst, config.exact_options);
        run.covered = result.covered;
        run.trips = result.trips;
      } catch (const CapacityError&) {
        run.status = "capacity";
      } catch (const TimeoutError&) {
        run.status = "timeout";
      }
      run.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      cell.exact = run;
    }
    if (config.run_greedy) {
      detail::SolverRun run;
      run.total = inst.demand.total();
      const auto t0 = std::chrono::steady_clock::now();
      const SolveResult result = greedy_solve(inst, config.threshold, seed);
      run.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      run.covered = result.covered;
      run.trips = result.trips;
      cell.greedy = run;
    }
  };

  const int workers = detail::worker_count(num_tasks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t task = next.fetch_add(1);
        if (task >= num_tasks) return;
        try {
          run_task(task);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::string csv = kBenchCsvHeader;
  csv += '\n';
  auto emit = [&](const GridPoint& point, const std::string& solver,
                  const std::string& seed, const std::string& covered,
                  const std::string& total, const std::string& ratio,
                  const std::string& trips, const std::string& status,
                  const std::string& wall_ms) {
    csv += config.experiment + ',' + solver + ',' + std::to_string(point.nodes) +
           ',' + std::to_string(point.horizon) + ',' +
           std::to_string(point.agents) + ',' +
           detail::format_double(point.fraction) + ',' + seed + ',' + covered +
           ',' + total + ',' + ratio + ',' + trips + ',' + status + ',' +
           wall_ms + '\n';
  };

  for (std::size_t p = 0; p < points.size(); ++p) {
    const GridPoint& point = points[p];
    struct SolverStats {
      detail::Stats covered, total, ratio, trips, wall;
    };
    SolverStats exact_stats, greedy_stats;

    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
      const detail::CellRuns& cell = cells[p * config.seeds.size() + s];
      const std::string seed = std::to_string(config.seeds[s]);
      if (cell.exact) {
        const detail::SolverRun& run = *cell.exact;
        if (run.status == "ok") {
          emit(point, "exact", seed, std::to_string(run.covered),
               std::to_string(run.total), "", std::to_string(run.trips), "ok",
               detail::format_double(run.wall_ms));
          exact_stats.covered.add(run.covered);
          exact_stats.total.add(run.total);
          exact_stats.trips.add(run.trips);
          exact_stats.wall.add(run.wall_ms);
        } else {
          emit(point, "exact", seed, "", std::to_string(run.total), "", "",
               run.status, detail::format_double(run.wall_ms));
        }
      }
      if (cell.greedy) {
        const detail::SolverRun& run = *cell.greedy;
        std::string ratio;
        if (cell.exact && cell.exact->status == "ok" && cell.exact->covered > 0) {
          const double r = static_cast<double>(run.covered) /
                           static_cast<double>(cell.exact->covered);
          ratio = detail::format_double(r);
          greedy_stats.ratio.add(r);
        }
        emit(point, "greedy", seed, std::to_string(run.covered),
             std::to_string(run.total), ratio, std::to_string(run.trips), "ok",
             detail::format_double(run.wall_ms));
        greedy_stats.covered.add(run.covered);
        greedy_stats.total.add(run.total);
        greedy_stats.trips.add(run.trips);
        greedy_stats.wall.add(run.wall_ms);
      }
    }

    auto emit_aggregates = [&](const std::string& solver, const SolverStats& st) {
      if (st.covered.count == 0) return;
      // which: 0 = mean, 1 = min, 2 = max
      auto pick = [](const detail::Stats& s, int which) -> std::string {
        if (s.count == 0) return "";
        return detail::format_double(which == 0 ? s.mean()
                                     : which == 1 ? s.lo
                                                  : s.hi);
      };
      const char* kinds[3] = {"mean", "min", "max"};
      for (int which = 0; which < 3; ++which) {
        emit(point, solver, "", pick(st.covered, which), pick(st.total, which),
             pick(st.ratio, which), pick(st.trips, which), kinds[which],
             pick(st.wall, which));
      }
    };
    if (config.run_exact) emit_aggregates("exact", exact_stats);
    if (config.run_greedy) emit_aggregates("greedy", greedy_stats);
  }

  return csv;
}

// Fixed-width text grid: one row per location, one column per time step.
// Cells show the lowest hovering agent id, with '*' appended when the cell is
// demanded (and therefore covered), '!' where demand went unserved, and
// blanks while every agent is in transit or elsewhere.
inline std::string render_schedule_grid(const Instance& inst,
                                        const Schedule& sched) {
  validate_schedule(inst, sched);
  const int N = inst.num_nodes();
  const int H = inst.horizon;

  std::vector<int> lowest(static_cast<std::size_t>(N) * H, -1);
  for (int a = sched.num_agents() - 1; a >= 0; --a) {
    const Trajectory& traj = sched.trajectories[a];
    for (int t = 0; t < H; ++t) {
      if (traj[t].is_hover()) {
        lowest[static_cast<std::size_t>(traj[t].node) * H + t] = a;
      }
    }
  }

  auto cell_text = [&](int n, int t) -> std::string {
    const int agent = lowest[static_cast<std::size_t>(n) * H + t];
    const bool demanded = inst.demand.at(n, t) != 0;
    if (agent < 0) return demanded ? "!" : "";
    std::string s = std::to_string(agent);
    if (demanded) s += '*';
    return s;
  };

  std::size_t cell_w = std::to_string(H - 1).size();
  for (int n = 0; n < N; ++n) {
    for (int t = 0; t < H; ++t) {
      cell_w = std::max(cell_w, cell_text(n, t).size());
    }
  }
  const std::size_t label_w = std::string("loc ").size() +
                              std::to_string(N - 1).size();

  auto pad_right = [](std::string s, std::size_t w) {
    while (s.size() < w) s += ' ';
    return s;
  };
  auto pad_left = [](std::string s, std::size_t w) {
    while (s.size() < w) s.insert(s.begin(), ' ');
    return s;
  };
  auto strip_trailing = [](std::string& s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
  };

  std::string out;
  std::string line = pad_right("t", label_w) + " |";
  for (int t = 0; t < H; ++t) line += ' ' + pad_left(std::to_string(t), cell_w);
  strip_trailing(line);
  out += line + '\n';
  for (int n = 0; n < N; ++n) {
    line = pad_right("loc " + std::to_string(n), label_w) + " |";
    for (int t = 0; t < H; ++t) line += ' ' + pad_left(cell_text(n, t), cell_w);
    strip_trailing(line);
    out += line + '\n';
  }
  return out;
}

}  // namespace dronesched
