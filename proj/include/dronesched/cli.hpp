#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dronesched/bench.hpp"
#include "dronesched/errors.hpp"
#include "dronesched/exact.hpp"
#include "dronesched/greedy.hpp"
#include "dronesched/ilp.hpp"
#include "dronesched/instance.hpp"
#include "dronesched/schedule.hpp"

namespace dronesched {

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write " + path);
}

// Writes to the file when a path is given, otherwise to stdout; returns true
// when stdout was used (so status lines can move to stderr).
inline bool write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return true;
  }
  write_file(path, content);
  return false;
}

inline std::pair<int, int> parse_travel_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error("travel range must look like MIN:MAX");
  }
  try {
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error("travel range must look like MIN:MAX");
  }
}

}  // namespace detail

// Exit codes: 0 success, 1 usage error, 2 validation/infeasibility/parse
// failure, 3 solver capacity or timeout.
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"dronesched: multi-drone monitoring scheduler"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  int gen_nodes = 0, gen_horizon = 0, gen_agents = 0;
  double gen_demand = 0.0;
  std::string gen_travel = "1:3", gen_out;
  std::uint64_t gen_seed = 1;
  bool gen_independent_fin = false;
  gen->add_option("--nodes", gen_nodes, "Number of locations")->required();
  gen->add_option("--horizon", gen_horizon, "Number of time steps")->required();
  gen->add_option("--agents", gen_agents, "Number of drones")->required();
  gen->add_option("--demand", gen_demand,
                  "Fraction of time steps with demand per location")
      ->required();
  gen->add_option("--travel", gen_travel, "Travel time range MIN:MAX")
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_flag("--independent-fin", gen_independent_fin,
                "Draw final nodes independently of initial nodes");
  gen->add_option("-o,--output", gen_out, "Instance file (default: stdout)");

  // greedy
  auto* greedy = app.add_subcommand("greedy", "Solve with the greedy restarts");
  std::string greedy_instance, greedy_out;
  int greedy_threshold = 50;
  std::uint64_t greedy_seed = 0;
  greedy->add_option("instance", greedy_instance, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  greedy->add_option("--threshold", greedy_threshold,
                     "Consecutive non-improving restarts before stopping")
      ->capture_default_str();
  greedy->add_option("--seed", greedy_seed, "RNG seed")->capture_default_str();
  greedy->add_option("-o,--output", greedy_out, "Schedule file (default: stdout)");

  // exact
  auto* exact = app.add_subcommand("exact", "Solve to optimality (small scale)");
  std::string exact_instance, exact_out;
  ExactOptions exact_opts;
  exact->add_option("instance", exact_instance, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  exact->add_option("--max-masks", exact_opts.max_masks_per_agent,
                    "Per-agent mask state budget")
      ->capture_default_str();
  exact->add_option("--timeout", exact_opts.timeout_seconds, "Seconds before giving up")
      ->capture_default_str();
  exact->add_option("-o,--output", exact_out, "Schedule file (default: stdout)");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a schedule against an instance");
  std::string validate_instance, validate_schedule_path;
  validate->add_option("instance", validate_instance, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("schedule", validate_schedule_path, "Schedule file")
      ->required()
      ->check(CLI::ExistingFile);

  // export-lp
  auto* export_lp = app.add_subcommand("export-lp", "Write the model as LP text");
  std::string lp_instance, lp_out, lp_map, lp_mu = "0.000001", lp_mode = "repaired";
  long long lp_max_vars = 5'000'000;
  export_lp->add_option("instance", lp_instance, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  export_lp->add_option("--mu", lp_mu, "Movement penalty (decimal or p/q)")
      ->capture_default_str();
  export_lp->add_option("--mode", lp_mode, "repaired | literal")
      ->check(CLI::IsMember({"repaired", "literal"}))
      ->capture_default_str();
  export_lp->add_option("--max-vars", lp_max_vars, "Variable count guard")
      ->capture_default_str();
  export_lp->add_option("-o,--output", lp_out, "LP file")->required();
  export_lp->add_option("--map", lp_map,
                        "Row mapping file (default: <output>.map)");

  // show
  auto* show = app.add_subcommand("show", "Render a schedule as a text grid");
  std::string show_instance, show_schedule;
  show->add_option("instance", show_instance, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  show->add_option("schedule", show_schedule, "Schedule file")
      ->required()
      ->check(CLI::ExistingFile);

  // bench
  auto* bench = app.add_subcommand("bench", "Run an experiment grid to CSV");
  std::string bench_config, bench_out;
  bench->add_option("config", bench_config, "Experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  bench->add_option("-o,--output", bench_out, "CSV file (default: stdout)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }

  try {
    if (gen->parsed()) {
      const auto [travel_min, travel_max] = detail::parse_travel_range(gen_travel);
      const Instance inst =
          generate_instance(gen_nodes, gen_horizon, gen_agents, gen_demand,
                            travel_min, travel_max, gen_seed, gen_independent_fin);
      detail::write_or_print(gen_out, serialize_instance(inst) + "\n");
    } else if (greedy->parsed()) {
      const Instance inst = parse_instance(detail::read_file(greedy_instance));
      const SolveResult result = greedy_solve(inst, greedy_threshold, greedy_seed);
      const bool to_stdout = detail::write_or_print(
          greedy_out, serialize_schedule(inst, result.schedule) + "\n");
      (to_stdout ? std::cerr : std::cout)
          << "covered " << result.covered << "/" << result.total << " trips "
          << result.trips << " restarts " << result.restarts_used << " elapsed "
          << result.elapsed_seconds << "s\n";
    } else if (exact->parsed()) {
      const Instance inst = parse_instance(detail::read_file(exact_instance));
      const SolveResult result = exact_solve(inst, exact_opts);
      const bool to_stdout = detail::write_or_print(
          exact_out, serialize_schedule(inst, result.schedule) + "\n");
      (to_stdout ? std::cerr : std::cout)
          << "covered " << result.covered << "/" << result.total << " trips "
          << result.trips << " elapsed " << result.elapsed_seconds << "s\n";
    } else if (validate->parsed()) {
      const Instance inst = parse_instance(detail::read_file(validate_instance));
      const Schedule sched =
          parse_schedule(inst, detail::read_file(validate_schedule_path));
      const CoverageReport report = validate_schedule(inst, sched);
      std::cout << "valid: covered " << report.covered << "/" << report.total
                << " trips " << report.trips << "\n";
    } else if (export_lp->parsed()) {
      const Instance inst = parse_instance(detail::read_file(lp_instance));
      const LpModel model =
          build_ilp(inst, parse_rational(lp_mu),
                    lp_mode == "literal" ? LpMode::kLiteral : LpMode::kRepaired,
                    lp_max_vars);
      detail::write_file(lp_out, write_lp(model));
      const std::string map_path = lp_map.empty() ? lp_out + ".map" : lp_map;
      detail::write_file(map_path, write_lp_mapping(model));
      std::cout << "wrote " << lp_out << " (" << model.variables.size()
                << " variables, " << model.rows.size() << " rows) and "
                << map_path << "\n";
    } else if (show->parsed()) {
      const Instance inst = parse_instance(detail::read_file(show_instance));
      const Schedule sched = parse_schedule(inst, detail::read_file(show_schedule));
      std::cout << render_schedule_grid(inst, sched);
    } else if (bench->parsed()) {
      const ExperimentConfig config =
          parse_experiment_config(detail::read_file(bench_config));
      detail::write_or_print(bench_out, run_experiment(config));
    }
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const TimeoutError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args));
}

}  // namespace dronesched
