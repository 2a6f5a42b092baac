#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roadplan/equilibrium.hpp"
#include "roadplan/error.hpp"
#include "roadplan/interaction.hpp"
#include "roadplan/network.hpp"
#include "roadplan/portfolio.hpp"
#include "roadplan/scenario.hpp"
#include "roadplan/scheduler.hpp"

namespace fs = std::filesystem;
using namespace roadplan;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kSolver = 3 };

struct RunConfig {
  std::string net, trips, nodes, upgrades, cache, out;
  double gap = 1e-4;
  int max_iters = 1000;
  std::string algorithm = "desopo-pape-lll";
  int threads = 1;
  int workers = 1;

  double m = 3650.0;
  double rate = 0.04;
  std::optional<double> budget;
  std::vector<double> budgets;

  std::optional<double> pairs_threshold;
  std::optional<std::size_t> pairs_count;
  std::string pairs_file;
  std::optional<int> kmeans_k;
  int kmeans_restarts = 10;
  std::uint64_t seed = 1;

  // deltas
  std::string mode = "individual";
  int max_size = 0;
  std::vector<std::string> subsets;

  // select
  std::string problem;

  // schedule
  std::string method = "greedy";
  std::string growth;
  std::vector<std::string> period_trips;
  std::string evaluate;
  bool actual = false;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void need(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

SolverSettings solver_settings(const RunConfig& c) {
  SolverSettings s;
  s.target_gap = c.gap;
  s.max_iters = c.max_iters;
  s.algorithm = parse_shortest_path_algorithm(c.algorithm);
  s.threads = c.threads;
  return s;
}

Network load_network(const RunConfig& c) {
  need(c.net, "--net");
  Network net = read_network(c.net);
  if (!c.nodes.empty()) net.coordinates = read_nodes(c.nodes);
  return net;
}

DemandMatrix load_demand(const RunConfig& c) {
  need(c.trips, "--trips");
  return read_demand(c.trips);
}

UpgradeSet load_upgrades(const RunConfig& c, const Network* net) {
  need(c.upgrades, "--upgrades");
  return read_upgrades(c.upgrades, net);
}

// Writes to --out when given, otherwise to stdout.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  fn(out);
}

bool wants_prediction(const RunConfig& c) {
  return c.pairs_threshold || c.pairs_count || !c.pairs_file.empty() || c.kmeans_k;
}

PairSet predicted_pairs(const RunConfig& c, const Network& net, const UpgradeSet& set) {
  const int chosen = (c.pairs_threshold ? 1 : 0) + (c.pairs_count ? 1 : 0) +
                     (c.pairs_file.empty() ? 0 : 1) + (c.kmeans_k ? 1 : 0);
  if (chosen > 1) {
    throw UsageError("use only one of --pairs-threshold, --pairs-count, --pairs-file, --kmeans-k");
  }
  if (!c.pairs_file.empty()) {
    std::ifstream in(c.pairs_file);
    if (!in) throw DataError("cannot open file: " + c.pairs_file);
    try {
      return read_pair_list(in, set);
    } catch (const ParseError& e) {
      throw ParseError(c.pairs_file + ": " + e.what());
    }
  }
  if (c.kmeans_k) {
    return predict_pairs_clustering(upgrade_locations(net, set), *c.kmeans_k, c.kmeans_restarts,
                                    c.seed);
  }
  const auto distances = pairwise_distances(net, set);
  if (c.pairs_threshold) return predict_pairs_threshold(distances, *c.pairs_threshold);
  if (c.pairs_count) return predict_pairs_count(distances, *c.pairs_count);
  return {};
}

// ---------------------------------------------------------------------------

int cmd_solve(const RunConfig& c) {
  const Network net = load_network(c);
  const DemandMatrix demand = load_demand(c);
  const Assignment a = solve_ue(net, demand, solver_settings(c));
  if (!c.out.empty()) emit(c.out, [&](std::ostream& o) { write_flow_file(o, net, a); });
  std::cout << "VHT " << format_double(a.vht) << "\n"
            << "relative_gap " << format_double(a.relative_gap) << "\n"
            << "iterations " << a.iterations << "\n";
  if (!a.converged) {
    std::cerr << "error: target gap " << c.gap << " not reached in " << c.max_iters
              << " iterations\n";
    return kSolver;
  }
  return kOk;
}

std::vector<SubsetMask> requested_subsets(const RunConfig& c, const Network& net,
                                          const UpgradeSet& set) {
  const std::size_t n = set.size();
  if (c.mode == "individual") return individual_subsets(n);
  if (c.mode == "pairs") {
    auto out = individual_subsets(n);
    if (wants_prediction(c)) {
      for (SubsetMask m : pair_masks(predicted_pairs(c, net, set))) out.push_back(m);
    } else {
      const auto all = all_pair_subsets(n);
      out.insert(out.end(), all.begin(), all.end());
    }
    return out;
  }
  if (c.mode == "all-subsets") {
    if (n > 20) throw DataError("all-subsets mode supports at most 20 upgrades");
    return subsets_up_to(n, c.max_size > 0 ? c.max_size : static_cast<int>(n));
  }
  if (c.mode == "explicit") {
    if (c.subsets.empty()) throw UsageError("explicit mode needs --subset");
    std::vector<SubsetMask> out;
    for (const auto& label : c.subsets) out.push_back(parse_subset_label(set, label));
    return out;
  }
  throw UsageError("unknown mode '" + c.mode + "'");
}

int cmd_deltas(const RunConfig& c) {
  need(c.cache, "--cache");
  const Network net = load_network(c);
  const DemandMatrix demand = load_demand(c);
  const UpgradeSet set = load_upgrades(c, &net);
  const SolverSettings settings = solver_settings(c);
  const CacheKey key = make_cache_key(net, demand, set, settings.target_gap);

  DeltaTable table;
  table.upgrade_count = set.size();
  if (fs::exists(c.cache)) {
    std::ifstream in(c.cache);
    auto [stored, cached] = read_delta_cache(in, set);
    if (!(stored == key)) {
      throw DataError(c.cache + ": cache was built for different inputs or gap");
    }
    table = std::move(cached);
  }
  const auto subsets = requested_subsets(c, net, set);
  const std::size_t solves = extend_deltas(table, net, demand, set, subsets, settings, c.workers);

  const fs::path tmp = c.cache + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    write_delta_cache(out, key, set, table);
  }
  fs::rename(tmp, c.cache);
  std::cout << "new_solves " << solves << "\n"
            << "cached_subsets " << table.evaluated.size() << "\n";
  return kOk;
}

int cmd_predict(const RunConfig& c) {
  need(c.nodes, "--nodes");
  const Network net = load_network(c);
  const UpgradeSet set = load_upgrades(c, &net);
  const auto distances = pairwise_distances(net, set);
  if (!wants_prediction(c)) {
    emit(c.out, [&](std::ostream& o) { write_pair_list(o, set, distances); });
    return kOk;
  }
  const PairSet pairs = predicted_pairs(c, net, set);
  emit(c.out, [&](std::ostream& o) { write_pair_list(o, set, distances, &pairs); });
  return kOk;
}

int cmd_errors(const RunConfig& c) {
  need(c.cache, "--cache");
  const UpgradeSet set = load_upgrades(c, nullptr);
  std::ifstream in(c.cache);
  if (!in) throw DataError("cannot open file: " + c.cache);
  const DeltaTable table = read_delta_cache(in, set).second;

  std::vector<ErrorRowSpec> rows = {{"individual only", 1, std::nullopt},
                                    {"all pairwise", 2, std::nullopt}};
  if (wants_prediction(c)) {
    std::optional<Network> net;
    if (c.pairs_file.empty()) net = load_network(c);
    const PairSet pairs = predicted_pairs(c, net ? *net : Network{}, set);
    rows.push_back({"significant pairwise", 2, pair_masks(pairs)});
  }
  const int n = static_cast<int>(set.size());
  for (int k = 3; k < n; ++k) {
    rows.push_back({"all subsets size <= " + std::to_string(k), k, std::nullopt});
  }
  const auto report = error_report(table, rows);
  emit(c.out, [&](std::ostream& o) { write_error_report(o, report); });
  return kOk;
}

SelectionProblem selection_input(const RunConfig& c) {
  if (!c.problem.empty()) {
    std::ifstream in(c.problem);
    if (!in) throw DataError("cannot open file: " + c.problem);
    SelectionProblem p;
    try {
      p = parse_selection_problem(in);
    } catch (const ParseError& e) {
      throw ParseError(c.problem + ": " + e.what());
    }
    if (c.budget) p.budget = *c.budget;
    return p;
  }
  need(c.cache, "--cache (or --problem)");
  if (!c.budget) throw UsageError("--budget is required");
  const UpgradeSet set = load_upgrades(c, nullptr);
  std::ifstream in(c.cache);
  if (!in) throw DataError("cannot open file: " + c.cache);
  const DeltaTable table = read_delta_cache(in, set).second;
  return selection_problem_from(table, set, *c.budget, c.m);
}

int cmd_select(const RunConfig& c) {
  const SelectionProblem p = selection_input(c);
  const Selection s = optimize_subset(p);
  const Selection check = evaluate_selection(p, s.chosen);
  if (!check.feasible || check.spend > p.budget + 1e-9 * std::max(1.0, p.budget)) {
    std::cerr << "internal error: selection exceeds the budget\n";
    return kSolver;
  }
  write_selection(std::cout, p, s);
  if (!c.out.empty()) emit(c.out, [&](std::ostream& o) { write_selection(o, p, s); });
  return kOk;
}

int cmd_schedule(const RunConfig& c) {
  if (c.budgets.empty()) throw UsageError("--budgets is required");
  PlanningHorizon h;
  h.budgets = c.budgets;
  h.rate = c.rate;
  h.m = c.m;
  h.validate();

  const Network net = load_network(c);
  const UpgradeSet set = load_upgrades(c, &net);
  PeriodDemand demand;
  if (!c.period_trips.empty()) {
    if (!c.growth.empty()) throw UsageError("use either --growth or --period-trips");
    for (const auto& f : c.period_trips) demand.explicit_periods.push_back(read_demand(f));
  } else {
    demand.base = load_demand(c);
    if (!c.growth.empty()) demand.rules = read_scale_rules(c.growth);
  }
  const SolverSettings settings = solver_settings(c);

  Schedule schedule;
  if (!c.evaluate.empty()) {
    std::ifstream in(c.evaluate);
    if (!in) throw DataError("cannot open file: " + c.evaluate);
    try {
      schedule = read_schedule_listing(in, set);
    } catch (const ParseError& e) {
      throw ParseError(c.evaluate + ": " + e.what());
    }
    schedule.npv = evaluate_schedule(net, demand, set, h, schedule, settings, c.workers);
  } else if (c.method == "greedy") {
    const PairSet pairs = wants_prediction(c) ? predicted_pairs(c, net, set) : PairSet{};
    schedule = greedy_schedule(net, demand, set, h, pairs, settings, c.workers).schedule;
  } else if (c.method == "independent") {
    const auto values = independent_values(net, demand, set, h, settings, c.workers);
    schedule = independent_schedule(values, set.costs(), h);
  } else {
    throw UsageError("unknown method '" + c.method + "'");
  }

  const FeasibilityReport report = check_schedule(set, h, schedule);
  if (!report.feasible()) {
    std::cerr << "internal error: schedule fails validation\n";
    for (const auto& v : report.violations) std::cerr << "  " << v << "\n";
    return kSolver;
  }
  write_schedule_table(std::cout, set, h, schedule);
  if (c.actual && c.evaluate.empty()) {
    std::cout << "actual_npv "
              << format_double(evaluate_schedule(net, demand, set, h, schedule, settings, c.workers))
              << "\n";
  }
  if (!c.out.empty()) emit(c.out, [&](std::ostream& o) { write_schedule_listing(o, set, schedule); });
  return kOk;
}

// ---------------------------------------------------------------------------

void add_solver_flags(CLI::App& app, RunConfig& c) {
  app.add_option("--gap", c.gap, "Target relative gap")->check(CLI::PositiveNumber);
  app.add_option("--max-iters", c.max_iters, "Frank-Wolfe iteration limit")
      ->check(CLI::PositiveNumber);
  app.add_option("--algorithm", c.algorithm,
                 "dijkstra, bellman-ford, desopo-pape-lll or slf-lll");
  app.add_option("--threads", c.threads, "Threads per assignment")->check(CLI::PositiveNumber);
  app.add_option("--workers", c.workers, "Concurrent scenario solves")->check(CLI::PositiveNumber);
}

void add_pair_flags(CLI::App& app, RunConfig& c) {
  app.add_option("--pairs-threshold", c.pairs_threshold, "Pair distance threshold")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--pairs-count", c.pairs_count, "Closest N pairs");
  app.add_option("--pairs-file", c.pairs_file, "Explicit pair list");
  app.add_option("--kmeans-k", c.kmeans_k, "Cluster count")->check(CLI::PositiveNumber);
  app.add_option("--kmeans-restarts", c.kmeans_restarts, "k-means restarts")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "k-means seed");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Road network upgrade planning"};
  app.set_config("--config", "", "TOML or INI file with default flag values");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  app.add_option("--net", c.net, "TNTP network file");
  app.add_option("--trips", c.trips, "TNTP trips file");
  app.add_option("--nodes", c.nodes, "TNTP node coordinate file");
  app.add_option("--upgrades", c.upgrades, "Upgrade file");
  app.add_option("--cache", c.cache, "Delta cache file");
  app.add_option("--out", c.out, "Output file");
  app.add_option("--m", c.m, "Value of a daily VHT saving, $ per year")
      ->check(CLI::NonNegativeNumber);
  add_solver_flags(app, c);
  add_pair_flags(app, c);

  auto* solve = app.add_subcommand("solve", "Solve user equilibrium and write link flows");
  solve->fallthrough();

  auto* deltas = app.add_subcommand("deltas", "Evaluate upgrade subsets into the delta cache");
  deltas->fallthrough();
  deltas->add_option("--mode", c.mode, "individual, pairs, all-subsets or explicit")
      ->check(CLI::IsMember({"individual", "pairs", "all-subsets", "explicit"}));
  deltas->add_option("--max-size", c.max_size, "Largest subset in all-subsets mode");
  deltas->add_option("--subset", c.subsets, "Comma-separated ids (explicit mode, repeatable)");

  auto* predict = app.add_subcommand("predict-pairs", "List upgrade pairs likely to interact");
  predict->fallthrough();

  auto* errors = app.add_subcommand("errors", "Estimator error table from a delta cache");
  errors->fallthrough();

  auto* select = app.add_subcommand("select", "Choose the best upgrade subset");
  select->fallthrough();
  select->add_option("--budget", c.budget, "Budget, $000s")->check(CLI::NonNegativeNumber);
  select->add_option("--problem", c.problem, "Selection problem file instead of a cache");

  auto* schedule = app.add_subcommand("schedule", "Schedule upgrades over several periods");
  schedule->fallthrough();
  schedule->add_option("--budgets", c.budgets, "Per-period budgets, $000s")->delimiter(',');
  schedule->add_option("--rate", c.rate, "Discount rate per period")
      ->check(CLI::NonNegativeNumber);
  schedule->add_option("--method", c.method, "greedy or independent")
      ->check(CLI::IsMember({"greedy", "independent"}));
  schedule->add_option("--growth", c.growth, "Demand scale rules per period");
  schedule->add_option("--period-trips", c.period_trips, "One trips file per period")
      ->delimiter(',');
  schedule->add_option("--evaluate", c.evaluate, "Recompute the NPV of a schedule listing");
  schedule->add_flag("--actual", c.actual, "Also report the NPV recomputed by UE solves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return cmd_solve(c);
    if (*deltas) return cmd_deltas(c);
    if (*predict) return cmd_predict(c);
    if (*errors) return cmd_errors(c);
    if (*select) return cmd_select(c);
    if (*schedule) return cmd_schedule(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
