// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "roadplan/equilibrium.hpp"
#include "roadplan/portfolio.hpp"
#include "roadplan/scenario.hpp"
#include "roadplan/scheduler.hpp"
#include "roadplan/shortest_path.hpp"

using namespace roadplan;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  double time_limit = 0.0;  // seconds; 0 = none
};

class Checker {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_ < 5) {
      failures_text_ += (failures_text_.empty() ? "" : "; ") + what;
    }
    if (!ok) ++failures_;
  }
  bool ok() const { return failures_ == 0; }
  std::string failures() const {
    return failures_text_ + (failures_ > 5 ? " (+" + std::to_string(failures_ - 5) + " more)" : "");
  }

 private:
  int failures_ = 0;
  std::string failures_text_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool close_rel(double a, double b, double rel) {
  if (a == b) return true;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// 1 -------------------------------------------------------------------------
Outcome shortest_path_equivalence() {
  Checker c;
  std::mt19937_64 rng(20240601);
  const ShortestPathAlgorithm others[] = {ShortestPathAlgorithm::kBellmanFord,
                                          ShortestPathAlgorithm::kDesopoPapeLll,
                                          ShortestPathAlgorithm::kSlfLll};
  std::size_t labels = 0;
  for (int g = 0; g < 1000; ++g) {
    auto graph = fixtures::random_graph(rng, 200, 2000);
    std::uniform_int_distribution<NodeId> pick(1, graph.net.node_count);
    const NodeId source = pick(rng);
    const auto oracle =
        shortest_paths(graph.net, graph.costs, source, ShortestPathAlgorithm::kDijkstra);
    for (auto algo : others) {
      const auto t = shortest_paths(graph.net, graph.costs, source, algo);
      for (NodeId n = 1; n <= graph.net.node_count; ++n) {
        const double a = t.label(n);
        const double b = oracle.label(n);
        const bool same = (a == b) || (std::isfinite(b) && close_rel(a, b, 1e-12));
        c.require(same, "graph " + std::to_string(g) + " " + to_string(algo) + " node " +
                            std::to_string(n));
        ++labels;
      }
    }
  }
  return {c.ok(), c.ok() ? std::to_string(labels) + " labels compared" : c.failures(), 30.0};
}

// 2 -------------------------------------------------------------------------
Outcome two_link_equilibrium() {
  SolverSettings s;
  s.target_gap = 1e-8;
  s.max_iters = 100000;
  const Assignment a =
      solve_ue(fixtures::two_link_network(), fixtures::single_pair(1, 2, 1500.0, 2), s);
  const double x = fixtures::two_link_oracle(1500.0);
  const double err = std::max(std::abs(a.flows[0] - x), std::abs(a.flows[1] - (1500.0 - x)));
  const bool ok = a.converged && err < 1e-4;
  return {ok, "max flow error " + fmt("%.2e", err) + " at gap " + fmt("%.1e", a.relative_gap),
          1.0};
}

// 3 -------------------------------------------------------------------------
Outcome braess() {
  Checker c;
  SolverSettings s;
  s.target_gap = 1e-8;
  s.max_iters = 100000;
  const Network base = fixtures::braess_network();
  const DemandMatrix demand = fixtures::braess_demand();
  const UpgradeSet set = fixtures::braess_upgrades();
  const std::vector<std::size_t> all = {0};
  const Assignment before = solve_ue(base, demand, s);
  const Assignment after = solve_ue(apply_upgrades(base, set, all), demand, s);
  c.require(before.converged && after.converged, "not converged");
  c.require(after.vht > before.vht, "bypass did not increase VHT");

  // independent path-based MSA on the same instance
  auto lat = [](double f) { return 1.0 + f / 100.0; };
  const double q = fixtures::kBraessDemand;
  const auto h0 = fixtures::msa_path_flows(
      2, q,
      [&](const std::vector<double>& h) {
        return std::vector<double>{lat(h[0]) + 45.0, 45.0 + lat(h[1])};
      },
      200000);
  const double vht0 = h0[0] * (lat(h0[0]) + 45.0) + h0[1] * (45.0 + lat(h0[1]));
  // paths 1-2-4, 1-3-4, 1-2-3-4
  const auto h1 = fixtures::msa_path_flows(
      3, q,
      [&](const std::vector<double>& h) {
        const double f12 = h[0] + h[2];
        const double f34 = h[1] + h[2];
        return std::vector<double>{lat(f12) + 45.0, 45.0 + lat(f34), lat(f12) + lat(f34)};
      },
      200000);
  const double f12 = h1[0] + h1[2];
  const double f34 = h1[1] + h1[2];
  const double vht1 = f12 * lat(f12) + f34 * lat(f34) + 45.0 * (h1[0] + h1[1]);
  c.require(close_rel(before.vht, vht0, 1e-3), "base VHT differs from MSA");
  c.require(close_rel(after.vht, vht1, 1e-3), "bypass VHT differs from MSA");
  c.require(close_rel(before.vht, fixtures::kBraessBaseVht, 1e-6), "base VHT not analytic");
  c.require(close_rel(after.vht, fixtures::kBraessBypassVht, 1e-6), "bypass VHT not analytic");

  const auto singles = individual_subsets(1);
  const DeltaTable t = compute_deltas(base, demand, set, singles, s);
  c.require(t.delta(singleton(0)) < 0.0, "v_1 is not negative");
  std::string detail = "VHT " + fmt("%.1f", before.vht) + " -> " + fmt("%.1f", after.vht) +
                       ", v_1 = " + fmt("%.1f", t.delta(singleton(0)));
  return {c.ok(), c.ok() ? detail : c.failures(), 1.0};
}

// 4 -------------------------------------------------------------------------
Outcome sioux_falls() {
  Checker c;
  const Network net = read_network(fixtures::data_file("SiouxFalls_net.tntp"));
  const DemandMatrix demand = read_demand(fixtures::data_file("SiouxFalls_trips.tntp"));
  SolverSettings s;
  s.target_gap = 1e-4;
  s.max_iters = 2000;
  s.threads = 4;
  const auto t0 = std::chrono::steady_clock::now();
  const Assignment a = solve_ue(net, demand, s);
  const double solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(a.converged && a.relative_gap <= 1e-4, "gap " + fmt("%.3e", a.relative_gap));
  c.require(a.iterations <= 2000, "too many iterations");
  for (std::size_t k = 1; k < a.history.size(); ++k) {
    c.require(a.history[k].beckmann <= a.history[k - 1].beckmann,
              "Beckmann increased at iteration " + std::to_string(k));
  }
  // in-flow minus out-flow equals net demand at every node
  std::vector<double> balance(static_cast<std::size_t>(net.node_count) + 1, 0.0);
  for (std::size_t l = 0; l < net.links.size(); ++l) {
    balance[static_cast<std::size_t>(net.links[l].to)] += a.flows[l];
    balance[static_cast<std::size_t>(net.links[l].from)] -= a.flows[l];
  }
  for (const auto& [od, q] : demand.entries()) {
    balance[static_cast<std::size_t>(od.second)] -= q;
    balance[static_cast<std::size_t>(od.first)] += q;
  }
  double worst = 0.0;
  for (std::size_t n = 1; n < balance.size(); ++n) worst = std::max(worst, std::abs(balance[n]));
  c.require(worst <= 1e-6, "conservation error " + fmt("%.2e", worst));

  SolverSettings one = s;
  one.threads = 1;
  SolverSettings eight = s;
  eight.threads = 8;
  const Assignment a1 = solve_ue(net, demand, one);
  const Assignment a8 = solve_ue(net, demand, eight);
  c.require(a1.flows == a8.flows, "threads 1 and 8 differ");
  c.require(a1.flows == a.flows, "threads 1 and 4 differ");
  c.require(solve_time < 10.0, "4-thread solve took " + fmt("%.2f", solve_time) + " s");
  const std::string detail = "gap " + fmt("%.2e", a.relative_gap) + " after " +
                             std::to_string(a.iterations) + " iterations, VHT " +
                             fmt("%.0f", a.vht) + ", conservation " + fmt("%.1e", worst) +
                             ", solve " + fmt("%.2f", solve_time) + " s";
  return {c.ok(), c.ok() ? detail : c.failures(), 0.0};
}

// 5 -------------------------------------------------------------------------
Outcome k_wise_estimator() {
  Checker c;
  const auto fx = fixtures::six_upgrade_case();
  SolverSettings s;
  s.target_gap = 1e-4;
  s.max_iters = 200000;
  const auto subsets = subsets_up_to(6, 6);
  const DeltaTable t = compute_deltas(fx.net, fx.demand, fx.set, subsets, s);
  c.require(t.evaluated.size() == 63, "expected 63 subsets");
  for (const auto& [mask, ev] : t.evaluated) {
    const double est = estimate_delta(t, mask, subset_size(mask));
    c.require(close_rel(est, ev.delta_vht, 1e-9), "exactness fails for " + subset_label(fx.set, mask));
  }
  const std::vector<int> orders = {1, 2, 3, 4, 5, 6};
  const auto rows = error_report(t, orders);
  std::string trend;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    trend += (k ? " > " : "") + fmt("%.3f%%", rows[k].mean_error_percent);
    if (k > 0) {
      c.require(rows[k].mean_error_percent <= rows[k - 1].mean_error_percent,
                "mean error rose at k=" + std::to_string(k + 1));
    }
  }
  c.require(rows.back().mean_error_percent < 1e-7, "non-zero error at full order");
  return {c.ok(), c.ok() ? "mean error by k: " + trend : c.failures(), 0.0};
}

// 6 -------------------------------------------------------------------------

// Brute force written independently of the library: objective is summed
// directly from the problem data.
struct BruteBest {
  std::vector<std::size_t> chosen;
  double objective = 0.0;
};

BruteBest brute_force_subset(const SelectionProblem& p) {
  const std::size_t n = p.size();
  const double w = p.m / 1000.0 * p.discount;
  BruteBest best;
  for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
    double spend = 0.0;
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1U)) continue;
      spend += p.costs[i];
      value += p.values[i];
      for (std::size_t j = i + 1; j < n; ++j) {
        if (mask >> j & 1U) {
          auto it = p.corrections.find({i, j});
          if (it != p.corrections.end()) value += it->second;
        }
      }
    }
    if (spend > p.budget + 1e-9 * std::max(1.0, p.budget)) continue;
    const double obj = value * w - spend;
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) chosen.push_back(i);
    }
    const bool better =
        obj > best.objective + 1e-9 * (1.0 + std::abs(best.objective)) ||
        (std::abs(obj - best.objective) <= 1e-9 * (1.0 + std::abs(best.objective)) &&
         (chosen.size() < best.chosen.size() ||
          (chosen.size() == best.chosen.size() && chosen < best.chosen)));
    if (better) {
      best.objective = obj;
      best.chosen = chosen;
    }
  }
  return best;
}

// 0/1 knapsack by dynamic programming over integer capacity.
double knapsack_dp(const std::vector<int>& profit, const std::vector<int>& weight, int capacity) {
  std::vector<double> best(static_cast<std::size_t>(capacity) + 1, 0.0);
  for (std::size_t i = 0; i < profit.size(); ++i) {
    if (profit[i] <= 0) continue;
    for (int cap = capacity; cap >= weight[i]; --cap) {
      best[static_cast<std::size_t>(cap)] =
          std::max(best[static_cast<std::size_t>(cap)],
                   best[static_cast<std::size_t>(cap - weight[i])] + profit[i]);
    }
  }
  return best[static_cast<std::size_t>(capacity)];
}

Outcome portfolio_exactness() {
  Checker c;
  std::mt19937_64 rng(777);
  int nontrivial = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 15);
    SelectionProblem p;
    std::uniform_real_distribution<double> value(-50.0, 500.0);
    std::uniform_real_distribution<double> cost(0.0, 1500.0);
    std::uniform_real_distribution<double> corr(-200.0, 200.0);
    for (std::size_t i = 0; i < n; ++i) {
      p.values.push_back(value(rng));
      p.costs.push_back(cost(rng));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) p.corrections[{i, j}] = corr(rng);
    }
    p.budget = std::uniform_real_distribution<double>(0.0, 600.0 * static_cast<double>(n))(rng);
    const Selection s = optimize_subset(p);
    const BruteBest b = brute_force_subset(p);
    c.require(s.chosen == b.chosen, "instance " + std::to_string(trial) + " selection differs");
    c.require(close_rel(s.objective, b.objective, 1e-12) ||
                  std::abs(s.objective - b.objective) < 1e-9,
              "instance " + std::to_string(trial) + " objective differs");
    c.require(s.spend <= p.budget + 1e-9 * std::max(1.0, p.budget), "over budget");
    if (!s.chosen.empty()) ++nontrivial;
  }

  // no interactions: a plain knapsack on integer data
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 15);
    SelectionProblem p;
    p.m = 1000.0;  // one k$ per VHT, keeps profits integral
    std::vector<int> profit;
    std::vector<int> weight;
    for (std::size_t i = 0; i < n; ++i) {
      const int w = static_cast<int>(rng() % 200);
      const int v = static_cast<int>(rng() % 400);
      p.costs.push_back(w);
      p.values.push_back(v);
      weight.push_back(w);
      profit.push_back(v - w);
    }
    const int capacity = static_cast<int>(rng() % 800);
    p.budget = capacity;
    const Selection s = optimize_subset(p);
    c.require(s.objective == knapsack_dp(profit, weight, capacity),
              "knapsack instance " + std::to_string(trial));
  }
  return {c.ok(),
          c.ok() ? "200 quadratic instances (" + std::to_string(nontrivial) +
                       " non-empty) + 100 knapsack instances agree"
                 : c.failures(),
          60.0};
}

// 7 -------------------------------------------------------------------------
Outcome published_arithmetic() {
  Checker c;
  std::string detail;
  {
    const std::vector<std::string> ids = {"03-02-9005", "03-03-0101", "03-95-0001", "03-96-0024",
                                          "07-06-0014", "07-94-0027", "07-96-0013", "07-97-0055"};
    SelectionProblem p;
    p.ids = ids;
    p.costs = {999, 465, 4000, 1000, 472, 700, 748, 4000};
    p.values.assign(8, 0.0);
    const std::vector<std::size_t> chosen = {2, 4, 5, 6, 7};
    // only the chosen set's total VHT reduction is published
    p.values[2] = 48844.0;
    p.budget = 10000.0;
    const Selection s = evaluate_selection(p, chosen);
    c.require(s.spend == 9920.0, "Chicago spend " + fmt("%.0f", s.spend));
    c.require(s.feasible, "Chicago selection over budget");
    c.require(std::abs(s.objective - 168358.0) <= 10.0, "Chicago net " + fmt("%.1f", s.objective));
    detail += "Chicago " + fmt("%.1f", s.objective);
  }
  {
    SelectionProblem p;
    p.ids = {"ber01", "ber02", "ber03", "ber04", "ber05", "ber06", "ber06a", "ber10", "ber10a"};
    p.costs = {300, 1000, 800, 2500, 2000, 4000, 8000, 1200, 8700};
    p.values.assign(9, 0.0);
    p.values[0] = 127679.0;
    p.budget = 10000.0;
    const std::vector<std::size_t> chosen = {0, 6, 7};
    const Selection s = evaluate_selection(p, chosen);
    c.require(s.spend == 9500.0, "Berlin spend " + fmt("%.0f", s.spend));
    c.require(std::abs(s.objective - 456532.0) <= 10.0, "Berlin net " + fmt("%.1f", s.objective));
    detail += ", Berlin " + fmt("%.1f", s.objective);
  }
  {
    const std::vector<double> costs = {999, 465, 4000, 1000, 472, 700, 748, 4000};
    PlanningHorizon h;
    h.budgets = {1000, 4000, 1500, 3000, 5000};
    struct Case {
      const char* name;
      std::vector<int> period;
      std::vector<double> spend;
      double total;
    };
    const Case cases[] = {
        {"example", {1, 4, 2, 4, 4, 3, 3, 5}, {999, 4000, 1448, 1937, 4000}, 12384},
        {"heuristic", {0, 4, 2, 0, 3, 3, 1, 5}, {748, 4000, 1172, 465, 4000}, 10385},
        {"independent", {0, 3, 2, 0, 4, 5, 1, 5}, {748, 4000, 465, 472, 4700}, 10385},
    };
    for (const Case& k : cases) {
      Schedule s;
      s.period = k.period;
      const FeasibilityReport r = check_schedule(costs, h, s);
      c.require(r.spend == k.spend, std::string(k.name) + " expenditure row");
      c.require(r.total == k.total, std::string(k.name) + " total");
      c.require(r.feasible(), std::string(k.name) + " infeasible");
    }
    detail += ", schedule totals 12384/10385/10385";
  }
  return {c.ok(), c.ok() ? detail : c.failures(), 0.0};
}

// 8 -------------------------------------------------------------------------

// Best NPV over every feasible assignment, by depth-first enumeration.
double brute_force_schedule(const std::vector<std::vector<double>>& v,
                            const std::vector<double>& costs, const PlanningHorizon& h) {
  const std::size_t n = costs.size();
  const int periods = h.periods();
  std::vector<double> left = h.budgets;
  double best = 0.0;
  std::function<void(std::size_t, double)> go = [&](std::size_t i, double npv) {
    if (i == n) {
      best = std::max(best, npv);
      return;
    }
    go(i + 1, npv);
    for (int t = 1; t <= periods; ++t) {
      const auto ti = static_cast<std::size_t>(t - 1);
      if (costs[i] > left[ti] + 1e-9 * std::max(1.0, h.budgets[ti])) continue;
      left[ti] -= costs[i];
      go(i + 1, npv + v[ti][i] * h.m / 1000.0 / std::pow(1.0 + h.rate, t) - costs[i]);
      left[ti] += costs[i];
    }
  };
  go(0, 0.0);
  return best;
}

Outcome scheduler_properties() {
  Checker c;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> val(0.0, 800.0);
  std::uniform_real_distribution<double> cst(50.0, 1500.0);
  std::uniform_real_distribution<double> bud(0.0, 2500.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 8);
    const int periods = 1 + static_cast<int>(rng() % 4);
    PlanningHorizon h;
    h.rate = 0.04;
    for (int t = 0; t < periods; ++t) h.budgets.push_back(bud(rng));
    std::vector<double> costs(n);
    for (double& x : costs) x = cst(rng);
    std::vector<std::vector<double>> v(static_cast<std::size_t>(periods), std::vector<double>(n));
    for (auto& row : v) {
      for (double& x : row) x = val(rng);
    }
    const Schedule s = independent_schedule(v, costs, h);
    c.require(check_schedule(costs, h, s).feasible(), "independent schedule infeasible");
    const double oracle = brute_force_schedule(v, costs, h);
    c.require(close_rel(s.npv, oracle, 1e-12) || std::abs(s.npv - oracle) < 1e-9,
              "instance " + std::to_string(trial) + ": " + fmt("%.6f", s.npv) + " vs " +
                  fmt("%.6f", oracle));
  }

  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 10);
    UpgradeSet set;
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      Upgrade u;
      u.id = "p" + std::to_string(i);
      u.cost = cst(rng);
      u.additions = {fixtures::make_link(1, 2, 1, 1)};
      set.upgrades.push_back(u);
      values[i] = val(rng);
    }
    std::map<PairKey, double> corr;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng() % 3 == 0) corr[{i, j}] = std::uniform_real_distribution<double>(-200, 200)(rng);
      }
    }
    PlanningHorizon h;
    h.budgets = {bud(rng) * 2.0};
    auto evaluator = [&](int, std::span<const std::size_t>, std::span<const std::size_t> cand) {
      PeriodDeltas d;
      d.values.resize(n);
      for (std::size_t i : cand) d.values[i] = values[i];
      d.corrections = corr;
      return d;
    };
    const GreedyResult g = greedy_schedule(set, h, evaluator);
    SelectionProblem p;
    p.values = values;
    p.costs = set.costs();
    p.corrections = corr;
    p.budget = h.budgets[0];
    p.discount = present_value(1.0, 1, h.rate);
    const Selection sel = optimize_subset(p);
    c.require(g.schedule.built_in(1) == sel.chosen, "greedy T=1 differs from subset model");
    c.require(check_schedule(set, h, g.schedule).feasible(), "greedy schedule infeasible");

    // the same set over several periods still yields a feasible schedule
    PlanningHorizon multi;
    multi.budgets = {bud(rng), bud(rng), bud(rng)};
    const GreedyResult gm = greedy_schedule(set, multi, evaluator);
    c.require(check_schedule(set, multi, gm.schedule).feasible(), "multi-period greedy infeasible");
  }
  return {c.ok(),
          c.ok() ? "100 independent-model instances match enumeration; 50 greedy T=1 runs match"
                 : c.failures(),
          60.0};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "shortest-path oracle equivalence", shortest_path_equivalence},
      {2, "two-link analytic equilibrium", two_link_equilibrium},
      {3, "Braess property", braess},
      {4, "Sioux Falls convergence", sioux_falls},
      {5, "k-wise estimator exactness", k_wise_estimator},
      {6, "portfolio exactness", portfolio_exactness},
      {7, "published arithmetic consistency", published_arithmetic},
      {8, "scheduler properties", scheduler_properties},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = cr.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what(), 0.0};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.time_limit > 0.0 && secs >= out.time_limit) {
      out.pass = false;
      out.detail += " [time limit " + fmt("%.0f", out.time_limit) + " s exceeded]";
    }
    std::printf("criterion %d: %s  %s (%s; %.2f s)\n", cr.id, out.pass ? "PASS" : "FAIL", cr.name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
