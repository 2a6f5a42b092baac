#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roadplan/interaction.hpp"
#include "roadplan/network.hpp"
#include "roadplan/portfolio.hpp"
#include "roadplan/scenario.hpp"

namespace roadplan {

/// Periods are 1..T. Budgets and costs are present values in k$.
struct PlanningHorizon {
  std::vector<double> budgets;
  double rate = 0.04;
  double m = 3650.0;

  int periods() const noexcept { return static_cast<int>(budgets.size()); }
  double total_budget() const;
  /// Throws DataError unless T >= 1, budgets >= 0 and rate > -1.
  void validate() const;
};

/// amount / (1+r)^t
double present_value(double amount, int t, double rate);

/// Demand for each period: either explicit matrices (one per period) or a
/// base matrix grown by scale rules.
struct PeriodDemand {
  DemandMatrix base;
  std::vector<ScaleRule> rules;
  std::vector<DemandMatrix> explicit_periods;

  DemandMatrix at(int period) const;
};

struct Schedule {
  std::vector<int> period;  // per upgrade; 0 = never built
  std::vector<double> per_period_spend;
  double npv = 0.0;

  std::vector<std::size_t> built_in(int t) const;
  std::size_t built_count() const;
};

/// Larger NPV, then fewer projects, then the lexicographically smaller list
/// of built indices, then the earlier period vector.
bool preferred(const Schedule& a, const Schedule& b);

struct FeasibilityReport {
  std::vector<double> spend;  // per period
  double total = 0.0;
  std::vector<std::string> violations;

  bool feasible() const noexcept { return violations.empty(); }
};

FeasibilityReport check_schedule(std::span<const double> costs, const PlanningHorizon& horizon,
                                 const Schedule& schedule);
FeasibilityReport check_schedule(const UpgradeSet& set, const PlanningHorizon& horizon,
                                 const Schedule& schedule);

/// VHT deltas under the conditions of one period. Values are indexed by
/// upgrade; missing means not evaluated.
struct PeriodDeltas {
  std::vector<std::optional<double>> values;
  std::map<PairKey, double> corrections;
};

/// Sum over periods of discounted VHT benefit (m/1000 per VHT) minus cost.
/// `deltas[t-1]` holds period t. Throws DataError for a built (i, t)
/// without a value.
double schedule_npv(std::span<const PeriodDeltas> deltas, std::span<const double> costs,
                    const PlanningHorizon& horizon, const Schedule& schedule);

/// Computes deltas for `candidates` in `demand_period`, on the network with
/// `built` already applied.
using PeriodEvaluator = std::function<PeriodDeltas(
    int demand_period, std::span<const std::size_t> built, std::span<const std::size_t> candidates)>;

struct GreedyResult {
  Schedule schedule;
  std::vector<std::size_t> final_subset;  // step-1 choice U
  double build_all_at_end_npv = 0.0;      // step-1 objective
  std::vector<PeriodDeltas> deltas_used;  // per period
};

/// Greedy heuristic: choose U optimal at period T under the total budget,
/// then for t = 1..T pick the NPV-best subset of what remains in U under
/// B_t and build it.
GreedyResult greedy_schedule(const UpgradeSet& set, const PlanningHorizon& horizon,
                             const PeriodEvaluator& evaluate);

/// Evaluator backed by UE solves. Pairs outside `pairs` keep d = 0. Results
/// are memoized per (period, built set).
class TapEvaluator {
 public:
  TapEvaluator(Network net, PeriodDemand demand, UpgradeSet set, PairSet pairs,
               SolverSettings settings, int subset_workers = 1);

  PeriodDeltas operator()(int demand_period, std::span<const std::size_t> built,
                          std::span<const std::size_t> candidates);

  std::size_t solves() const noexcept { return solves_; }

 private:
  Network net_;
  PeriodDemand demand_;
  UpgradeSet set_;
  PairSet pairs_;
  SolverSettings settings_;
  int subset_workers_;
  std::map<std::pair<int, SubsetMask>, DeltaTable> memo_;
  std::size_t solves_ = 0;
};

GreedyResult greedy_schedule(const Network& net, const PeriodDemand& demand,
                             const UpgradeSet& set, const PlanningHorizon& horizon,
                             const PairSet& pairs, const SolverSettings& settings,
                             int subset_workers = 1);

/// NPV of a fixed, feasible schedule recomputed with UE solves: period t's
/// upgrades are evaluated on the network holding everything built earlier,
/// under period t demand, with exact d_ijt for pairs built together.
double evaluate_schedule(const Network& net, const PeriodDemand& demand, const UpgradeSet& set,
                         const PlanningHorizon& horizon, const Schedule& schedule,
                         const SolverSettings& settings, int subset_workers = 1);

/// v_it for every upgrade on the base network under each period's demand;
/// result[t-1][i].
std::vector<std::vector<double>> independent_values(const Network& net, const PeriodDemand& demand,
                                                    const UpgradeSet& set,
                                                    const PlanningHorizon& horizon,
                                                    const SolverSettings& settings,
                                                    int subset_workers = 1);

/// Exact optimum of the linear model (no interactions):
///   max sum_t sum_i y_it (v_it m / (1+r)^t - c_i)
/// under per-period budgets and build-once. `values[t-1][i]`.
Schedule independent_schedule(std::span<const std::vector<double>> values,
                              std::span<const double> costs, const PlanningHorizon& horizon);

/// Per-period deltas carrying only the given values (no corrections).
std::vector<PeriodDeltas> as_period_deltas(std::span<const std::vector<double>> values);

/// Project-by-period table with X marks and budget/expenditure rows.
void write_schedule_table(std::ostream& out, const UpgradeSet& set,
                          const PlanningHorizon& horizon, const Schedule& schedule);
/// `# npv <v>` then one `id period` line per upgrade (0 = not built).
/// Inverse of write_schedule_listing. Upgrades not listed stay unbuilt;
/// the npv line is optional.
Schedule read_schedule_listing(std::istream& in, const UpgradeSet& set);
void write_schedule_listing(std::ostream& out, const UpgradeSet& set, const Schedule& schedule);

}  // namespace roadplan
