#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "roadplan/scenario.hpp"

namespace roadplan {

/// Budget-constrained upgrade selection with pairwise interaction terms:
///
///   max  sum_{i<j} y_i y_j d_ij w + sum_i y_i (v_i w - c_i)
///   s.t. sum_i y_i c_i <= budget,      w = discount * m / 1000
///
/// Values are VHT reductions, costs and budget are in $000s and m is in
/// dollars per VHT, so the objective is in $000s.
struct SelectionProblem {
  std::vector<std::string> ids;  // optional; used for reports
  std::vector<double> values;
  std::vector<double> costs;
  std::map<PairKey, double> corrections;  // keys with i < j
  double budget = 0.0;
  double m = 3650.0;
  double discount = 1.0;

  std::size_t size() const noexcept { return values.size(); }
  double value_weight() const noexcept { return discount * m / 1000.0; }
  /// Throws DataError on inconsistent sizes, negative costs/budget or bad keys.
  void validate() const;
};

struct Selection {
  std::vector<std::size_t> chosen;  // ascending
  double objective = 0.0;           // $000s
  double spend = 0.0;               // $000s
  double estimated_delta_vht = 0.0;
  bool feasible = true;
};

/// Objective and spend of an arbitrary subset (feasibility is reported, not
/// required).
Selection evaluate_selection(const SelectionProblem& problem, std::span<const std::size_t> chosen);

/// True when `a` is preferred to `b`: larger objective, then fewer projects,
/// then the lexicographically smaller index list.
bool preferred(const Selection& a, const Selection& b);

enum class SelectionMethod { kBranchAndBound, kExhaustive };

/// Globally optimal feasible selection. kExhaustive enumerates all 2^n
/// subsets and is limited to n <= 25.
Selection optimize_subset(const SelectionProblem& problem,
                          SelectionMethod method = SelectionMethod::kBranchAndBound);

/// Problem file: `N`, N rows `id cost v`, rows `id id d`, `BUDGET b`, `M m`.
SelectionProblem parse_selection_problem(std::istream& in);
std::string serialize_selection_problem(const SelectionProblem& problem);

/// Builds a problem from cached deltas: v_i from singles, d_ij from every
/// evaluated pair. Throws DataError listing missing singletons.
SelectionProblem selection_problem_from(const DeltaTable& table, const UpgradeSet& set,
                                        double budget, double m);

void write_selection(std::ostream& out, const SelectionProblem& problem,
                     const Selection& selection);

}  // namespace roadplan
