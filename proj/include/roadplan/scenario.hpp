#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roadplan/equilibrium.hpp"
#include "roadplan/network.hpp"

namespace roadplan {

/// Subset of upgrades as a bitmask over 0-based upgrade indices (N <= 64).
using SubsetMask = std::uint64_t;
inline constexpr std::size_t kMaxUpgrades = 64;

SubsetMask subset_mask(std::span<const std::size_t> indices);
std::vector<std::size_t> subset_indices(SubsetMask mask);
int subset_size(SubsetMask mask);
inline SubsetMask singleton(std::size_t i) { return SubsetMask{1} << i; }
inline SubsetMask pair_mask(std::size_t i, std::size_t j) { return singleton(i) | singleton(j); }

/// Comma-separated ids in upgrade order, e.g. "ber01,ber06a".
std::string subset_label(const UpgradeSet& set, SubsetMask mask);
/// Inverse of subset_label; throws DataError for unknown ids.
SubsetMask parse_subset_label(const UpgradeSet& set, const std::string& label);

// Subset families for batch runs.
std::vector<SubsetMask> individual_subsets(std::size_t n);
std::vector<SubsetMask> all_pair_subsets(std::size_t n);
/// Every non-empty subset of size <= max_size (n <= 30).
std::vector<SubsetMask> subsets_up_to(std::size_t n, int max_size);

using PairKey = std::pair<std::size_t, std::size_t>;  // i < j

struct EvaluatedSubset {
  double delta_vht = 0.0;  // VHT_0 - VHT_S
  double relative_gap = 0.0;
};

/// Exact TAP results for the baseline and evaluated upgrade subsets.
struct DeltaTable {
  std::size_t upgrade_count = 0;
  bool has_baseline = false;
  double baseline_vht = 0.0;
  double baseline_gap = 0.0;
  std::map<SubsetMask, EvaluatedSubset> evaluated;  // non-empty subsets

  bool contains(SubsetMask s) const { return evaluated.count(s) != 0; }
  /// Delta for an evaluated subset; throws DataError otherwise.
  double delta(SubsetMask s) const;

  /// v_i for every evaluated singleton.
  std::map<std::size_t, double> singles() const;
  /// d_ij = dVHT_ij - (v_i + v_j) for every evaluated pair whose singles
  /// are also evaluated.
  std::map<PairKey, double> pair_corrections() const;
};

/// Interaction coefficients e_W keyed by subset.
using CoefficientMap = std::map<SubsetMask, double>;

/// Solves the baseline (if missing) and every requested subset not already
/// in `table`. Subsets are evaluated on up to `subset_workers` threads.
/// Returns the number of TAP solves performed.
std::size_t extend_deltas(DeltaTable& table, const Network& net, const DemandMatrix& demand,
                          const UpgradeSet& set, std::span<const SubsetMask> subsets,
                          const SolverSettings& settings, int subset_workers = 1);

DeltaTable compute_deltas(const Network& net, const DemandMatrix& demand, const UpgradeSet& set,
                          std::span<const SubsetMask> subsets, const SolverSettings& settings,
                          int subset_workers = 1);

/// e_W = dVHT_W - sum of e_V over non-empty proper subsets V of W, for
/// every subset in `deltas` of size <= max_order. Throws DataError naming
/// the first missing prerequisite.
CoefficientMap interaction_coefficients(const std::map<SubsetMask, double>& deltas,
                                        int max_order);
CoefficientMap interaction_coefficients(const DeltaTable& table, int max_order);

/// Sum of e_W over stored W within S with |W| <= order.
double estimate_delta(const CoefficientMap& coefficients, SubsetMask s, int order);
double estimate_delta(const DeltaTable& table, SubsetMask s, int order);

struct RelativeError {
  double value = 0.0;            // |estimate - exact| / |exact|
  bool exact_negative = false;   // dVHT_S < 0 (upgrades made things worse)
};

RelativeError relative_error(const CoefficientMap& coefficients, const DeltaTable& table,
                             SubsetMask s, int order);
RelativeError relative_error(const DeltaTable& table, SubsetMask s, int order);

/// Which evaluated subsets a report row may use.
struct ErrorRowSpec {
  std::string label;
  int max_order = 1;
  /// When set, only these pairs are usable at order 2 (singles always are).
  std::optional<std::set<SubsetMask>> allowed_pairs;
};

struct ErrorReportRow {
  std::string label;
  std::size_t computations = 0;  // distinct non-empty subsets solved and used
  double mean_error_percent = 0.0;
  std::size_t count_above_10_percent = 0;
  std::size_t targets = 0;       // subsets of size >= 3 the errors average over
  std::size_t negative_targets = 0;
};

/// Errors are measured over every evaluated subset of size >= 3 with a
/// non-zero delta.
std::vector<ErrorReportRow> error_report(const DeltaTable& table,
                                         std::span<const ErrorRowSpec> rows);
/// Rows "individual only" (k=1), "all pairwise" (k=2), "all subsets size <= k".
std::vector<ErrorReportRow> error_report(const DeltaTable& table, std::span<const int> orders);

void write_error_report(std::ostream& out, std::span<const ErrorReportRow> rows);

// Delta cache file.

struct CacheKey {
  std::uint64_t network_hash = 0;
  std::uint64_t demand_hash = 0;
  std::uint64_t upgrades_hash = 0;
  double target_gap = 0.0;

  bool operator==(const CacheKey&) const = default;
};

std::uint64_t fnv1a64(std::string_view data);
CacheKey make_cache_key(const Network& net, const DemandMatrix& demand, const UpgradeSet& set,
                        double target_gap);

void write_delta_cache(std::ostream& out, const CacheKey& key, const UpgradeSet& set,
                       const DeltaTable& table);
/// Reads a cache; returns the stored key alongside the table.
std::pair<CacheKey, DeltaTable> read_delta_cache(std::istream& in, const UpgradeSet& set);

}  // namespace roadplan
