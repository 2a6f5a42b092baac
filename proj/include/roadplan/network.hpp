#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace roadplan {

using NodeId = std::int32_t;
using LinkIndex = std::int32_t;

inline constexpr LinkIndex kNoLink = -1;

/// A directed road segment with BPR volume-delay parameters.
struct Link {
  NodeId from = 0;
  NodeId to = 0;
  double capacity = 1.0;        // vehicles per time unit
  double length = 0.0;          // informational only
  double free_flow_time = 0.0;  // time units
  double alpha = 0.15;
  double beta = 4.0;

  bool operator==(const Link&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

/// Road network in TNTP conventions: nodes are 1..node_count, zone
/// centroids are 1..zone_count, and nodes below first_thru_node may only
/// start or end a path.
struct Network {
  int node_count = 0;
  int zone_count = 0;
  NodeId first_thru_node = 1;
  std::vector<Link> links;
  std::map<NodeId, Point> coordinates;

  bool operator==(const Network&) const = default;

  bool has_node(NodeId n) const noexcept { return n >= 1 && n <= node_count; }

  /// Throws DataError if any structural or link invariant is violated.
  void validate() const;
};

/// Identifies the `parallel_index`-th link (0-based, file order) among the
/// links running from `from` to `to`.
struct LinkSelector {
  NodeId from = 0;
  NodeId to = 0;
  int parallel_index = 0;

  bool operator==(const LinkSelector&) const = default;
};

std::string to_string(const LinkSelector& sel);

/// Returns the index of the selected link or kNoLink.
LinkIndex find_link(const Network& net, const LinkSelector& sel);

struct DemandEntry {
  NodeId destination = 0;
  double trips = 0.0;
};

struct OriginDemand {
  NodeId origin = 0;
  std::vector<DemandEntry> entries;  // ascending destination
  double total = 0.0;
};

/// Origin-destination trip table. Only strictly positive entries are stored.
class DemandMatrix {
 public:
  DemandMatrix() = default;
  explicit DemandMatrix(int zone_count) : zone_count_(zone_count) {}

  /// Sets q_rs; zero removes the entry. Throws DataError for negative or
  /// non-finite trips.
  void set(NodeId origin, NodeId destination, double trips);
  double get(NodeId origin, NodeId destination) const;

  double total() const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  int zone_count() const noexcept { return zone_count_; }
  void set_zone_count(int zones) noexcept { zone_count_ = zones; }

  const std::map<std::pair<NodeId, NodeId>, double>& entries() const noexcept {
    return entries_;
  }

  /// Entries grouped by origin in ascending origin order; origins without
  /// demand are omitted.
  std::vector<OriginDemand> by_origin() const;

  bool operator==(const DemandMatrix&) const = default;

 private:
  int zone_count_ = 0;
  std::map<std::pair<NodeId, NodeId>, double> entries_;
};

enum class UpgradeKind { kCapacityUpgrade, kNewRoad };

std::string to_string(UpgradeKind kind);

struct LinkModification {
  LinkSelector selector;
  double capacity = 0.0;
  std::optional<double> free_flow_time;

  bool operator==(const LinkModification&) const = default;
};

/// A candidate project. Cost is in thousands of dollars.
struct Upgrade {
  std::string id;
  double cost = 0.0;
  UpgradeKind kind = UpgradeKind::kCapacityUpgrade;
  std::vector<Link> additions;
  std::vector<LinkModification> modifications;

  bool operator==(const Upgrade&) const = default;
};

/// Ordered list of candidate upgrades. The C++ API addresses upgrades by
/// 0-based position; files and reports use the ids.
struct UpgradeSet {
  std::vector<Upgrade> upgrades;

  std::size_t size() const noexcept { return upgrades.size(); }
  const Upgrade& operator[](std::size_t i) const { return upgrades[i]; }

  /// Position of the upgrade with this id, if any.
  std::optional<std::size_t> index_of(const std::string& id) const;
  std::vector<double> costs() const;
};

/// Demand growth rule: trips to or from any listed zone are multiplied by
/// `factor` once per elapsed period.
struct ScaleRule {
  std::vector<NodeId> zones;
  double factor = 1.0;
};

// TNTP and upgrade-file I/O. Parse functions throw ParseError (with line
// numbers) for grammar problems and DataError for invariant violations.

Network parse_network(std::istream& in);
std::map<NodeId, Point> parse_nodes(std::istream& in);
DemandMatrix parse_demand(std::istream& in);
/// When `net` is given, MOD selectors are checked against it.
UpgradeSet parse_upgrades(std::istream& in, const Network* net = nullptr);
std::vector<ScaleRule> parse_scale_rules(std::istream& in);

std::string serialize_network(const Network& net);
std::string serialize_nodes(const Network& net);
std::string serialize_demand(const DemandMatrix& demand);
std::string serialize_upgrades(const UpgradeSet& set);

// File helpers; a missing or unreadable file raises DataError naming it.
Network read_network(const std::filesystem::path& path);
std::map<NodeId, Point> read_nodes(const std::filesystem::path& path);
DemandMatrix read_demand(const std::filesystem::path& path);
UpgradeSet read_upgrades(const std::filesystem::path& path, const Network* net = nullptr);
std::vector<ScaleRule> read_scale_rules(const std::filesystem::path& path);

/// Returns a copy of `net` with the selected upgrades applied. Modifications
/// address links of `net` itself; additions are appended in ascending
/// upgrade order. Two selected upgrades modifying the same link is an error.
Network apply_upgrades(const Network& net, const UpgradeSet& set,
                       std::span<const std::size_t> selected);

/// Demand for period `period` (1-based): rules applied period-1 times.
DemandMatrix scaled_demand(const DemandMatrix& base, std::span<const ScaleRule> rules,
                           int period);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace roadplan
