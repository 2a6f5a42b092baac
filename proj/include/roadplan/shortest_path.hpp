#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roadplan/network.hpp"

namespace roadplan {

enum class ShortestPathAlgorithm {
  kDijkstra,       // binary heap, label setting
  kBellmanFord,    // FIFO label correcting
  kDesopoPapeLll,  // d'Esopo-Pape queue discipline with Large Label Last
  kSlfLll,         // Small Label First with Large Label Last
};

std::string to_string(ShortestPathAlgorithm algo);
/// Accepts "dijkstra", "bellman-ford", "desopo-pape-lll", "slf-lll".
ShortestPathAlgorithm parse_shortest_path_algorithm(std::string_view name);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Outgoing links per node, each list in ascending link index.
class ForwardStar {
 public:
  explicit ForwardStar(const Network& net);

  int node_count() const noexcept { return node_count_; }
  NodeId first_thru_node() const noexcept { return first_thru_node_; }
  std::size_t link_count() const noexcept { return tails_.size(); }

  std::span<const LinkIndex> out_links(NodeId n) const {
    return {links_.data() + offsets_[n], links_.data() + offsets_[n + 1]};
  }
  NodeId tail(LinkIndex a) const { return tails_[static_cast<std::size_t>(a)]; }
  NodeId head(LinkIndex a) const { return heads_[static_cast<std::size_t>(a)]; }

 private:
  int node_count_;
  NodeId first_thru_node_;
  std::vector<std::size_t> offsets_;  // size node_count + 2, indexed by node id
  std::vector<LinkIndex> links_;
  std::vector<NodeId> tails_;
  std::vector<NodeId> heads_;
};

/// Labels and predecessor links indexed by node id (slot 0 unused).
struct ShortestPathTree {
  NodeId source = 0;
  std::vector<double> labels;
  std::vector<LinkIndex> predecessor_link;

  double label(NodeId n) const { return labels[static_cast<std::size_t>(n)]; }
  bool reachable(NodeId n) const { return label(n) != kUnreachable; }
};

/// Throws DataError unless every cost is finite and non-negative.
void check_link_costs(std::span<const double> link_costs, std::size_t link_count);

/// Reusable single-source solver. Holds its queue buffers so repeated calls
/// (one per origin per iteration) do not allocate. Not thread-safe; use one
/// instance per worker.
class ShortestPathSolver {
 public:
  ShortestPathSolver(const ForwardStar& graph, ShortestPathAlgorithm algo);

  /// Costs are assumed valid (see check_link_costs).
  void solve(std::span<const double> link_costs, NodeId source, ShortestPathTree& tree);

  ShortestPathAlgorithm algorithm() const noexcept { return algo_; }

 private:
  void run_dijkstra(std::span<const double> costs, ShortestPathTree& tree);
  void run_label_correcting(std::span<const double> costs, ShortestPathTree& tree);

  const ForwardStar& graph_;
  ShortestPathAlgorithm algo_;

  // Circular deque; each node is queued at most once at a time.
  std::vector<NodeId> ring_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  std::vector<unsigned char> state_;  // 0 never queued, 1 queued, 2 was queued
  std::vector<std::pair<double, NodeId>> heap_;
};

/// Shortest paths from `source` over paths whose intermediate nodes respect
/// the first-thru-node rule. Unreachable nodes get kUnreachable and
/// kNoLink. Throws DataError for invalid costs or source.
ShortestPathTree shortest_paths(const Network& net, std::span<const double> link_costs,
                                NodeId source,
                                ShortestPathAlgorithm algo = ShortestPathAlgorithm::kDesopoPapeLll);

}  // namespace roadplan
