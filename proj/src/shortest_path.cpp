#include "roadplan/shortest_path.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "roadplan/error.hpp"

namespace roadplan {

std::string to_string(ShortestPathAlgorithm algo) {
  switch (algo) {
    case ShortestPathAlgorithm::kDijkstra:
      return "dijkstra";
    case ShortestPathAlgorithm::kBellmanFord:
      return "bellman-ford";
    case ShortestPathAlgorithm::kDesopoPapeLll:
      return "desopo-pape-lll";
    case ShortestPathAlgorithm::kSlfLll:
      return "slf-lll";
  }
  return "unknown";
}

ShortestPathAlgorithm parse_shortest_path_algorithm(std::string_view name) {
  if (name == "dijkstra") return ShortestPathAlgorithm::kDijkstra;
  if (name == "bellman-ford") return ShortestPathAlgorithm::kBellmanFord;
  if (name == "desopo-pape-lll") return ShortestPathAlgorithm::kDesopoPapeLll;
  if (name == "slf-lll") return ShortestPathAlgorithm::kSlfLll;
  throw DataError("unknown shortest-path algorithm '" + std::string(name) + "'");
}

ForwardStar::ForwardStar(const Network& net)
    : node_count_(net.node_count), first_thru_node_(net.first_thru_node) {
  const std::size_t n = static_cast<std::size_t>(node_count_);
  offsets_.assign(n + 2, 0);
  tails_.reserve(net.links.size());
  heads_.reserve(net.links.size());
  for (const Link& l : net.links) {
    if (!net.has_node(l.from) || !net.has_node(l.to)) {
      throw DataError("link endpoint outside 1.." + std::to_string(node_count_));
    }
    ++offsets_[static_cast<std::size_t>(l.from) + 1];
    tails_.push_back(l.from);
    heads_.push_back(l.to);
  }
  for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
  links_.resize(net.links.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  // ascending link index within each node because links are visited in order
  for (std::size_t a = 0; a < net.links.size(); ++a) {
    links_[fill[static_cast<std::size_t>(net.links[a].from)]++] = static_cast<LinkIndex>(a);
  }
}

void check_link_costs(std::span<const double> link_costs, std::size_t link_count) {
  if (link_costs.size() != link_count) {
    throw DataError("cost vector has " + std::to_string(link_costs.size()) + " entries for " +
                    std::to_string(link_count) + " links");
  }
  for (std::size_t a = 0; a < link_costs.size(); ++a) {
    if (!std::isfinite(link_costs[a]) || link_costs[a] < 0.0) {
      throw DataError("link " + std::to_string(a) + " has invalid cost " +
                      format_double(link_costs[a]) + " (costs must be finite and non-negative)");
    }
  }
}

ShortestPathSolver::ShortestPathSolver(const ForwardStar& graph, ShortestPathAlgorithm algo)
    : graph_(graph), algo_(algo) {
  const std::size_t n = static_cast<std::size_t>(graph.node_count()) + 1;
  ring_.resize(n);
  state_.resize(n);
}

void ShortestPathSolver::solve(std::span<const double> link_costs, NodeId source,
                               ShortestPathTree& tree) {
  if (source < 1 || source > graph_.node_count()) {
    throw DataError("source node " + std::to_string(source) + " not in network");
  }
  const std::size_t n = static_cast<std::size_t>(graph_.node_count()) + 1;
  tree.source = source;
  tree.labels.assign(n, kUnreachable);
  tree.predecessor_link.assign(n, kNoLink);
  tree.labels[static_cast<std::size_t>(source)] = 0.0;

  if (algo_ == ShortestPathAlgorithm::kDijkstra) {
    run_dijkstra(link_costs, tree);
  } else {
    run_label_correcting(link_costs, tree);
  }
}

void ShortestPathSolver::run_dijkstra(std::span<const double> costs, ShortestPathTree& tree) {
  auto& d = tree.labels;
  auto& pred = tree.predecessor_link;
  const NodeId source = tree.source;
  const NodeId first_thru = graph_.first_thru_node();
  std::fill(state_.begin(), state_.end(), 0);

  using Entry = std::pair<double, NodeId>;
  const auto cmp = std::greater<Entry>{};
  heap_.clear();
  heap_.emplace_back(0.0, source);
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), cmp);
    const auto [du, u] = heap_.back();
    heap_.pop_back();
    auto& settled = state_[static_cast<std::size_t>(u)];
    if (settled || du > d[static_cast<std::size_t>(u)]) continue;
    settled = 1;
    if (u != source && u < first_thru) continue;
    for (LinkIndex a : graph_.out_links(u)) {
      const NodeId v = graph_.head(a);
      const auto vi = static_cast<std::size_t>(v);
      const double c = costs[static_cast<std::size_t>(a)];
      const double nd = du + c;
      if (nd < d[vi]) {
        d[vi] = nd;
        pred[vi] = a;
        heap_.emplace_back(nd, v);
        std::push_heap(heap_.begin(), heap_.end(), cmp);
      } else if (nd == d[vi] && c > 0.0 && a < pred[vi] && v != source) {
        pred[vi] = a;
      }
    }
  }
}

void ShortestPathSolver::run_label_correcting(std::span<const double> costs,
                                              ShortestPathTree& tree) {
  auto& d = tree.labels;
  auto& pred = tree.predecessor_link;
  const NodeId source = tree.source;
  const NodeId first_thru = graph_.first_thru_node();
  const std::size_t cap = ring_.size();
  std::fill(state_.begin(), state_.end(), 0);
  head_ = 0;
  count_ = 0;

  auto push_back = [&](NodeId v) {
    ring_[(head_ + count_) % cap] = v;
    ++count_;
  };
  auto push_front = [&](NodeId v) {
    head_ = (head_ + cap - 1) % cap;
    ring_[head_] = v;
    ++count_;
  };
  auto pop_front = [&]() {
    const NodeId v = ring_[head_];
    head_ = (head_ + 1) % cap;
    --count_;
    return v;
  };

  const bool lll = algo_ != ShortestPathAlgorithm::kBellmanFord;
  double queued_sum = 0.0;  // sum of labels of queued nodes, for LLL

  push_back(source);
  state_[static_cast<std::size_t>(source)] = 1;

  while (count_ > 0) {
    if (lll) {
      // Large Label Last: rotate while the front label exceeds the queue mean.
      for (std::size_t rotations = 0; rotations < count_; ++rotations) {
        const NodeId front = ring_[head_];
        if (d[static_cast<std::size_t>(front)] * static_cast<double>(count_) <= queued_sum) break;
        push_back(pop_front());
      }
    }
    const NodeId u = pop_front();
    const auto ui = static_cast<std::size_t>(u);
    state_[ui] = 2;
    const double du = d[ui];
    if (lll) queued_sum -= du;
    if (count_ == 0) queued_sum = 0.0;
    if (u != source && u < first_thru) continue;

    for (LinkIndex a : graph_.out_links(u)) {
      const NodeId v = graph_.head(a);
      const auto vi = static_cast<std::size_t>(v);
      const double c = costs[static_cast<std::size_t>(a)];
      const double nd = du + c;
      if (nd < d[vi]) {
        const double old = d[vi];
        d[vi] = nd;
        pred[vi] = a;
        if (state_[vi] == 1) {
          if (lll) queued_sum += nd - old;
          continue;
        }
        switch (algo_) {
          case ShortestPathAlgorithm::kBellmanFord:
            push_back(v);
            break;
          case ShortestPathAlgorithm::kDesopoPapeLll:
            if (state_[vi] == 2) {
              push_front(v);
            } else {
              push_back(v);
            }
            break;
          case ShortestPathAlgorithm::kSlfLll:
            if (count_ > 0 && nd < d[static_cast<std::size_t>(ring_[head_])]) {
              push_front(v);
            } else {
              push_back(v);
            }
            break;
          case ShortestPathAlgorithm::kDijkstra:
            break;
        }
        state_[vi] = 1;
        if (lll) queued_sum += nd;
      } else if (nd == d[vi] && c > 0.0 && a < pred[vi] && v != source) {
        pred[vi] = a;
      }
    }
  }
}

ShortestPathTree shortest_paths(const Network& net, std::span<const double> link_costs,
                                NodeId source, ShortestPathAlgorithm algo) {
  check_link_costs(link_costs, net.links.size());
  const ForwardStar graph(net);
  ShortestPathSolver solver(graph, algo);
  ShortestPathTree tree;
  solver.solve(link_costs, source, tree);
  return tree;
}

}  // namespace roadplan
