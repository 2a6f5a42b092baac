#pragma once

// Small networks and helpers shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "roadplan/equilibrium.hpp"
#include "roadplan/network.hpp"
#include "roadplan/scenario.hpp"

namespace fixtures {

using namespace roadplan;

inline std::filesystem::path data_dir() { return ROADPLAN_TEST_DATA_DIR; }
inline std::filesystem::path data_file(const std::string& name) { return data_dir() / name; }

inline Link make_link(NodeId from, NodeId to, double fft, double cap, double alpha = 0.15,
                      double beta = 4.0) {
  Link l;
  l.from = from;
  l.to = to;
  l.free_flow_time = fft;
  l.capacity = cap;
  l.alpha = alpha;
  l.beta = beta;
  return l;
}

/// Nodes 1 (origin) and 2 (destination) joined by two parallel links.
inline Network two_link_network() {
  Network net;
  net.node_count = 2;
  net.zone_count = 2;
  net.links = {make_link(1, 2, 10.0, 1000.0), make_link(1, 2, 20.0, 1000.0)};
  return net;
}

inline DemandMatrix single_pair(NodeId r, NodeId s, double q, int zones) {
  DemandMatrix d(zones);
  d.set(r, s, q);
  return d;
}

/// Flow x on the fast link solving 10(1+0.15(x/1000)^4) = 20(1+0.15((D-x)/1000)^4).
inline double two_link_oracle(double demand) {
  auto excess = [demand](double x) {
    const double a = 10.0 * (1.0 + 0.15 * std::pow(x / 1000.0, 4));
    const double b = 20.0 * (1.0 + 0.15 * std::pow((demand - x) / 1000.0, 4));
    return a - b;
  };
  if (excess(demand) <= 0.0) return demand;
  double lo = 0.0;
  double hi = demand;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Classic Braess instance: 4000 vehicles from 1 to 4; 1->2 and 3->4 cost
// 1 + f/100, 1->3 and 2->4 cost 45; the upgrade adds a free link 2->3.
constexpr double kBraessDemand = 4000.0;
constexpr double kBraessBaseVht = 264000.0;    // 2000 per route at cost 66
constexpr double kBraessBypassVht = 328000.0;  // everyone on 1-2-3-4 at cost 82

inline Network braess_network() {
  Network net;
  net.node_count = 4;
  net.zone_count = 4;
  net.links = {make_link(1, 2, 1.0, 100.0, 1.0, 1.0), make_link(1, 3, 45.0, 1.0, 0.0, 1.0),
               make_link(2, 4, 45.0, 1.0, 0.0, 1.0), make_link(3, 4, 1.0, 100.0, 1.0, 1.0)};
  return net;
}

inline DemandMatrix braess_demand() { return single_pair(1, 4, kBraessDemand, 4); }

inline UpgradeSet braess_upgrades() {
  Upgrade u;
  u.id = "bypass";
  u.cost = 100.0;
  u.kind = UpgradeKind::kNewRoad;
  u.additions = {make_link(2, 3, 0.0, 1.0, 0.0, 1.0)};
  UpgradeSet set;
  set.upgrades = {u};
  return set;
}

/// Independent method-of-successive-averages UE on a path set: returns the
/// equilibrium path flows given a path-cost function of the flow vector.
inline std::vector<double> msa_path_flows(
    std::size_t paths, double demand,
    const std::function<std::vector<double>(const std::vector<double>&)>& path_costs,
    int iterations) {
  std::vector<double> h(paths, 0.0);
  h[0] = demand;
  for (int k = 1; k <= iterations; ++k) {
    const auto c = path_costs(h);
    std::size_t best = 0;
    for (std::size_t p = 1; p < paths; ++p) {
      if (c[p] < c[best]) best = p;
    }
    const double step = 1.0 / (k + 1.0);
    for (std::size_t p = 0; p < paths; ++p) {
      h[p] = (1.0 - step) * h[p] + (p == best ? step * demand : 0.0);
    }
  }
  return h;
}

/// Square grid of side `n` with links both ways, every node a zone,
/// coordinates on the unit lattice.
inline Network grid_network(int n, double capacity, double fft) {
  Network net;
  net.node_count = n * n;
  net.zone_count = n * n;
  auto id = [n](int r, int c) { return static_cast<NodeId>(r * n + c + 1); };
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      net.coordinates[id(r, c)] = Point{static_cast<double>(c), static_cast<double>(r)};
      if (c + 1 < n) {
        net.links.push_back(make_link(id(r, c), id(r, c + 1), fft, capacity));
        net.links.push_back(make_link(id(r, c + 1), id(r, c), fft, capacity));
      }
      if (r + 1 < n) {
        net.links.push_back(make_link(id(r, c), id(r + 1, c), fft, capacity));
        net.links.push_back(make_link(id(r + 1, c), id(r, c), fft, capacity));
      }
    }
  }
  return net;
}

/// 4x4 grid with corner-to-corner and edge demand that congests the middle.
struct SixUpgradeCase {
  Network net;
  DemandMatrix demand;
  UpgradeSet set;
};

inline SixUpgradeCase six_upgrade_case() {
  SixUpgradeCase c;
  c.net = grid_network(4, 400.0, 1.0);
  c.demand = DemandMatrix(16);
  const std::vector<std::pair<NodeId, NodeId>> ods = {
      {1, 16}, {16, 1}, {4, 13}, {13, 4}, {1, 4}, {13, 16}, {2, 15}, {5, 8}, {9, 12}, {3, 14}};
  for (std::size_t k = 0; k < ods.size(); ++k) {
    c.demand.set(ods[k].first, ods[k].second, 300.0 + 40.0 * static_cast<double>(k));
  }
  auto mod = [](const std::string& id, double cost, std::vector<std::pair<NodeId, NodeId>> links,
                double cap) {
    Upgrade u;
    u.id = id;
    u.cost = cost;
    for (auto [a, b] : links) {
      LinkModification m;
      m.selector = LinkSelector{a, b, 0};
      m.capacity = cap;
      u.modifications.push_back(m);
    }
    return u;
  };
  auto add = [](const std::string& id, double cost, NodeId a, NodeId b, double fft) {
    Upgrade u;
    u.id = id;
    u.cost = cost;
    u.kind = UpgradeKind::kNewRoad;
    u.additions = {make_link(a, b, fft, 600.0), make_link(b, a, fft, 600.0)};
    return u;
  };
  c.set.upgrades = {
      mod("u1", 300, {{6, 7}, {7, 6}}, 900.0),
      mod("u2", 400, {{7, 11}, {11, 7}}, 900.0),
      mod("u3", 250, {{6, 10}, {10, 6}}, 800.0),
      mod("u4", 350, {{10, 11}, {11, 10}}, 800.0),
      add("u5", 800, 1, 6, 1.2),
      add("u6", 900, 11, 16, 1.2),
  };
  return c;
}

/// Random digraph over nodes 1..n with `arcs` links and costs in [0, 10].
struct RandomGraph {
  Network net;
  std::vector<double> costs;
};

inline RandomGraph random_graph(std::mt19937_64& rng, int max_nodes, int max_arcs) {
  std::uniform_int_distribution<int> node_count(2, max_nodes);
  RandomGraph g;
  g.net.node_count = node_count(rng);
  g.net.zone_count = g.net.node_count;
  std::uniform_int_distribution<int> arcs(0, max_arcs);
  std::uniform_int_distribution<NodeId> node(1, g.net.node_count);
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  const int m = arcs(rng);
  for (int a = 0; a < m; ++a) {
    NodeId u = node(rng);
    NodeId v = node(rng);
    if (u == v) v = u % g.net.node_count + 1;
    g.net.links.push_back(make_link(u, v, 1.0, 1.0));
    g.costs.push_back(cost(rng));
  }
  return g;
}

}  // namespace fixtures
