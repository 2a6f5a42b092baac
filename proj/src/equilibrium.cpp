#include "roadplan/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "parallel.hpp"
#include "roadplan/error.hpp"

namespace roadplan {

namespace {

// x^beta with the common integral exponents unrolled.
inline double ratio_power(double x, double beta) {
  if (beta == 4.0) {
    const double x2 = x * x;
    return x2 * x2;
  }
  if (beta == 1.0) return x;
  if (beta == 0.0) return 1.0;
  return std::pow(x, beta);
}

constexpr int kLineSearchIterations = 48;
// Upper bound on the number of origin chunks; fixing the partition (rather
// than deriving it from the thread count) keeps sums bit-reproducible.
constexpr std::size_t kMaxChunks = 64;

// All-or-nothing loader reused across Frank-Wolfe iterations.
class AonLoader {
 public:
  AonLoader(const Network& net, const DemandMatrix& demand, ShortestPathAlgorithm algo,
            int threads)
      : graph_(net), origins_(demand.by_origin()), pool_(threads) {
    for (const auto& od : origins_) {
      if (!net.has_node(od.origin)) {
        throw DataError("demand origin " + std::to_string(od.origin) + " is not a network node");
      }
      for (const auto& e : od.entries) {
        if (!net.has_node(e.destination)) {
          throw DataError("demand destination " + std::to_string(e.destination) +
                          " is not a network node");
        }
      }
    }
    const std::size_t chunks = std::min(kMaxChunks, origins_.size());
    for (std::size_t c = 0; c <= chunks; ++c) {
      bounds_.push_back(chunks == 0 ? 0 : c * origins_.size() / chunks);
    }
    partials_.assign(chunks, std::vector<double>(graph_.link_count(), 0.0));
    for (int w = 0; w < pool_.size(); ++w) {
      solvers_.push_back(std::make_unique<ShortestPathSolver>(graph_, algo));
      trees_.emplace_back();
    }
  }

  void load(std::span<const double> costs, std::vector<double>& out) {
    const std::size_t chunks = partials_.size();
    pool_.run(chunks, [&](std::size_t c, int worker) {
      auto& partial = partials_[c];
      std::fill(partial.begin(), partial.end(), 0.0);
      auto& tree = trees_[static_cast<std::size_t>(worker)];
      for (std::size_t o = bounds_[c]; o < bounds_[c + 1]; ++o) {
        const OriginDemand& od = origins_[o];
        solvers_[static_cast<std::size_t>(worker)]->solve(costs, od.origin, tree);
        for (const DemandEntry& e : od.entries) {
          if (e.destination == od.origin) continue;
          if (!tree.reachable(e.destination)) {
            throw DataError("destination " + std::to_string(e.destination) +
                            " is unreachable from origin " + std::to_string(od.origin) +
                            " (O-D pair (" + std::to_string(od.origin) + ", " +
                            std::to_string(e.destination) + ") has demand " +
                            format_double(e.trips) + ")");
          }
          NodeId node = e.destination;
          while (node != od.origin) {
            const LinkIndex a = tree.predecessor_link[static_cast<std::size_t>(node)];
            partial[static_cast<std::size_t>(a)] += e.trips;
            node = graph_.tail(a);
          }
        }
      }
    });
    out.assign(graph_.link_count(), 0.0);
    for (const auto& partial : partials_) {
      for (std::size_t a = 0; a < out.size(); ++a) out[a] += partial[a];
    }
  }

 private:
  ForwardStar graph_;
  std::vector<OriginDemand> origins_;
  detail::WorkerPool pool_;
  std::vector<std::size_t> bounds_;
  std::vector<std::vector<double>> partials_;
  std::vector<std::unique_ptr<ShortestPathSolver>> solvers_;
  std::vector<ShortestPathTree> trees_;
};

void check_finite(std::span<const double> latencies) {
  for (std::size_t a = 0; a < latencies.size(); ++a) {
    if (!std::isfinite(latencies[a])) {
      throw SolverError("non-finite latency on link " + std::to_string(a));
    }
  }
}

// d/dlambda of the Beckmann objective along x + lambda (y - x).
double directional_derivative(const Network& net, std::span<const double> x,
                              std::span<const double> y, double lambda) {
  double g = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double dir = y[a] - x[a];
    if (dir == 0.0) continue;
    g += dir * bpr_latency(net.links[a], x[a] + lambda * dir);
  }
  return g;
}

double line_search(const Network& net, std::span<const double> x, std::span<const double> y) {
  if (directional_derivative(net, x, y, 1.0) <= 0.0) return 1.0;
  if (directional_derivative(net, x, y, 0.0) >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < kLineSearchIterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (directional_derivative(net, x, y, mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double bpr_latency(const Link& link, double flow) {
  return link.free_flow_time * (1.0 + link.alpha * ratio_power(flow / link.capacity, link.beta));
}

double bpr_integral(const Link& link, double flow) {
  const double ratio = ratio_power(flow / link.capacity, link.beta);
  return link.free_flow_time * flow * (1.0 + link.alpha * ratio / (link.beta + 1.0));
}

std::vector<double> link_latencies(const Network& net, std::span<const double> flows) {
  std::vector<double> lat(net.links.size());
  for (std::size_t a = 0; a < lat.size(); ++a) lat[a] = bpr_latency(net.links[a], flows[a]);
  return lat;
}

double beckmann_objective(const Network& net, std::span<const double> flows) {
  double z = 0.0;
  for (std::size_t a = 0; a < net.links.size(); ++a) z += bpr_integral(net.links[a], flows[a]);
  return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("dot: vector lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double relative_gap(std::span<const double> flows, std::span<const double> costs,
                    std::span<const double> aon_flows) {
  if (flows.size() != costs.size() || flows.size() != aon_flows.size()) {
    throw DataError("relative_gap: vector lengths differ");
  }
  const double current = dot(flows, costs);
  if (current == 0.0) throw SolverError("relative gap undefined: total cost is zero");
  return (current - dot(aon_flows, costs)) / current;
}

std::vector<double> all_or_nothing(const Network& net, const DemandMatrix& demand,
                                   std::span<const double> link_costs,
                                   ShortestPathAlgorithm algo, int threads) {
  check_link_costs(link_costs, net.links.size());
  AonLoader loader(net, demand, algo, threads);
  std::vector<double> flows;
  loader.load(link_costs, flows);
  return flows;
}

Assignment solve_ue(const Network& net, const DemandMatrix& demand,
                    const SolverSettings& settings) {
  if (!(settings.target_gap > 0.0)) throw DataError("target gap must be positive");
  if (settings.max_iters < 1) throw DataError("max_iters must be at least 1");
  net.validate();

  AonLoader loader(net, demand, settings.algorithm, settings.threads);
  const std::size_t n = net.links.size();

  Assignment result;
  if (demand.empty()) {
    result.flows.assign(n, 0.0);
    result.latencies = link_latencies(net, result.flows);
    result.converged = true;
    return result;
  }
  std::vector<double>& x = result.flows;
  std::vector<double> y;
  std::vector<double> lat = link_latencies(net, std::vector<double>(n, 0.0));
  check_finite(lat);
  loader.load(lat, x);

  double beckmann = beckmann_objective(net, x);
  std::vector<double> candidate(n);
  for (int iter = 0;; ++iter) {
    lat = link_latencies(net, x);
    check_finite(lat);
    loader.load(lat, y);
    const double gap = relative_gap(x, lat, y);

    result.history.push_back(IterationRecord{iter, gap, beckmann, 0.0});
    result.iterations = iter;
    result.relative_gap = gap;
    result.beckmann = beckmann;
    if (gap <= settings.target_gap) {
      result.converged = true;
      break;
    }
    if (iter >= settings.max_iters) break;

    double lambda = line_search(net, x, y);
    // The bisection lands within ~1e-14 of the minimiser; guard the
    // objective against rounding so it never increases.
    double next = beckmann;
    while (lambda > 0.0) {
      for (std::size_t a = 0; a < n; ++a) candidate[a] = x[a] + lambda * (y[a] - x[a]);
      next = beckmann_objective(net, candidate);
      if (next <= beckmann) break;
      lambda = lambda > 1e-12 ? 0.5 * lambda : 0.0;
    }
    if (lambda > 0.0) {
      x.swap(candidate);
      beckmann = next;
    }
    result.history.back().step = lambda;
    if (lambda == 0.0) break;  // stalled at rounding level
  }
  result.latencies = std::move(lat);
  result.vht = dot(result.flows, result.latencies);
  return result;
}

double vht(const Assignment& assignment) { return dot(assignment.flows, assignment.latencies); }

void write_flow_file(std::ostream& out, const Network& net, const Assignment& assignment) {
  out << "# VHT " << format_double(assignment.vht) << " GAP "
      << format_double(assignment.relative_gap) << " ITERATIONS " << assignment.iterations
      << "\n";
  for (std::size_t a = 0; a < net.links.size(); ++a) {
    out << net.links[a].from << ' ' << net.links[a].to << ' '
        << format_double(assignment.flows[a]) << ' ' << format_double(assignment.latencies[a])
        << "\n";
  }
}

}  // namespace roadplan
