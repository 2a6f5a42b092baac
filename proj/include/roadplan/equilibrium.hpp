#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "roadplan/network.hpp"
#include "roadplan/shortest_path.hpp"

namespace roadplan {

/// BPR volume-delay: t (1 + alpha (f/Q)^beta). Flow may exceed capacity.
double bpr_latency(const Link& link, double flow);

/// Closed-form integral of bpr_latency from 0 to `flow`.
double bpr_integral(const Link& link, double flow);

std::vector<double> link_latencies(const Network& net, std::span<const double> flows);

/// Sum of bpr_integral over links (the Beckmann objective).
double beckmann_objective(const Network& net, std::span<const double> flows);

double dot(std::span<const double> a, std::span<const double> b);

/// (f.l - f_aon.l) / (f.l). Throws SolverError when f.l is zero.
double relative_gap(std::span<const double> flows, std::span<const double> costs,
                    std::span<const double> aon_flows);

struct SolverSettings {
  double target_gap = 1e-4;
  int max_iters = 1000;
  ShortestPathAlgorithm algorithm = ShortestPathAlgorithm::kDesopoPapeLll;
  int threads = 1;
};

struct IterationRecord {
  int iteration = 0;
  double relative_gap = 0.0;
  double beckmann = 0.0;
  double step = 0.0;  // step taken after this record (0 for the last one)
};

/// A link-flow state with its latencies and summary measures.
struct Assignment {
  std::vector<double> flows;
  std::vector<double> latencies;
  double vht = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  double beckmann = 0.0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

/// Loads every O-D demand onto the shortest path under `link_costs`.
/// Throws DataError when a demanded destination is unreachable.
std::vector<double> all_or_nothing(
    const Network& net, const DemandMatrix& demand, std::span<const double> link_costs,
    ShortestPathAlgorithm algo = ShortestPathAlgorithm::kDesopoPapeLll, int threads = 1);

/// Frank-Wolfe user equilibrium. Stops at relative_gap <= target_gap or after
/// max_iters steps, whichever comes first. Results do not depend on the
/// thread count.
Assignment solve_ue(const Network& net, const DemandMatrix& demand,
                    const SolverSettings& settings = {});

/// Vehicle-hours travelled: flows . latencies recomputed from the stored vectors.
double vht(const Assignment& assignment);

/// Flow file: header `# VHT <v> GAP <g> ITERATIONS <n>`, then rows
/// `from to volume cost`.
void write_flow_file(std::ostream& out, const Network& net, const Assignment& assignment);

}  // namespace roadplan
