#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "roadplan/equilibrium.hpp"
#include "roadplan/error.hpp"
#include "roadplan/interaction.hpp"
#include "roadplan/network.hpp"
#include "roadplan/portfolio.hpp"
#include "roadplan/scenario.hpp"
#include "roadplan/scheduler.hpp"
#include "roadplan/shortest_path.hpp"

namespace py = pybind11;
using namespace roadplan;

namespace {

using Coordinates = std::map<NodeId, std::pair<double, double>>;

Coordinates to_pairs(const std::map<NodeId, Point>& pts) {
  Coordinates out;
  for (const auto& [id, p] : pts) out[id] = {p.x, p.y};
  return out;
}

SolverSettings make_settings(double gap, int max_iters, const std::string& algorithm, int threads) {
  SolverSettings s;
  s.target_gap = gap;
  s.max_iters = max_iters;
  s.algorithm = parse_shortest_path_algorithm(algorithm);
  s.threads = threads;
  return s;
}

}  // namespace

PYBIND11_MODULE(_roadplan, m) {
  m.doc() = "Bindings for the roadplan C++ library";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  // network ------------------------------------------------------------------

  py::class_<Link>(m, "Link")
      .def(py::init<>())
      .def_readwrite("from_node", &Link::from)
      .def_readwrite("to_node", &Link::to)
      .def_readwrite("capacity", &Link::capacity)
      .def_readwrite("length", &Link::length)
      .def_readwrite("free_flow_time", &Link::free_flow_time)
      .def_readwrite("alpha", &Link::alpha)
      .def_readwrite("beta", &Link::beta);

  py::class_<Network>(m, "Network")
      .def(py::init<>())
      .def_readwrite("node_count", &Network::node_count)
      .def_readwrite("zone_count", &Network::zone_count)
      .def_readwrite("first_thru_node", &Network::first_thru_node)
      .def_readwrite("links", &Network::links)
      .def_property(
          "coordinates", [](const Network& n) { return to_pairs(n.coordinates); },
          [](Network& n, const Coordinates& c) {
            n.coordinates.clear();
            for (const auto& [id, p] : c) n.coordinates[id] = {p.first, p.second};
          })
      .def("validate", &Network::validate);

  py::class_<DemandMatrix>(m, "DemandMatrix")
      .def(py::init<>())
      .def(py::init<int>(), py::arg("zone_count"))
      .def("set", &DemandMatrix::set, py::arg("origin"), py::arg("destination"), py::arg("trips"))
      .def("get", &DemandMatrix::get, py::arg("origin"), py::arg("destination"))
      .def("total", &DemandMatrix::total)
      .def_property_readonly("zone_count", &DemandMatrix::zone_count)
      .def("__len__", &DemandMatrix::size);

  py::class_<Upgrade>(m, "Upgrade")
      .def_readonly("id", &Upgrade::id)
      .def_readonly("cost", &Upgrade::cost);

  py::class_<UpgradeSet>(m, "UpgradeSet")
      .def_readonly("upgrades", &UpgradeSet::upgrades)
      .def("__len__", &UpgradeSet::size)
      .def("costs", &UpgradeSet::costs)
      .def("index_of", &UpgradeSet::index_of);

  m.def("read_network", &read_network, py::arg("path"));
  m.def("read_demand", &read_demand, py::arg("path"));
  m.def(
      "read_nodes", [](const std::filesystem::path& p) { return to_pairs(read_nodes(p)); },
      py::arg("path"));
  m.def("read_upgrades", &read_upgrades, py::arg("path"), py::arg("net") = nullptr);
  m.def(
      "apply_upgrades",
      [](const Network& net, const UpgradeSet& set, std::vector<std::size_t> selected) {
        return apply_upgrades(net, set, selected);
      },
      py::arg("net"), py::arg("upgrades"), py::arg("selected"));

  // shortest paths and equilibrium -------------------------------------------

  m.def(
      "shortest_path_labels",
      [](const Network& net, std::vector<double> costs, NodeId source,
         const std::string& algorithm) {
        return shortest_paths(net, costs, source, parse_shortest_path_algorithm(algorithm)).labels;
      },
      py::arg("net"), py::arg("costs"), py::arg("source"),
      py::arg("algorithm") = "desopo-pape-lll",
      "Labels indexed by node id; slot 0 is unused.");

  py::class_<SolverSettings>(m, "SolverSettings")
      .def(py::init(&make_settings), py::arg("target_gap") = 1e-4, py::arg("max_iters") = 1000,
           py::arg("algorithm") = "desopo-pape-lll", py::arg("threads") = 1)
      .def_readwrite("target_gap", &SolverSettings::target_gap)
      .def_readwrite("max_iters", &SolverSettings::max_iters)
      .def_readwrite("threads", &SolverSettings::threads);

  py::class_<Assignment>(m, "Assignment")
      .def_readonly("flows", &Assignment::flows)
      .def_readonly("latencies", &Assignment::latencies)
      .def_readonly("vht", &Assignment::vht)
      .def_readonly("relative_gap", &Assignment::relative_gap)
      .def_readonly("iterations", &Assignment::iterations)
      .def_readonly("beckmann", &Assignment::beckmann)
      .def_readonly("converged", &Assignment::converged);

  m.def("solve_ue", &solve_ue, py::arg("net"), py::arg("demand"),
        py::arg("settings") = SolverSettings{}, py::call_guard<py::gil_scoped_release>());

  // scenarios and interaction ------------------------------------------------

  m.def("subset_mask", [](std::vector<std::size_t> idx) { return subset_mask(idx); });
  m.def("subsets_up_to", &subsets_up_to, py::arg("n"), py::arg("max_size"));

  py::class_<DeltaTable>(m, "DeltaTable")
      .def_readonly("baseline_vht", &DeltaTable::baseline_vht)
      .def("delta", &DeltaTable::delta, py::arg("mask"))
      .def("contains", &DeltaTable::contains, py::arg("mask"))
      .def("singles", &DeltaTable::singles)
      .def("pair_corrections", &DeltaTable::pair_corrections)
      .def("__len__", [](const DeltaTable& t) { return t.evaluated.size(); });

  m.def(
      "compute_deltas",
      [](const Network& net, const DemandMatrix& demand, const UpgradeSet& set,
         std::vector<SubsetMask> subsets, const SolverSettings& settings, int workers) {
        return compute_deltas(net, demand, set, subsets, settings, workers);
      },
      py::arg("net"), py::arg("demand"), py::arg("upgrades"), py::arg("subsets"),
      py::arg("settings") = SolverSettings{}, py::arg("workers") = 1,
      py::call_guard<py::gil_scoped_release>());
  m.def("estimate_delta", py::overload_cast<const DeltaTable&, SubsetMask, int>(&estimate_delta),
        py::arg("table"), py::arg("mask"), py::arg("order"));

  m.def(
      "pairwise_distances",
      [](const Network& net, const UpgradeSet& set) {
        std::vector<std::tuple<std::size_t, std::size_t, double>> out;
        for (const auto& d : pairwise_distances(net, set)) out.emplace_back(d.i, d.j, d.distance);
        return out;
      },
      py::arg("net"), py::arg("upgrades"));
  m.def(
      "predict_pairs_threshold",
      [](const Network& net, const UpgradeSet& set, double threshold) {
        return predict_pairs_threshold(pairwise_distances(net, set), threshold);
      },
      py::arg("net"), py::arg("upgrades"), py::arg("threshold"));
  m.def(
      "predict_pairs_count",
      [](const Network& net, const UpgradeSet& set, std::size_t count) {
        return predict_pairs_count(pairwise_distances(net, set), count);
      },
      py::arg("net"), py::arg("upgrades"), py::arg("count"));
  m.def(
      "predict_pairs_clustering",
      [](const Network& net, const UpgradeSet& set, int k, int restarts, std::uint64_t seed) {
        return predict_pairs_clustering(upgrade_locations(net, set), k, restarts, seed);
      },
      py::arg("net"), py::arg("upgrades"), py::arg("k"), py::arg("restarts") = 10,
      py::arg("seed") = 1);

  // portfolio ----------------------------------------------------------------

  py::class_<SelectionProblem>(m, "SelectionProblem")
      .def(py::init<>())
      .def_readwrite("ids", &SelectionProblem::ids)
      .def_readwrite("values", &SelectionProblem::values)
      .def_readwrite("costs", &SelectionProblem::costs)
      .def_readwrite("corrections", &SelectionProblem::corrections)
      .def_readwrite("budget", &SelectionProblem::budget)
      .def_readwrite("m", &SelectionProblem::m)
      .def_readwrite("discount", &SelectionProblem::discount);

  py::class_<Selection>(m, "Selection")
      .def_readonly("chosen", &Selection::chosen)
      .def_readonly("objective", &Selection::objective)
      .def_readonly("spend", &Selection::spend)
      .def_readonly("estimated_delta_vht", &Selection::estimated_delta_vht)
      .def_readonly("feasible", &Selection::feasible);

  m.def(
      "optimize_subset",
      [](const SelectionProblem& p, bool exhaustive) {
        return optimize_subset(p, exhaustive ? SelectionMethod::kExhaustive
                                             : SelectionMethod::kBranchAndBound);
      },
      py::arg("problem"), py::arg("exhaustive") = false);
  m.def(
      "evaluate_selection",
      [](const SelectionProblem& p, std::vector<std::size_t> chosen) {
        return evaluate_selection(p, chosen);
      },
      py::arg("problem"), py::arg("chosen"));
  m.def("selection_problem_from", &selection_problem_from, py::arg("table"), py::arg("upgrades"),
        py::arg("budget"), py::arg("m") = 3650.0);

  // scheduling ---------------------------------------------------------------

  py::class_<PlanningHorizon>(m, "PlanningHorizon")
      .def(py::init([](std::vector<double> budgets, double rate, double m_value) {
             return PlanningHorizon{std::move(budgets), rate, m_value};
           }),
           py::arg("budgets"), py::arg("rate") = 0.04, py::arg("m") = 3650.0)
      .def_readwrite("budgets", &PlanningHorizon::budgets)
      .def_readwrite("rate", &PlanningHorizon::rate)
      .def_readwrite("m", &PlanningHorizon::m)
      .def("periods", &PlanningHorizon::periods);

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<>())
      .def_readwrite("period", &Schedule::period)
      .def_readonly("per_period_spend", &Schedule::per_period_spend)
      .def_readonly("npv", &Schedule::npv);

  py::class_<FeasibilityReport>(m, "FeasibilityReport")
      .def_readonly("spend", &FeasibilityReport::spend)
      .def_readonly("total", &FeasibilityReport::total)
      .def_readonly("violations", &FeasibilityReport::violations)
      .def("feasible", &FeasibilityReport::feasible);

  m.def("present_value", &present_value, py::arg("amount"), py::arg("t"), py::arg("rate"));
  m.def(
      "check_schedule",
      [](std::vector<double> costs, const PlanningHorizon& h, const Schedule& s) {
        return check_schedule(std::span<const double>(costs), h, s);
      },
      py::arg("costs"), py::arg("horizon"), py::arg("schedule"));
  m.def(
      "independent_schedule",
      [](std::vector<std::vector<double>> values, std::vector<double> costs,
         const PlanningHorizon& h) { return independent_schedule(values, costs, h); },
      py::arg("values"), py::arg("costs"), py::arg("horizon"),
      "values[t-1][i] is the VHT saving of upgrade i in period t.");
}
