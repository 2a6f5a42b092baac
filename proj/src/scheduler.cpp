#include "roadplan/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "roadplan/error.hpp"

namespace roadplan {

namespace {

double budget_tolerance(double budget) { return 1e-9 * std::max(1.0, std::abs(budget)); }

std::vector<std::size_t> built_indices(const Schedule& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.period.size(); ++i) {
    if (s.period[i] > 0) out.push_back(i);
  }
  return out;
}

SelectionProblem period_problem(const PeriodDeltas& d, const UpgradeSet& set,
                                std::span<const std::size_t> candidates, double budget,
                                double discount, double m, int period) {
  SelectionProblem p;
  p.budget = budget;
  p.m = m;
  p.discount = discount;
  std::vector<std::size_t> local(set.size(), set.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const std::size_t i = candidates[k];
    if (i >= d.values.size() || !d.values[i]) {
      throw DataError("period " + std::to_string(period) + ": no delta for upgrade '" +
                      set[i].id + "'");
    }
    local[i] = k;
    p.ids.push_back(set[i].id);
    p.costs.push_back(set[i].cost);
    p.values.push_back(*d.values[i]);
  }
  for (const auto& [key, value] : d.corrections) {
    if (key.second >= local.size()) continue;
    const std::size_t a = local[key.first];
    const std::size_t b = local[key.second];
    if (a == set.size() || b == set.size()) continue;
    p.corrections[{std::min(a, b), std::max(a, b)}] = value;
  }
  return p;
}

// Exact search for the linear multi-period model.
class IndependentSearch {
 public:
  IndependentSearch(std::span<const std::vector<double>> values, std::span<const double> costs,
                    const PlanningHorizon& h)
      : values_(values), costs_(costs), h_(h), n_(costs.size()), t_count_(h.periods()) {
    profit_.assign(static_cast<std::size_t>(t_count_), std::vector<double>(n_));
    for (int t = 1; t <= t_count_; ++t) {
      const double w = present_value(h.m / 1000.0, t, h.rate);
      for (std::size_t i = 0; i < n_; ++i) {
        profit_[t - 1][i] = values[t - 1][i] * w - costs[i];
      }
    }
    for (std::size_t i = 0; i < n_; ++i) {
      double best = 0.0;
      for (int t = 0; t < t_count_; ++t) best = std::max(best, profit_[t][i]);
      if (best > 0.0) items_.push_back(i);
    }
    std::stable_sort(items_.begin(), items_.end(), [&](std::size_t a, std::size_t b) {
      return best_profit(a) > best_profit(b);
    });
    remaining_ = h.budgets;
    current_period_.assign(n_, 0);
    best_.period.assign(n_, 0);
    finalize(best_);
  }

  Schedule run() {
    search(0);
    return best_;
  }

 private:
  double best_profit(std::size_t i) const {
    double best = 0.0;
    for (int t = 0; t < t_count_; ++t) best = std::max(best, profit_[t][i]);
    return best;
  }

  bool fits(std::size_t i, int t) const {
    return costs_[i] <= remaining_[t] + budget_tolerance(h_.budgets[t]);
  }

  void finalize(Schedule& s) const {
    const auto deltas = as_period_deltas(values_);
    const FeasibilityReport report = check_schedule(costs_, h_, s);
    s.per_period_spend = report.spend;
    s.npv = schedule_npv(deltas, costs_, h_, s);
  }

  double slack() const { return 1e-9 * (1.0 + std::abs(best_.npv)); }

  double bound(std::size_t k) const {
    struct Item {
      double profit;
      double cost;
    };
    std::vector<Item> items;
    double room = 0.0;
    for (int t = 0; t < t_count_; ++t) room += remaining_[t] + budget_tolerance(h_.budgets[t]);
    for (std::size_t a = k; a < items_.size(); ++a) {
      const std::size_t i = items_[a];
      double p = 0.0;
      for (int t = 0; t < t_count_; ++t) {
        if (fits(i, t)) p = std::max(p, profit_[t][i]);
      }
      if (p > 0.0) items.push_back({p, costs_[i]});
    }
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
      if (x.cost == 0.0 || y.cost == 0.0) return x.cost == 0.0 && y.cost != 0.0;
      return x.profit * y.cost > y.profit * x.cost;
    });
    double value = current_;
    for (const Item& it : items) {
      if (it.cost <= room) {
        value += it.profit;
        room -= it.cost;
      } else {
        value += it.profit * (room / it.cost);
        break;
      }
    }
    return value;
  }

  void search(std::size_t k) {
    if (k == items_.size()) {
      if (current_ < best_.npv - slack()) return;
      Schedule s;
      s.period = current_period_;
      finalize(s);
      if (check_schedule(costs_, h_, s).feasible() && preferred(s, best_)) best_ = std::move(s);
      return;
    }
    if (bound(k) < best_.npv - slack()) return;

    const std::size_t i = items_[k];
    std::vector<int> periods;
    for (int t = 0; t < t_count_; ++t) {
      if (profit_[t][i] > 0.0 && fits(i, t)) periods.push_back(t);
    }
    std::stable_sort(periods.begin(), periods.end(),
                     [&](int a, int b) { return profit_[a][i] > profit_[b][i]; });
    for (int t : periods) {
      const double saved = current_;
      current_ += profit_[t][i];
      remaining_[t] -= costs_[i];
      current_period_[i] = t + 1;
      search(k + 1);
      current_period_[i] = 0;
      remaining_[t] += costs_[i];
      current_ = saved;
    }
    search(k + 1);
  }

  std::span<const std::vector<double>> values_;
  std::span<const double> costs_;
  const PlanningHorizon& h_;
  std::size_t n_;
  int t_count_;
  std::vector<std::vector<double>> profit_;
  std::vector<std::size_t> items_;  // upgrades with some positive profit
  std::vector<double> remaining_;
  std::vector<int> current_period_;
  double current_ = 0.0;
  Schedule best_;
};

}  // namespace

double PlanningHorizon::total_budget() const {
  return std::accumulate(budgets.begin(), budgets.end(), 0.0);
}

void PlanningHorizon::validate() const {
  if (budgets.empty()) throw DataError("planning horizon needs at least one period");
  for (std::size_t t = 0; t < budgets.size(); ++t) {
    if (!(budgets[t] >= 0.0) || !std::isfinite(budgets[t])) {
      throw DataError("budget for period " + std::to_string(t + 1) + " must be >= 0");
    }
  }
  if (!(rate > -1.0) || !std::isfinite(rate)) throw DataError("interest rate must exceed -1");
  if (!std::isfinite(m)) throw DataError("m must be finite");
}

double present_value(double amount, int t, double rate) {
  return amount / std::pow(1.0 + rate, t);
}

DemandMatrix PeriodDemand::at(int period) const {
  if (period < 1) throw DataError("period must be >= 1");
  if (!explicit_periods.empty()) {
    if (static_cast<std::size_t>(period) > explicit_periods.size()) {
      throw DataError("no demand matrix supplied for period " + std::to_string(period));
    }
    return explicit_periods[static_cast<std::size_t>(period) - 1];
  }
  return scaled_demand(base, rules, period);
}

std::vector<std::size_t> Schedule::built_in(int t) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < period.size(); ++i) {
    if (period[i] == t) out.push_back(i);
  }
  return out;
}

std::size_t Schedule::built_count() const {
  return static_cast<std::size_t>(
      std::count_if(period.begin(), period.end(), [](int p) { return p > 0; }));
}

bool preferred(const Schedule& a, const Schedule& b) {
  if (a.npv != b.npv) return a.npv > b.npv;
  const auto ba = built_indices(a);
  const auto bb = built_indices(b);
  if (ba.size() != bb.size()) return ba.size() < bb.size();
  if (ba != bb) return ba < bb;
  return a.period < b.period;
}

FeasibilityReport check_schedule(std::span<const double> costs, const PlanningHorizon& horizon,
                                 const Schedule& schedule) {
  FeasibilityReport r;
  const int periods = horizon.periods();
  r.spend.assign(static_cast<std::size_t>(periods), 0.0);
  if (schedule.period.size() != costs.size()) {
    r.violations.push_back("schedule covers " + std::to_string(schedule.period.size()) +
                           " upgrades, expected " + std::to_string(costs.size()));
  }
  const std::size_t n = std::min(costs.size(), schedule.period.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int t = schedule.period[i];
    if (t == 0) continue;
    if (t < 0 || t > periods) {
      r.violations.push_back("upgrade " + std::to_string(i) + " assigned to invalid period " +
                             std::to_string(t));
      continue;
    }
    r.spend[static_cast<std::size_t>(t) - 1] += costs[i];
  }
  for (int t = 1; t <= periods; ++t) {
    const double spend = r.spend[static_cast<std::size_t>(t) - 1];
    const double budget = horizon.budgets[static_cast<std::size_t>(t) - 1];
    r.total += spend;
    if (spend > budget + budget_tolerance(budget)) {
      r.violations.push_back("period " + std::to_string(t) + " spends " + format_double(spend) +
                             " over budget " + format_double(budget));
    }
  }
  return r;
}

FeasibilityReport check_schedule(const UpgradeSet& set, const PlanningHorizon& horizon,
                                 const Schedule& schedule) {
  const auto costs = set.costs();
  return check_schedule(costs, horizon, schedule);
}

double schedule_npv(std::span<const PeriodDeltas> deltas, std::span<const double> costs,
                    const PlanningHorizon& horizon, const Schedule& schedule) {
  if (schedule.period.size() != costs.size()) throw DataError("schedule size mismatch");
  double npv = 0.0;
  for (int t = 1; t <= horizon.periods(); ++t) {
    const auto built = schedule.built_in(t);
    if (built.empty()) continue;
    if (static_cast<std::size_t>(t) > deltas.size()) {
      throw DataError("no deltas for period " + std::to_string(t));
    }
    const PeriodDeltas& d = deltas[static_cast<std::size_t>(t) - 1];
    const double w = present_value(horizon.m / 1000.0, t, horizon.rate);
    for (std::size_t i : built) {
      if (i >= d.values.size() || !d.values[i]) {
        throw DataError("no delta for upgrade " + std::to_string(i) + " in period " +
                        std::to_string(t));
      }
      npv += *d.values[i] * w - costs[i];
    }
    for (std::size_t a = 0; a < built.size(); ++a) {
      for (std::size_t b = a + 1; b < built.size(); ++b) {
        auto it = d.corrections.find({built[a], built[b]});
        if (it != d.corrections.end()) npv += it->second * w;
      }
    }
  }
  return npv;
}

GreedyResult greedy_schedule(const UpgradeSet& set, const PlanningHorizon& horizon,
                             const PeriodEvaluator& evaluate) {
  horizon.validate();
  const std::size_t n = set.size();
  const int periods = horizon.periods();
  const auto costs = set.costs();

  GreedyResult result;
  result.schedule.period.assign(n, 0);
  result.deltas_used.assign(static_cast<std::size_t>(periods),
                            PeriodDeltas{std::vector<std::optional<double>>(n), {}});

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const PeriodDeltas final_deltas = evaluate(periods, {}, all);
  const SelectionProblem first =
      period_problem(final_deltas, set, all, horizon.total_budget(),
                     present_value(1.0, periods, horizon.rate), horizon.m, periods);
  const Selection chosen = optimize_subset(first);
  result.build_all_at_end_npv = chosen.objective;
  for (std::size_t k : chosen.chosen) result.final_subset.push_back(all[k]);

  std::vector<std::size_t> remaining = result.final_subset;
  std::vector<std::size_t> built;
  for (int t = 1; t <= periods && !remaining.empty(); ++t) {
    PeriodDeltas d;
    try {
      d = evaluate(t, built, remaining);
    } catch (const SolverError& e) {
      throw SolverError("period " + std::to_string(t) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("period " + std::to_string(t) + ": " + e.what());
    }
    d.values.resize(n);
    const SelectionProblem p =
        period_problem(d, set, remaining, horizon.budgets[static_cast<std::size_t>(t) - 1],
                       present_value(1.0, t, horizon.rate), horizon.m, t);
    const Selection sel = optimize_subset(p);
    std::vector<std::size_t> picked;
    for (std::size_t k : sel.chosen) picked.push_back(remaining[k]);
    for (std::size_t i : picked) {
      result.schedule.period[i] = t;
      built.push_back(i);
    }
    std::sort(built.begin(), built.end());
    std::erase_if(remaining, [&](std::size_t i) {
      return std::find(picked.begin(), picked.end(), i) != picked.end();
    });
    result.deltas_used[static_cast<std::size_t>(t) - 1] = std::move(d);
  }

  result.schedule.per_period_spend = check_schedule(costs, horizon, result.schedule).spend;
  result.schedule.npv = schedule_npv(result.deltas_used, costs, horizon, result.schedule);
  return result;
}

TapEvaluator::TapEvaluator(Network net, PeriodDemand demand, UpgradeSet set, PairSet pairs,
                           SolverSettings settings, int subset_workers)
    : net_(std::move(net)),
      demand_(std::move(demand)),
      set_(std::move(set)),
      pairs_(std::move(pairs)),
      settings_(settings),
      subset_workers_(subset_workers) {}

PeriodDeltas TapEvaluator::operator()(int demand_period, std::span<const std::size_t> built,
                                      std::span<const std::size_t> candidates) {
  const SubsetMask built_mask = subset_mask(built);
  DeltaTable& table = memo_[{demand_period, built_mask}];

  std::vector<SubsetMask> subsets;
  for (std::size_t i : candidates) subsets.push_back(singleton(i));
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    for (std::size_t b = a + 1; b < candidates.size(); ++b) {
      const std::size_t i = std::min(candidates[a], candidates[b]);
      const std::size_t j = std::max(candidates[a], candidates[b]);
      if (pairs_.count({i, j}) != 0) subsets.push_back(pair_mask(i, j));
    }
  }
  const Network current = apply_upgrades(net_, set_, built);
  solves_ += extend_deltas(table, current, demand_.at(demand_period), set_, subsets, settings_,
                           subset_workers_);

  PeriodDeltas out;
  out.values.resize(set_.size());
  for (std::size_t i : candidates) out.values[i] = table.delta(singleton(i));
  for (const auto& [key, d] : table.pair_corrections()) {
    const bool in_a = std::find(candidates.begin(), candidates.end(), key.first) != candidates.end();
    const bool in_b = std::find(candidates.begin(), candidates.end(), key.second) != candidates.end();
    if (in_a && in_b && pairs_.count(key) != 0) out.corrections[key] = d;
  }
  return out;
}

double evaluate_schedule(const Network& net, const PeriodDemand& demand, const UpgradeSet& set,
                         const PlanningHorizon& horizon, const Schedule& schedule,
                         const SolverSettings& settings, int subset_workers) {
  const FeasibilityReport report = check_schedule(set, horizon, schedule);
  if (!report.feasible()) throw DataError("schedule is infeasible: " + report.violations.front());

  PairSet together;
  for (int t = 1; t <= horizon.periods(); ++t) {
    const auto now = schedule.built_in(t);
    for (std::size_t a = 0; a < now.size(); ++a) {
      for (std::size_t b = a + 1; b < now.size(); ++b) together.insert({now[a], now[b]});
    }
  }
  TapEvaluator evaluator(net, demand, set, together, settings, subset_workers);
  std::vector<PeriodDeltas> deltas;
  std::vector<std::size_t> built;
  for (int t = 1; t <= horizon.periods(); ++t) {
    const auto now = schedule.built_in(t);
    try {
      deltas.push_back(evaluator(t, built, now));
    } catch (const SolverError& e) {
      throw SolverError("period " + std::to_string(t) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("period " + std::to_string(t) + ": " + e.what());
    }
    built.insert(built.end(), now.begin(), now.end());
    std::sort(built.begin(), built.end());
  }
  return schedule_npv(deltas, set.costs(), horizon, schedule);
}

GreedyResult greedy_schedule(const Network& net, const PeriodDemand& demand,
                             const UpgradeSet& set, const PlanningHorizon& horizon,
                             const PairSet& pairs, const SolverSettings& settings,
                             int subset_workers) {
  TapEvaluator evaluator(net, demand, set, pairs, settings, subset_workers);
  return greedy_schedule(set, horizon,
                         [&](int t, std::span<const std::size_t> built,
                             std::span<const std::size_t> candidates) {
                           return evaluator(t, built, candidates);
                         });
}

std::vector<std::vector<double>> independent_values(const Network& net, const PeriodDemand& demand,
                                                    const UpgradeSet& set,
                                                    const PlanningHorizon& horizon,
                                                    const SolverSettings& settings,
                                                    int subset_workers) {
  horizon.validate();
  const auto singles = individual_subsets(set.size());
  std::vector<std::vector<double>> out;
  for (int t = 1; t <= horizon.periods(); ++t) {
    const DeltaTable table =
        compute_deltas(net, demand.at(t), set, singles, settings, subset_workers);
    std::vector<double> row(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) row[i] = table.delta(singleton(i));
    out.push_back(std::move(row));
  }
  return out;
}

Schedule independent_schedule(std::span<const std::vector<double>> values,
                              std::span<const double> costs, const PlanningHorizon& horizon) {
  horizon.validate();
  if (values.size() != static_cast<std::size_t>(horizon.periods())) {
    throw DataError("need one value row per period");
  }
  for (const auto& row : values) {
    if (row.size() != costs.size()) throw DataError("value row length differs from upgrade count");
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("non-finite value");
    }
  }
  for (double c : costs) {
    if (!(c >= 0.0)) throw DataError("costs must be >= 0");
  }
  return IndependentSearch(values, costs, horizon).run();
}

std::vector<PeriodDeltas> as_period_deltas(std::span<const std::vector<double>> values) {
  std::vector<PeriodDeltas> out;
  for (const auto& row : values) {
    PeriodDeltas d;
    d.values.assign(row.begin(), row.end());
    out.push_back(std::move(d));
  }
  return out;
}

void write_schedule_table(std::ostream& out, const UpgradeSet& set,
                          const PlanningHorizon& horizon, const Schedule& schedule) {
  const int periods = horizon.periods();
  std::size_t id_width = std::string("Expenditure").size();
  for (const Upgrade& u : set.upgrades) id_width = std::max(id_width, u.id.size());
  constexpr int kCol = 8;

  auto money = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(v == std::round(v) ? 0 : 1) << v;
    return s.str();
  };
  auto row_label = [&](const std::string& a, const std::string& b) {
    out << std::left << std::setw(static_cast<int>(id_width)) << a << ' ' << std::right
        << std::setw(kCol) << b;
  };

  row_label("Period", "Cost");
  for (int t = 1; t <= periods; ++t) out << std::setw(kCol) << t;
  out << std::setw(kCol + 2) << "Total" << "\n";

  row_label("Budget", "");
  for (double b : horizon.budgets) out << std::setw(kCol) << money(b);
  out << std::setw(kCol + 2) << money(horizon.total_budget()) << "\n";

  for (std::size_t i = 0; i < set.size(); ++i) {
    row_label(set[i].id, money(set[i].cost));
    for (int t = 1; t <= periods; ++t) {
      out << std::setw(kCol) << (i < schedule.period.size() && schedule.period[i] == t ? "X" : ".");
    }
    out << "\n";
  }

  const FeasibilityReport report = check_schedule(set, horizon, schedule);
  row_label("Expenditure", "");
  for (double s : report.spend) out << std::setw(kCol) << money(s);
  out << std::setw(kCol + 2) << money(report.total) << "\n";
  out << "NPV " << money(schedule.npv) << "\n";
}

Schedule read_schedule_listing(std::istream& in, const UpgradeSet& set) {
  Schedule s;
  s.period.assign(set.size(), 0);
  std::vector<bool> seen(set.size(), false);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id)) continue;
    if (id == "#") {
      std::string tag;
      double npv = 0.0;
      if (fields >> tag && tag == "npv" && fields >> npv) s.npv = npv;
      continue;
    }
    if (id[0] == '#') continue;
    int period = -1;
    if (!(fields >> period) || period < 0) {
      throw ParseError("expected '<id> <period>'", line_no);
    }
    const auto idx = set.index_of(id);
    if (!idx) throw ParseError("unknown upgrade '" + id + "'", line_no);
    if (seen[*idx]) throw ParseError("upgrade '" + id + "' listed twice", line_no);
    seen[*idx] = true;
    s.period[*idx] = period;
  }
  return s;
}

void write_schedule_listing(std::ostream& out, const UpgradeSet& set, const Schedule& schedule) {
  out << "# npv " << format_double(schedule.npv) << "\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set[i].id << ' ' << (i < schedule.period.size() ? schedule.period[i] : 0) << "\n";
  }
}

}  // namespace roadplan
