#include "roadplan/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "roadplan/error.hpp"

namespace roadplan {

namespace {

double budget_tolerance(double budget) { return 1e-9 * std::max(1.0, std::abs(budget)); }

class BranchAndBound {
 public:
  explicit BranchAndBound(const SelectionProblem& p)
      : p_(p), n_(p.size()), w_(p.value_weight()), weights_(n_ * n_, 0.0) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return p.costs[a] < p.costs[b]; });
    position_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) position_[order_[k]] = k;
    for (const auto& [key, d] : p.corrections) {
      weights_[key.first * n_ + key.second] = d * w_;
      weights_[key.second * n_ + key.first] = d * w_;
    }
    marginal_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) marginal_[i] = p.values[i] * w_ - p.costs[i];
    best_ = evaluate_selection(p, {});
  }

  Selection run() {
    search(0);
    return best_;
  }

 private:
  double slack() const { return 1e-9 * (1.0 + std::abs(best_.objective)); }

  bool fits(std::size_t i) const {
    return p_.costs[i] <= p_.budget - spent_ + budget_tolerance(p_.budget);
  }

  // LP relaxation over undecided items with pair terms split between the
  // two endpoints: any subset T of undecided items gains at most
  // sum_{j in T} (marginal_j + 1/2 sum_{l undecided} max(0, w d_jl)).
  double bound(std::size_t k) const {
    struct Item {
      double profit;
      double cost;
    };
    std::vector<Item> items;
    items.reserve(n_ - k);
    for (std::size_t a = k; a < n_; ++a) {
      const std::size_t j = order_[a];
      if (!fits(j)) break;
      double pair_gain = 0.0;
      for (std::size_t b = k; b < n_; ++b) {
        if (b != a) pair_gain += std::max(0.0, weights_[j * n_ + order_[b]]);
      }
      const double profit = marginal_[j] + 0.5 * pair_gain;
      if (profit > 0.0) items.push_back({profit, p_.costs[j]});
    }
    double value = current_;
    double room = p_.budget - spent_ + budget_tolerance(p_.budget);
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
      // zero-cost items first, then by profit density
      if (x.cost == 0.0 || y.cost == 0.0) return x.cost == 0.0 && y.cost != 0.0;
      return x.profit * y.cost > y.profit * x.cost;
    });
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

  void leaf() {
    if (current_ < best_.objective - slack()) return;
    std::vector<std::size_t> chosen = stack_;
    std::sort(chosen.begin(), chosen.end());
    Selection s = evaluate_selection(p_, chosen);
    if (s.feasible && preferred(s, best_)) best_ = std::move(s);
  }

  void search(std::size_t k) {
    if (k == n_ || !fits(order_[k])) {
      leaf();
      return;
    }
    if (bound(k) < best_.objective - slack()) return;

    const std::size_t i = order_[k];
    const double saved_current = current_;
    const double saved_spent = spent_;
    current_ += marginal_[i];
    spent_ += p_.costs[i];
    for (std::size_t j = 0; j < n_; ++j) marginal_[j] += weights_[i * n_ + j];
    stack_.push_back(i);
    search(k + 1);
    stack_.pop_back();
    for (std::size_t j = 0; j < n_; ++j) marginal_[j] -= weights_[i * n_ + j];
    current_ = saved_current;
    spent_ = saved_spent;

    search(k + 1);
  }

  const SelectionProblem& p_;
  std::size_t n_;
  double w_;
  std::vector<double> weights_;  // dense w * d, symmetric
  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_;
  std::vector<double> marginal_;
  std::vector<std::size_t> stack_;
  double current_ = 0.0;
  double spent_ = 0.0;
  Selection best_;
};

Selection exhaustive(const SelectionProblem& p) {
  const std::size_t n = p.size();
  if (n > 25) throw DataError("exhaustive selection is limited to 25 upgrades");
  Selection best = evaluate_selection(p, {});
  std::vector<std::size_t> chosen;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    chosen.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) chosen.push_back(i);
    }
    Selection s = evaluate_selection(p, chosen);
    if (s.feasible && preferred(s, best)) best = std::move(s);
  }
  return best;
}

}  // namespace

void SelectionProblem::validate() const {
  const std::size_t n = values.size();
  if (costs.size() != n) throw DataError("selection problem: values and costs differ in length");
  if (!ids.empty() && ids.size() != n) throw DataError("selection problem: ids length mismatch");
  if (!(budget >= 0.0)) throw DataError("selection problem: budget must be non-negative");
  if (!std::isfinite(m) || !std::isfinite(discount)) throw DataError("selection problem: bad m");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(costs[i] >= 0.0) || !std::isfinite(costs[i])) {
      throw DataError("selection problem: cost of item " + std::to_string(i) + " is invalid");
    }
    if (!std::isfinite(values[i])) {
      throw DataError("selection problem: value of item " + std::to_string(i) + " is invalid");
    }
  }
  for (const auto& [key, d] : corrections) {
    if (key.first >= key.second || key.second >= n || !std::isfinite(d)) {
      throw DataError("selection problem: invalid correction key (" + std::to_string(key.first) +
                      ", " + std::to_string(key.second) + ")");
    }
  }
}

Selection evaluate_selection(const SelectionProblem& problem, std::span<const std::size_t> chosen) {
  Selection s;
  s.chosen.assign(chosen.begin(), chosen.end());
  std::sort(s.chosen.begin(), s.chosen.end());
  s.chosen.erase(std::unique(s.chosen.begin(), s.chosen.end()), s.chosen.end());
  double est = 0.0;
  double spend = 0.0;
  for (std::size_t a = 0; a < s.chosen.size(); ++a) {
    const std::size_t i = s.chosen[a];
    if (i >= problem.size()) throw DataError("selected item " + std::to_string(i) + " out of range");
    est += problem.values[i];
    spend += problem.costs[i];
    for (std::size_t b = a + 1; b < s.chosen.size(); ++b) {
      auto it = problem.corrections.find({i, s.chosen[b]});
      if (it != problem.corrections.end()) est += it->second;
    }
  }
  s.estimated_delta_vht = est;
  s.spend = spend;
  s.objective = est * problem.value_weight() - spend;
  s.feasible = spend <= problem.budget + budget_tolerance(problem.budget);
  return s;
}

bool preferred(const Selection& a, const Selection& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  if (a.chosen.size() != b.chosen.size()) return a.chosen.size() < b.chosen.size();
  return a.chosen < b.chosen;
}

Selection optimize_subset(const SelectionProblem& problem, SelectionMethod method) {
  problem.validate();
  if (method == SelectionMethod::kExhaustive) return exhaustive(problem);
  return BranchAndBound(problem).run();
}

SelectionProblem parse_selection_problem(std::istream& in) {
  SelectionProblem p;
  std::string line;
  int line_no = 0;
  std::optional<std::size_t> n;
  bool have_budget = false;
  std::vector<std::vector<std::string>> pair_rows;
  std::vector<int> pair_lines;

  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ParseError("non-numeric field '" + s + "'", line_no);
    return v;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string tok; fields >> tok;) f.push_back(tok);
    if (f.empty()) continue;

    if (!n) {
      if (f.size() != 1) throw ParseError("expected item count N", line_no);
      const double v = number(f[0]);
      if (v < 0 || v != std::floor(v)) throw ParseError("N must be a non-negative integer", line_no);
      n = static_cast<std::size_t>(v);
      continue;
    }
    if (p.values.size() < *n) {
      if (f.size() != 3) throw ParseError("expected 'id cost v'", line_no);
      if (std::find(p.ids.begin(), p.ids.end(), f[0]) != p.ids.end()) {
        throw ParseError("duplicate id '" + f[0] + "'", line_no);
      }
      p.ids.push_back(f[0]);
      p.costs.push_back(number(f[1]));
      p.values.push_back(number(f[2]));
      continue;
    }
    if (f[0] == "BUDGET" && f.size() == 2) {
      p.budget = number(f[1]);
      have_budget = true;
    } else if (f[0] == "M" && f.size() == 2) {
      p.m = number(f[1]);
    } else if (f.size() == 3) {
      pair_rows.push_back(f);
      pair_lines.push_back(line_no);
    } else {
      throw ParseError("unexpected line", line_no);
    }
  }
  if (!n || p.values.size() != *n) throw ParseError("fewer item rows than N", line_no);
  if (!have_budget) throw ParseError("missing BUDGET line", line_no);

  for (std::size_t r = 0; r < pair_rows.size(); ++r) {
    line_no = pair_lines[r];
    const auto& f = pair_rows[r];
    auto find = [&](const std::string& id) {
      auto it = std::find(p.ids.begin(), p.ids.end(), id);
      if (it == p.ids.end()) throw ParseError("unknown id '" + id + "'", line_no);
      return static_cast<std::size_t>(it - p.ids.begin());
    };
    std::size_t i = find(f[0]);
    std::size_t j = find(f[1]);
    if (i == j) throw ParseError("self-pair", line_no);
    if (i > j) std::swap(i, j);
    p.corrections[{i, j}] = number(f[2]);
  }
  try {
    p.validate();
  } catch (const DataError& e) {
    throw ParseError(e.what());
  }
  return p;
}

std::string serialize_selection_problem(const SelectionProblem& p) {
  std::ostringstream out;
  out << p.size() << "\n";
  auto id = [&](std::size_t i) { return p.ids.empty() ? "u" + std::to_string(i) : p.ids[i]; };
  for (std::size_t i = 0; i < p.size(); ++i) {
    out << id(i) << ' ' << format_double(p.costs[i]) << ' ' << format_double(p.values[i]) << "\n";
  }
  for (const auto& [key, d] : p.corrections) {
    out << id(key.first) << ' ' << id(key.second) << ' ' << format_double(d) << "\n";
  }
  out << "BUDGET " << format_double(p.budget) << "\n"
      << "M " << format_double(p.m) << "\n";
  return out.str();
}

SelectionProblem selection_problem_from(const DeltaTable& table, const UpgradeSet& set,
                                        double budget, double m) {
  SelectionProblem p;
  p.budget = budget;
  p.m = m;
  std::string missing;
  for (std::size_t i = 0; i < set.size(); ++i) {
    p.ids.push_back(set[i].id);
    p.costs.push_back(set[i].cost);
    auto it = table.evaluated.find(singleton(i));
    if (it == table.evaluated.end()) {
      missing += (missing.empty() ? "" : ", ") + set[i].id;
      p.values.push_back(0.0);
    } else {
      p.values.push_back(it->second.delta_vht);
    }
  }
  if (!missing.empty()) throw DataError("delta cache is missing individual subsets: " + missing);
  for (const auto& [key, d] : table.pair_corrections()) p.corrections[key] = d;
  return p;
}

void write_selection(std::ostream& out, const SelectionProblem& problem,
                     const Selection& selection) {
  out << "chosen:";
  for (std::size_t i : selection.chosen) {
    out << ' ' << (problem.ids.empty() ? std::to_string(i) : problem.ids[i]);
  }
  out << "\nspend: " << format_double(selection.spend) << "\n"
      << "estimated_delta_vht: " << format_double(selection.estimated_delta_vht) << "\n"
      << "objective: " << format_double(selection.objective) << "\n";
}

}  // namespace roadplan
