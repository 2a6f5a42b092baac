#include "roadplan/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "parallel.hpp"
#include "roadplan/error.hpp"

namespace roadplan {

namespace {

std::string mask_string(SubsetMask mask) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i : subset_indices(mask)) {
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

SubsetMask subset_mask(std::span<const std::size_t> indices) {
  SubsetMask m = 0;
  for (std::size_t i : indices) {
    if (i >= kMaxUpgrades) throw DataError("upgrade index exceeds the 64-upgrade limit");
    m |= singleton(i);
  }
  return m;
}

std::vector<std::size_t> subset_indices(SubsetMask mask) {
  std::vector<std::size_t> out;
  while (mask != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

int subset_size(SubsetMask mask) { return std::popcount(mask); }

std::string subset_label(const UpgradeSet& set, SubsetMask mask) {
  std::string out;
  for (std::size_t i : subset_indices(mask)) {
    if (i >= set.size()) throw DataError("subset refers to upgrade index " + std::to_string(i));
    if (!out.empty()) out += ",";
    out += set[i].id;
  }
  return out;
}

SubsetMask parse_subset_label(const UpgradeSet& set, const std::string& label) {
  SubsetMask m = 0;
  std::size_t pos = 0;
  while (pos <= label.size()) {
    const auto comma = label.find(',', pos);
    const std::string id = label.substr(pos, comma == std::string::npos ? label.npos : comma - pos);
    if (!id.empty()) {
      const auto idx = set.index_of(id);
      if (!idx) throw DataError("unknown upgrade id '" + id + "'");
      m |= singleton(*idx);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return m;
}

std::vector<SubsetMask> individual_subsets(std::size_t n) {
  std::vector<SubsetMask> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(singleton(i));
  return out;
}

std::vector<SubsetMask> all_pair_subsets(std::size_t n) {
  std::vector<SubsetMask> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) out.push_back(pair_mask(i, j));
  }
  return out;
}

std::vector<SubsetMask> subsets_up_to(std::size_t n, int max_size) {
  if (n > 30) throw DataError("subset enumeration limited to 30 upgrades");
  std::vector<SubsetMask> out;
  for (SubsetMask m = 1; m < (SubsetMask{1} << n); ++m) {
    if (subset_size(m) <= max_size) out.push_back(m);
  }
  std::stable_sort(out.begin(), out.end(), [](SubsetMask a, SubsetMask b) {
    return subset_size(a) < subset_size(b);
  });
  return out;
}

double DeltaTable::delta(SubsetMask s) const {
  auto it = evaluated.find(s);
  if (it == evaluated.end()) throw DataError("subset " + mask_string(s) + " has not been evaluated");
  return it->second.delta_vht;
}

std::map<std::size_t, double> DeltaTable::singles() const {
  std::map<std::size_t, double> out;
  for (const auto& [mask, ev] : evaluated) {
    if (subset_size(mask) == 1) out[subset_indices(mask).front()] = ev.delta_vht;
  }
  return out;
}

std::map<PairKey, double> DeltaTable::pair_corrections() const {
  std::map<PairKey, double> out;
  for (const auto& [mask, ev] : evaluated) {
    if (subset_size(mask) != 2) continue;
    const auto idx = subset_indices(mask);
    auto vi = evaluated.find(singleton(idx[0]));
    auto vj = evaluated.find(singleton(idx[1]));
    if (vi == evaluated.end() || vj == evaluated.end()) continue;
    out[{idx[0], idx[1]}] = ev.delta_vht - (vi->second.delta_vht + vj->second.delta_vht);
  }
  return out;
}

std::size_t extend_deltas(DeltaTable& table, const Network& net, const DemandMatrix& demand,
                          const UpgradeSet& set, std::span<const SubsetMask> subsets,
                          const SolverSettings& settings, int subset_workers) {
  if (set.size() > kMaxUpgrades) throw DataError("at most 64 upgrades are supported");
  if (table.has_baseline && table.upgrade_count != set.size()) {
    throw DataError("delta table was built for a different upgrade set");
  }
  table.upgrade_count = set.size();
  const SubsetMask universe =
      set.size() == kMaxUpgrades ? ~SubsetMask{0} : (SubsetMask{1} << set.size()) - 1;

  std::size_t solves = 0;
  if (!table.has_baseline) {
    try {
      const Assignment base = solve_ue(net, demand, settings);
      table.baseline_vht = base.vht;
      table.baseline_gap = base.relative_gap;
      table.has_baseline = true;
      ++solves;
    } catch (const SolverError& e) {
      throw SolverError(std::string("baseline: ") + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string("baseline: ") + e.what());
    }
  }

  std::vector<SubsetMask> todo;
  for (SubsetMask s : subsets) {
    if (s == 0) continue;
    if ((s & ~universe) != 0) throw DataError("subset " + mask_string(s) + " exceeds upgrade set");
    if (!table.contains(s) && std::find(todo.begin(), todo.end(), s) == todo.end()) {
      todo.push_back(s);
    }
  }

  std::vector<Assignment> results(todo.size());
  detail::WorkerPool pool(subset_workers);
  pool.run(todo.size(), [&](std::size_t k, int) {
    const SubsetMask s = todo[k];
    try {
      const auto idx = subset_indices(s);
      const Network modified = apply_upgrades(net, set, idx);
      results[k] = solve_ue(modified, demand, settings);
    } catch (const SolverError& e) {
      throw SolverError("subset " + subset_label(set, s) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("subset " + subset_label(set, s) + ": " + e.what());
    }
  });
  for (std::size_t k = 0; k < todo.size(); ++k) {
    table.evaluated[todo[k]] =
        EvaluatedSubset{table.baseline_vht - results[k].vht, results[k].relative_gap};
  }
  return solves + todo.size();
}

DeltaTable compute_deltas(const Network& net, const DemandMatrix& demand, const UpgradeSet& set,
                          std::span<const SubsetMask> subsets, const SolverSettings& settings,
                          int subset_workers) {
  DeltaTable table;
  extend_deltas(table, net, demand, set, subsets, settings, subset_workers);
  return table;
}

CoefficientMap interaction_coefficients(const std::map<SubsetMask, double>& deltas,
                                        int max_order) {
  std::vector<SubsetMask> order;
  for (const auto& [mask, d] : deltas) {
    if (mask != 0 && subset_size(mask) <= max_order) order.push_back(mask);
  }
  std::stable_sort(order.begin(), order.end(), [](SubsetMask a, SubsetMask b) {
    return subset_size(a) < subset_size(b);
  });

  CoefficientMap e;
  for (SubsetMask w : order) {
    double value = deltas.at(w);
    for (SubsetMask v = (w - 1) & w; v != 0; v = (v - 1) & w) {
      auto it = e.find(v);
      if (it == e.end()) {
        throw DataError("missing prerequisite subset " + mask_string(v) + " for " +
                        mask_string(w));
      }
      value -= it->second;
    }
    e[w] = value;
  }
  return e;
}

CoefficientMap interaction_coefficients(const DeltaTable& table, int max_order) {
  std::map<SubsetMask, double> deltas;
  for (const auto& [mask, ev] : table.evaluated) deltas[mask] = ev.delta_vht;
  return interaction_coefficients(deltas, max_order);
}

double estimate_delta(const CoefficientMap& coefficients, SubsetMask s, int order) {
  double sum = 0.0;
  for (const auto& [w, e] : coefficients) {
    if ((w & ~s) == 0 && subset_size(w) <= order) sum += e;
  }
  return sum;
}

double estimate_delta(const DeltaTable& table, SubsetMask s, int order) {
  std::map<SubsetMask, double> deltas;
  for (const auto& [mask, ev] : table.evaluated) {
    if ((mask & ~s) == 0) deltas[mask] = ev.delta_vht;
  }
  return estimate_delta(interaction_coefficients(deltas, order), s, order);
}

RelativeError relative_error(const CoefficientMap& coefficients, const DeltaTable& table,
                             SubsetMask s, int order) {
  const double exact = table.delta(s);
  if (exact == 0.0) {
    throw DataError("relative error undefined: dVHT is zero for subset " + mask_string(s));
  }
  const double est = estimate_delta(coefficients, s, order);
  return RelativeError{std::abs(est - exact) / std::abs(exact), exact < 0.0};
}

RelativeError relative_error(const DeltaTable& table, SubsetMask s, int order) {
  const double exact = table.delta(s);
  if (exact == 0.0) {
    throw DataError("relative error undefined: dVHT is zero for subset " + mask_string(s));
  }
  const double est = estimate_delta(table, s, order);
  return RelativeError{std::abs(est - exact) / std::abs(exact), exact < 0.0};
}

std::vector<ErrorReportRow> error_report(const DeltaTable& table,
                                         std::span<const ErrorRowSpec> rows) {
  std::vector<SubsetMask> targets;
  std::size_t negative = 0;
  for (const auto& [mask, ev] : table.evaluated) {
    if (subset_size(mask) >= 3 && ev.delta_vht != 0.0) {
      targets.push_back(mask);
      if (ev.delta_vht < 0.0) ++negative;
    }
  }

  std::vector<ErrorReportRow> out;
  for (const ErrorRowSpec& spec : rows) {
    std::map<SubsetMask, double> available;
    for (const auto& [mask, ev] : table.evaluated) {
      const int size = subset_size(mask);
      if (size > spec.max_order) continue;
      if (size == 2 && spec.allowed_pairs && spec.allowed_pairs->count(mask) == 0) continue;
      available[mask] = ev.delta_vht;
    }
    const CoefficientMap coeffs = interaction_coefficients(available, spec.max_order);

    ErrorReportRow row;
    row.label = spec.label;
    row.computations = available.size();
    row.targets = targets.size();
    row.negative_targets = negative;
    double sum = 0.0;
    for (SubsetMask s : targets) {
      const double err = relative_error(coeffs, table, s, spec.max_order).value;
      sum += err;
      if (err > 0.10) ++row.count_above_10_percent;
    }
    row.mean_error_percent = targets.empty() ? 0.0 : 100.0 * sum / static_cast<double>(targets.size());
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ErrorReportRow> error_report(const DeltaTable& table, std::span<const int> orders) {
  std::vector<ErrorRowSpec> specs;
  for (int k : orders) {
    std::string label = k == 1   ? "individual only"
                        : k == 2 ? "all pairwise"
                                 : "all subsets size <= " + std::to_string(k);
    specs.push_back(ErrorRowSpec{label, k, std::nullopt});
  }
  return error_report(table, specs);
}

void write_error_report(std::ostream& out, std::span<const ErrorReportRow> rows) {
  out << std::left << std::setw(28) << "Data used" << std::right << std::setw(16)
      << "dVHT computations" << std::setw(16) << "Mean Error %" << std::setw(18)
      << "Num Error > 10%" << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(28) << r.label << std::right << std::setw(16) << r.computations
        << std::setw(16) << std::setprecision(4) << r.mean_error_percent << std::setw(18)
        << r.count_above_10_percent << "\n";
  }
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CacheKey make_cache_key(const Network& net, const DemandMatrix& demand, const UpgradeSet& set,
                        double target_gap) {
  return CacheKey{fnv1a64(serialize_network(net)), fnv1a64(serialize_demand(demand)),
                  fnv1a64(serialize_upgrades(set)), target_gap};
}

void write_delta_cache(std::ostream& out, const CacheKey& key, const UpgradeSet& set,
                       const DeltaTable& table) {
  out << "# roadplan delta cache v1\n"
      << "# network " << hex64(key.network_hash) << "\n"
      << "# demand " << hex64(key.demand_hash) << "\n"
      << "# upgrades " << hex64(key.upgrades_hash) << "\n"
      << "# gap " << format_double(key.target_gap) << "\n";
  if (table.has_baseline) {
    out << "# baseline " << format_double(table.baseline_vht) << ' '
        << format_double(table.baseline_gap) << "\n";
  }
  // ascending size, then mask, so the file reads singles, pairs, ...
  std::vector<SubsetMask> order;
  for (const auto& [mask, ev] : table.evaluated) order.push_back(mask);
  std::stable_sort(order.begin(), order.end(), [](SubsetMask a, SubsetMask b) {
    return subset_size(a) < subset_size(b);
  });
  for (SubsetMask m : order) {
    const auto& ev = table.evaluated.at(m);
    out << subset_label(set, m) << ' ' << format_double(ev.delta_vht) << ' '
        << format_double(ev.relative_gap) << "\n";
  }
}

std::pair<CacheKey, DeltaTable> read_delta_cache(std::istream& in, const UpgradeSet& set) {
  CacheKey key;
  DeltaTable table;
  table.upgrade_count = set.size();
  std::string line;
  int line_no = 0;
  bool saw_magic = false;
  auto parse_hex = [&](const std::string& s) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &used, 16);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ParseError("malformed hash '" + s + "'", line_no);
    return v;
  };
  auto parse_num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ParseError("malformed number '" + s + "'", line_no);
    return v;
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first == "#") {
      std::string tag;
      fields >> tag;
      std::string a;
      std::string b;
      fields >> a >> b;
      if (tag == "roadplan") {
        saw_magic = true;
      } else if (tag == "network") {
        key.network_hash = parse_hex(a);
      } else if (tag == "demand") {
        key.demand_hash = parse_hex(a);
      } else if (tag == "upgrades") {
        key.upgrades_hash = parse_hex(a);
      } else if (tag == "gap") {
        key.target_gap = parse_num(a);
      } else if (tag == "baseline") {
        table.baseline_vht = parse_num(a);
        table.baseline_gap = parse_num(b);
        table.has_baseline = true;
      }
      continue;
    }
    std::string delta;
    std::string gap;
    if (!(fields >> delta >> gap)) throw ParseError("expected '<ids> <delta_vht> <gap>'", line_no);
    SubsetMask m = 0;
    try {
      m = parse_subset_label(set, first);
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (m == 0) throw ParseError("empty subset row", line_no);
    table.evaluated[m] = EvaluatedSubset{parse_num(delta), parse_num(gap)};
  }
  if (!saw_magic) throw ParseError("not a roadplan delta cache");
  return {key, table};
}

}  // namespace roadplan
