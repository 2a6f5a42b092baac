#include "roadplan/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>
#include <string_view>

#include "roadplan/error.hpp"

namespace roadplan {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

double require_double(std::string_view s, const char* field, int line) {
  auto v = to_double(s);
  if (!v || !std::isfinite(*v)) {
    throw ParseError("non-numeric " + std::string(field) + " '" + std::string(s) + "'", line);
  }
  return *v;
}

NodeId require_node(std::string_view s, const char* field, int line) {
  auto v = to_integer(s);
  if (!v) {
    // TNTP files occasionally write integral node ids as "12.0".
    auto d = to_double(s);
    if (d && *d == std::floor(*d)) v = static_cast<long long>(*d);
  }
  if (!v || *v < 1 || *v > std::numeric_limits<NodeId>::max()) {
    throw ParseError("invalid " + std::string(field) + " '" + std::string(s) + "'", line);
  }
  return static_cast<NodeId>(*v);
}

void check_link(const Link& l, int line) {
  if (!(l.capacity > 0.0)) throw ParseError("link capacity must be positive", line);
  if (l.free_flow_time < 0.0) throw ParseError("free flow time must be non-negative", line);
  if (l.alpha < 0.0) throw ParseError("BPR alpha must be non-negative", line);
  if (l.beta < 0.0) throw ParseError("BPR beta must be non-negative", line);
}

struct Metadata {
  std::map<std::string, std::string> tags;
  int lines_consumed = 0;
};

// Reads `<TAG> value` lines up to and including <END OF METADATA>.
Metadata read_metadata(std::istream& in, int& line_no) {
  Metadata md;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '~') continue;
    if (line.front() != '<') throw ParseError("expected metadata tag", line_no);
    const auto close = line.find('>');
    if (close == std::string_view::npos) throw ParseError("malformed metadata tag", line_no);
    std::string tag(trim(line.substr(1, close - 1)));
    if (tag == "END OF METADATA") return md;
    md.tags[tag] = std::string(trim(line.substr(close + 1)));
  }
  throw ParseError("missing <END OF METADATA>", line_no);
}

std::optional<long long> int_tag(const Metadata& md, const std::string& tag) {
  auto it = md.tags.find(tag);
  if (it == md.tags.end()) return std::nullopt;
  auto v = to_integer(it->second);
  if (!v) {
    auto d = to_double(it->second);
    if (d && *d == std::floor(*d)) v = static_cast<long long>(*d);
  }
  if (!v || *v < 0) throw ParseError("malformed value for <" + tag + ">: '" + it->second + "'");
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  return in;
}

template <typename Fn>
auto with_file_context(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Network

void Network::validate() const {
  if (node_count < 0 || zone_count < 0 || zone_count > node_count) {
    throw DataError("inconsistent node/zone counts");
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    if (!has_node(l.from) || !has_node(l.to)) {
      throw DataError("link " + std::to_string(i) + " has an endpoint outside 1.." +
                      std::to_string(node_count));
    }
    if (!(l.capacity > 0.0) || l.free_flow_time < 0.0 || l.alpha < 0.0 || l.beta < 0.0) {
      throw DataError("link " + std::to_string(i) + " violates BPR parameter bounds");
    }
  }
}

std::string to_string(const LinkSelector& sel) {
  return std::to_string(sel.from) + "->" + std::to_string(sel.to) + "[" +
         std::to_string(sel.parallel_index) + "]";
}

LinkIndex find_link(const Network& net, const LinkSelector& sel) {
  int seen = 0;
  for (std::size_t i = 0; i < net.links.size(); ++i) {
    const Link& l = net.links[i];
    if (l.from == sel.from && l.to == sel.to) {
      if (seen == sel.parallel_index) return static_cast<LinkIndex>(i);
      ++seen;
    }
  }
  return kNoLink;
}

Network parse_network(std::istream& in) {
  int line_no = 0;
  const Metadata md = read_metadata(in, line_no);

  Network net;
  const auto zones = int_tag(md, "NUMBER OF ZONES");
  const auto nodes = int_tag(md, "NUMBER OF NODES");
  const auto first_thru = int_tag(md, "FIRST THRU NODE");
  const auto declared_links = int_tag(md, "NUMBER OF LINKS");

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '~') continue;
    if (const auto semi = line.find(';'); semi != std::string_view::npos) {
      line = line.substr(0, semi);
    }
    const auto f = split_ws(line);
    if (f.size() < 7) throw ParseError("link row needs at least 7 fields", line_no);
    Link l;
    l.from = require_node(f[0], "init_node", line_no);
    l.to = require_node(f[1], "term_node", line_no);
    l.capacity = require_double(f[2], "capacity", line_no);
    l.length = require_double(f[3], "length", line_no);
    l.free_flow_time = require_double(f[4], "free_flow_time", line_no);
    l.alpha = require_double(f[5], "B", line_no);
    l.beta = require_double(f[6], "power", line_no);
    // speed, toll and link_type are read for well-formedness only
    for (std::size_t k = 7; k < f.size(); ++k) require_double(f[k], "field", line_no);
    check_link(l, line_no);
    net.links.push_back(l);
  }

  if (declared_links && static_cast<std::size_t>(*declared_links) != net.links.size()) {
    throw ParseError("<NUMBER OF LINKS> declares " + std::to_string(*declared_links) +
                         " links but " + std::to_string(net.links.size()) + " were read",
                     line_no);
  }

  NodeId max_node = 0;
  for (const Link& l : net.links) max_node = std::max({max_node, l.from, l.to});
  net.node_count = nodes ? static_cast<int>(*nodes) : max_node;
  if (max_node > net.node_count) {
    throw ParseError("link endpoint " + std::to_string(max_node) + " exceeds <NUMBER OF NODES>");
  }
  net.zone_count = zones ? static_cast<int>(*zones) : 0;
  if (net.zone_count > net.node_count) throw ParseError("more zones than nodes");
  net.first_thru_node = first_thru ? static_cast<NodeId>(*first_thru) : 1;
  return net;
}

std::map<NodeId, Point> parse_nodes(std::istream& in) {
  std::map<NodeId, Point> coords;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '~' || line.front() == '<') continue;
    if (const auto semi = line.find(';'); semi != std::string_view::npos) {
      line = line.substr(0, semi);
    }
    const auto f = split_ws(line);
    if (f.empty()) continue;
    // header row ("node x y")
    if (!to_double(f[0])) {
      if (coords.empty()) continue;
      throw ParseError("non-numeric node id '" + std::string(f[0]) + "'", line_no);
    }
    if (f.size() < 3) throw ParseError("node row needs node, x, y", line_no);
    const NodeId id = require_node(f[0], "node", line_no);
    coords[id] = Point{require_double(f[1], "x", line_no), require_double(f[2], "y", line_no)};
  }
  return coords;
}

// ---------------------------------------------------------------------------
// Demand

void DemandMatrix::set(NodeId origin, NodeId destination, double trips) {
  if (!std::isfinite(trips) || trips < 0.0) {
    throw DataError("invalid demand " + format_double(trips) + " for O-D pair (" +
                    std::to_string(origin) + ", " + std::to_string(destination) + ")");
  }
  if (trips == 0.0) {
    entries_.erase({origin, destination});
  } else {
    entries_[{origin, destination}] = trips;
  }
}

double DemandMatrix::get(NodeId origin, NodeId destination) const {
  auto it = entries_.find({origin, destination});
  return it == entries_.end() ? 0.0 : it->second;
}

double DemandMatrix::total() const {
  double sum = 0.0;
  for (const auto& [od, q] : entries_) sum += q;
  return sum;
}

std::vector<OriginDemand> DemandMatrix::by_origin() const {
  std::vector<OriginDemand> out;
  for (const auto& [od, q] : entries_) {
    if (out.empty() || out.back().origin != od.first) out.push_back(OriginDemand{od.first, {}, 0.0});
    out.back().entries.push_back(DemandEntry{od.second, q});
    out.back().total += q;
  }
  return out;
}

DemandMatrix parse_demand(std::istream& in) {
  int line_no = 0;
  const Metadata md = read_metadata(in, line_no);
  const auto zones = int_tag(md, "NUMBER OF ZONES");
  std::optional<double> declared_total;
  if (auto it = md.tags.find("TOTAL OD FLOW"); it != md.tags.end()) {
    declared_total = to_double(it->second);
    if (!declared_total) throw ParseError("malformed value for <TOTAL OD FLOW>");
  }

  DemandMatrix demand(zones ? static_cast<int>(*zones) : 0);
  auto check_zone = [&](NodeId n) {
    if (zones && n > *zones) {
      throw ParseError("node " + std::to_string(n) + " exceeds <NUMBER OF ZONES> " +
                           std::to_string(*zones),
                       line_no);
    }
  };

  std::optional<NodeId> origin;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '~') continue;
    if (line.starts_with("Origin")) {
      const auto f = split_ws(line);
      if (f.size() != 2) throw ParseError("expected 'Origin <node>'", line_no);
      origin = require_node(f[1], "origin", line_no);
      check_zone(*origin);
      continue;
    }
    if (!origin) throw ParseError("destination entries before any Origin block", line_no);
    std::size_t pos = 0;
    while (pos < line.size()) {
      auto semi = line.find(';', pos);
      auto item = trim(line.substr(pos, semi == std::string_view::npos ? line.npos : semi - pos));
      pos = semi == std::string_view::npos ? line.size() : semi + 1;
      if (item.empty()) continue;
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected 'dest : flow'", line_no);
      const NodeId dest = require_node(trim(item.substr(0, colon)), "destination", line_no);
      check_zone(dest);
      const double q = require_double(trim(item.substr(colon + 1)), "flow", line_no);
      if (q < 0.0) throw ParseError("negative flow for destination " + std::to_string(dest), line_no);
      if (q > 0.0) demand.set(*origin, dest, demand.get(*origin, dest) + q);
    }
  }

  if (declared_total) {
    const double total = demand.total();
    if (std::abs(total - *declared_total) > 1e-6 * std::max(1.0, std::abs(*declared_total))) {
      throw ParseError("<TOTAL OD FLOW> is " + format_double(*declared_total) +
                       " but entries sum to " + format_double(total));
    }
  }
  return demand;
}

// ---------------------------------------------------------------------------
// Upgrades

std::string to_string(UpgradeKind kind) {
  return kind == UpgradeKind::kNewRoad ? "new-road" : "capacity-upgrade";
}

std::optional<std::size_t> UpgradeSet::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < upgrades.size(); ++i) {
    if (upgrades[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<double> UpgradeSet::costs() const {
  std::vector<double> c;
  c.reserve(upgrades.size());
  for (const auto& u : upgrades) c.push_back(u.cost);
  return c;
}

UpgradeSet parse_upgrades(std::istream& in, const Network* net) {
  UpgradeSet set;
  std::set<std::string> ids;
  std::vector<int> header_lines;
  std::string raw;
  int line_no = 0;

  auto finish_project = [&](int line) {
    if (set.upgrades.empty()) return;
    const Upgrade& u = set.upgrades.back();
    if (u.additions.empty() && u.modifications.empty()) {
      throw ParseError("project '" + u.id + "' has no ADD or MOD lines", line);
    }
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto f = split_ws(trim(line));
    if (f.empty()) continue;

    if (f[0] == "PROJECT") {
      finish_project(header_lines.empty() ? line_no : header_lines.back());
      if (f.size() != 4) throw ParseError("expected 'PROJECT <id> <cost> <kind>'", line_no);
      Upgrade u;
      u.id = std::string(f[1]);
      if (!ids.insert(u.id).second) throw ParseError("duplicate project id '" + u.id + "'", line_no);
      u.cost = require_double(f[2], "cost", line_no);
      if (u.cost < 0.0) throw ParseError("negative cost for project '" + u.id + "'", line_no);
      if (f[3] == "capacity-upgrade") {
        u.kind = UpgradeKind::kCapacityUpgrade;
      } else if (f[3] == "new-road") {
        u.kind = UpgradeKind::kNewRoad;
      } else {
        throw ParseError("unknown project kind '" + std::string(f[3]) + "'", line_no);
      }
      set.upgrades.push_back(std::move(u));
      header_lines.push_back(line_no);
      continue;
    }

    if (set.upgrades.empty()) throw ParseError("edit line before any PROJECT", line_no);
    Upgrade& u = set.upgrades.back();

    if (f[0] == "ADD") {
      if (f.size() != 8) {
        throw ParseError("expected 'ADD <from> <to> <capacity> <length> <fftime> <alpha> <beta>'",
                         line_no);
      }
      Link l;
      l.from = require_node(f[1], "from", line_no);
      l.to = require_node(f[2], "to", line_no);
      l.capacity = require_double(f[3], "capacity", line_no);
      l.length = require_double(f[4], "length", line_no);
      l.free_flow_time = require_double(f[5], "fftime", line_no);
      l.alpha = require_double(f[6], "alpha", line_no);
      l.beta = require_double(f[7], "beta", line_no);
      check_link(l, line_no);
      u.additions.push_back(l);
    } else if (f[0] == "MOD") {
      if (f.size() < 4) throw ParseError("expected 'MOD <from> <to> [index] CAPACITY=<v>'", line_no);
      LinkModification mod;
      mod.selector.from = require_node(f[1], "from", line_no);
      mod.selector.to = require_node(f[2], "to", line_no);
      std::size_t k = 3;
      if (f[k].find('=') == std::string_view::npos) {
        const auto idx = to_integer(f[k]);
        if (!idx || *idx < 0) throw ParseError("invalid parallel link index", line_no);
        mod.selector.parallel_index = static_cast<int>(*idx);
        ++k;
      }
      std::optional<double> capacity;
      for (; k < f.size(); ++k) {
        const auto eq = f[k].find('=');
        if (eq == std::string_view::npos) throw ParseError("expected KEY=value", line_no);
        const auto key = f[k].substr(0, eq);
        const double v = require_double(f[k].substr(eq + 1), "modification value", line_no);
        if (key == "CAPACITY") {
          if (!(v > 0.0)) throw ParseError("CAPACITY must be positive", line_no);
          capacity = v;
        } else if (key == "FFTIME") {
          if (v < 0.0) throw ParseError("FFTIME must be non-negative", line_no);
          mod.free_flow_time = v;
        } else {
          throw ParseError("unknown modification key '" + std::string(key) + "'", line_no);
        }
      }
      if (!capacity) throw ParseError("MOD requires CAPACITY=<v>", line_no);
      mod.capacity = *capacity;
      if (net && find_link(*net, mod.selector) == kNoLink) {
        throw ParseError("MOD in project '" + u.id + "' targets missing link " +
                             to_string(mod.selector),
                         line_no);
      }
      u.modifications.push_back(mod);
    } else {
      throw ParseError("unknown directive '" + std::string(f[0]) + "'", line_no);
    }
  }
  finish_project(header_lines.empty() ? line_no : header_lines.back());
  if (set.upgrades.empty()) throw ParseError("upgrade file contains no projects");
  return set;
}

std::vector<ScaleRule> parse_scale_rules(std::istream& in) {
  std::vector<ScaleRule> rules;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto f = split_ws(trim(line));
    if (f.empty()) continue;
    if (f[0] != "SCALE" || f.size() != 3) {
      throw ParseError("expected 'SCALE <zone,zone,...> <factor>'", line_no);
    }
    ScaleRule rule;
    std::string_view zones = f[1];
    while (!zones.empty()) {
      const auto comma = zones.find(',');
      rule.zones.push_back(require_node(zones.substr(0, comma), "zone", line_no));
      zones = comma == std::string_view::npos ? std::string_view{} : zones.substr(comma + 1);
    }
    rule.factor = require_double(f[2], "factor", line_no);
    if (rule.factor < 0.0) throw ParseError("negative scale factor", line_no);
    rules.push_back(std::move(rule));
  }
  return rules;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_network(const Network& net) {
  std::ostringstream out;
  out << "<NUMBER OF ZONES> " << net.zone_count << "\n"
      << "<NUMBER OF NODES> " << net.node_count << "\n"
      << "<FIRST THRU NODE> " << net.first_thru_node << "\n"
      << "<NUMBER OF LINKS> " << net.links.size() << "\n"
      << "<END OF METADATA>\n\n"
      << "~\tinit_node\tterm_node\tcapacity\tlength\tfree_flow_time\tb\tpower\tspeed\ttoll\tlink_type\t;\n";
  for (const Link& l : net.links) {
    out << '\t' << l.from << '\t' << l.to << '\t' << format_double(l.capacity) << '\t'
        << format_double(l.length) << '\t' << format_double(l.free_flow_time) << '\t'
        << format_double(l.alpha) << '\t' << format_double(l.beta) << "\t0\t0\t1\t;\n";
  }
  return out.str();
}

std::string serialize_nodes(const Network& net) {
  std::ostringstream out;
  out << "node\tX\tY\t;\n";
  for (const auto& [id, p] : net.coordinates) {
    out << id << '\t' << format_double(p.x) << '\t' << format_double(p.y) << "\t;\n";
  }
  return out.str();
}

std::string serialize_demand(const DemandMatrix& demand) {
  std::ostringstream out;
  out << "<NUMBER OF ZONES> " << demand.zone_count() << "\n"
      << "<TOTAL OD FLOW> " << format_double(demand.total()) << "\n"
      << "<END OF METADATA>\n\n";
  for (const auto& od : demand.by_origin()) {
    out << "\nOrigin " << od.origin << "\n";
    int col = 0;
    for (const auto& e : od.entries) {
      out << "  " << e.destination << " : " << format_double(e.trips) << ";";
      if (++col % 5 == 0) out << "\n";
    }
    if (col % 5 != 0) out << "\n";
  }
  return out.str();
}

std::string serialize_upgrades(const UpgradeSet& set) {
  std::ostringstream out;
  for (const Upgrade& u : set.upgrades) {
    out << "PROJECT " << u.id << ' ' << format_double(u.cost) << ' ' << to_string(u.kind) << "\n";
    for (const Link& l : u.additions) {
      out << "  ADD " << l.from << ' ' << l.to << ' ' << format_double(l.capacity) << ' '
          << format_double(l.length) << ' ' << format_double(l.free_flow_time) << ' '
          << format_double(l.alpha) << ' ' << format_double(l.beta) << "\n";
    }
    for (const LinkModification& m : u.modifications) {
      out << "  MOD " << m.selector.from << ' ' << m.selector.to << ' '
          << m.selector.parallel_index << " CAPACITY=" << format_double(m.capacity);
      if (m.free_flow_time) out << " FFTIME=" << format_double(*m.free_flow_time);
      out << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Files

Network read_network(const std::filesystem::path& path) {
  auto in = open_input(path);
  return with_file_context(path, [&] { return parse_network(in); });
}

std::map<NodeId, Point> read_nodes(const std::filesystem::path& path) {
  auto in = open_input(path);
  return with_file_context(path, [&] { return parse_nodes(in); });
}

DemandMatrix read_demand(const std::filesystem::path& path) {
  auto in = open_input(path);
  return with_file_context(path, [&] { return parse_demand(in); });
}

UpgradeSet read_upgrades(const std::filesystem::path& path, const Network* net) {
  auto in = open_input(path);
  return with_file_context(path, [&] { return parse_upgrades(in, net); });
}

std::vector<ScaleRule> read_scale_rules(const std::filesystem::path& path) {
  auto in = open_input(path);
  return with_file_context(path, [&] { return parse_scale_rules(in); });
}

// ---------------------------------------------------------------------------
// Edits

Network apply_upgrades(const Network& net, const UpgradeSet& set,
                       std::span<const std::size_t> selected) {
  std::vector<std::size_t> order(selected.begin(), selected.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  Network out = net;
  std::map<LinkIndex, std::size_t> touched;  // link -> upgrade that modified it
  for (std::size_t idx : order) {
    if (idx >= set.size()) {
      throw DataError("upgrade index " + std::to_string(idx) + " out of range (set has " +
                      std::to_string(set.size()) + ")");
    }
    const Upgrade& u = set[idx];
    for (const LinkModification& mod : u.modifications) {
      const LinkIndex li = find_link(net, mod.selector);
      if (li == kNoLink) {
        throw DataError("upgrade '" + u.id + "': no link matches selector " +
                        to_string(mod.selector));
      }
      if (auto [it, fresh] = touched.emplace(li, idx); !fresh) {
        throw DataError("upgrades '" + set[it->second].id + "' and '" + u.id +
                        "' both modify link " + to_string(mod.selector));
      }
      Link& l = out.links[static_cast<std::size_t>(li)];
      l.capacity = mod.capacity;
      if (mod.free_flow_time) l.free_flow_time = *mod.free_flow_time;
    }
  }
  for (std::size_t idx : order) {
    for (const Link& l : set[idx].additions) {
      out.links.push_back(l);
      out.node_count = std::max({out.node_count, l.from, l.to});
    }
  }
  return out;
}

DemandMatrix scaled_demand(const DemandMatrix& base, std::span<const ScaleRule> rules,
                           int period) {
  if (period < 1) throw DataError("period must be >= 1");
  DemandMatrix out(base.zone_count());
  const int steps = period - 1;
  for (const auto& [od, q] : base.entries()) {
    double factor = 1.0;
    for (const ScaleRule& rule : rules) {
      const bool hit = std::find(rule.zones.begin(), rule.zones.end(), od.first) != rule.zones.end() ||
                       std::find(rule.zones.begin(), rule.zones.end(), od.second) != rule.zones.end();
      if (hit) factor *= std::pow(rule.factor, steps);
    }
    out.set(od.first, od.second, q * factor);
  }
  return out;
}

}  // namespace roadplan
