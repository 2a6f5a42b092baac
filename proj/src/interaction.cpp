#include "roadplan/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "roadplan/error.hpp"

namespace roadplan {

namespace {

double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Uniform double in [0, 1) from the raw engine output, so results do not
// depend on the standard library's distribution implementations.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Point> seed_centers(std::span<const Point> points, int k, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<Point> centers;
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n));
  first = std::min(first, n - 1);
  centers.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double target = unit_draw(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        pick = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    } else {
      // every remaining point coincides with a center
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) rest.push_back(i);
      }
      const auto r = static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(rest.size()));
      pick = rest[std::min(r, rest.size() - 1)];
    }
    chosen[pick] = true;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], points[pick]));
    }
  }
  return centers;
}

KMeansResult lloyd(std::span<const Point> points, std::vector<Point> centers) {
  const std::size_t n = points.size();
  const std::size_t k = centers.size();
  KMeansResult r;
  r.cluster.assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points[i], centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (r.cluster[i] != best) {
        r.cluster[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Point> sum(k);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(r.cluster[i]);
      sum[c].x += points[i].x;
      sum[c].y += points[i].y;
      ++count[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) continue;  // empty cluster keeps its center
      centers[c] = Point{sum[c].x / static_cast<double>(count[c]),
                         sum[c].y / static_cast<double>(count[c])};
    }
  }
  r.centers = std::move(centers);
  for (std::size_t i = 0; i < n; ++i) {
    r.within_ss += squared_distance(points[i], r.centers[static_cast<std::size_t>(r.cluster[i])]);
  }
  return r;
}

}  // namespace

std::vector<UpgradeLocation> upgrade_locations(const Network& net, const UpgradeSet& set) {
  std::set<NodeId> missing;
  std::vector<UpgradeLocation> out;
  auto coord = [&](NodeId n) -> std::optional<Point> {
    auto it = net.coordinates.find(n);
    if (it == net.coordinates.end()) {
      missing.insert(n);
      return std::nullopt;
    }
    return it->second;
  };

  for (std::size_t u = 0; u < set.size(); ++u) {
    std::vector<std::pair<NodeId, NodeId>> ends;
    for (const Link& l : set[u].additions) ends.emplace_back(l.from, l.to);
    for (const LinkModification& m : set[u].modifications) {
      if (find_link(net, m.selector) == kNoLink) {
        throw DataError("upgrade '" + set[u].id + "': no link matches selector " +
                        to_string(m.selector));
      }
      ends.emplace_back(m.selector.from, m.selector.to);
    }
    Point sum;
    for (const auto& [a, b] : ends) {
      const auto pa = coord(a);
      const auto pb = coord(b);
      if (pa && pb) {
        sum.x += 0.5 * (pa->x + pb->x);
        sum.y += 0.5 * (pa->y + pb->y);
      }
    }
    const double count = static_cast<double>(std::max<std::size_t>(1, ends.size()));
    out.push_back(UpgradeLocation{u, Point{sum.x / count, sum.y / count}});
  }
  if (!missing.empty()) {
    std::string list;
    for (NodeId n : missing) list += (list.empty() ? "" : ", ") + std::to_string(n);
    throw DataError("missing coordinates for nodes: " + list);
  }
  return out;
}

std::vector<PairDistance> pairwise_distances(std::span<const UpgradeLocation> locations) {
  std::vector<PairDistance> out;
  for (std::size_t a = 0; a < locations.size(); ++a) {
    for (std::size_t b = a + 1; b < locations.size(); ++b) {
      std::size_t i = locations[a].upgrade;
      std::size_t j = locations[b].upgrade;
      if (i > j) std::swap(i, j);
      out.push_back(PairDistance{
          i, j, std::sqrt(squared_distance(locations[a].centroid, locations[b].centroid))});
    }
  }
  std::sort(out.begin(), out.end(), [](const PairDistance& x, const PairDistance& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  return out;
}

std::vector<PairDistance> pairwise_distances(const Network& net, const UpgradeSet& set) {
  const auto locations = upgrade_locations(net, set);
  return pairwise_distances(locations);
}

PairSet predict_pairs_threshold(std::span<const PairDistance> distances, double threshold) {
  if (threshold < 0.0 || std::isnan(threshold)) throw DataError("threshold must be >= 0");
  PairSet out;
  for (const auto& p : distances) {
    if (p.distance < threshold) out.insert({p.i, p.j});
  }
  return out;
}

PairSet predict_pairs_count(std::span<const PairDistance> distances, std::size_t count) {
  std::vector<PairDistance> sorted(distances.begin(), distances.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PairDistance& x, const PairDistance& y) { return x.distance < y.distance; });
  PairSet out;
  for (std::size_t k = 0; k < std::min(count, sorted.size()); ++k) {
    out.insert({sorted[k].i, sorted[k].j});
  }
  return out;
}

KMeansResult kmeans(std::span<const Point> points, int k, int restarts, std::uint64_t seed) {
  if (points.empty()) return {};
  if (k < 1 || static_cast<std::size_t>(k) > points.size()) {
    throw DataError("k-means needs 1 <= k <= " + std::to_string(points.size()));
  }
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.within_ss = std::numeric_limits<double>::infinity();
  for (int run = 0; run < std::max(1, restarts); ++run) {
    KMeansResult r = lloyd(points, seed_centers(points, k, rng));
    if (r.within_ss < best.within_ss) best = std::move(r);
  }
  return best;
}

PairSet predict_pairs_clustering(std::span<const UpgradeLocation> locations, int k, int restarts,
                                 std::uint64_t seed) {
  std::vector<Point> pts;
  for (const auto& loc : locations) pts.push_back(loc.centroid);
  const KMeansResult r = kmeans(pts, k, restarts, seed);
  PairSet out;
  for (std::size_t a = 0; a < locations.size(); ++a) {
    for (std::size_t b = a + 1; b < locations.size(); ++b) {
      if (r.cluster[a] != r.cluster[b]) continue;
      std::size_t i = locations[a].upgrade;
      std::size_t j = locations[b].upgrade;
      if (i > j) std::swap(i, j);
      out.insert({i, j});
    }
  }
  return out;
}

std::set<SubsetMask> pair_masks(const PairSet& pairs) {
  std::set<SubsetMask> out;
  for (const auto& [i, j] : pairs) out.insert(pair_mask(i, j));
  return out;
}

void write_pair_list(std::ostream& out, const UpgradeSet& set,
                     std::span<const PairDistance> distances, const PairSet* only) {
  for (const auto& p : distances) {
    if (only && only->count({p.i, p.j}) == 0) continue;
    out << set[p.i].id << ' ' << set[p.j].id << ' ' << format_double(p.distance) << "\n";
  }
}

PairSet read_pair_list(std::istream& in, const UpgradeSet& set) {
  PairSet out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string a;
    std::string b;
    if (!(fields >> a)) continue;
    if (!(fields >> b)) throw ParseError("expected 'id1 id2 [distance]'", line_no);
    const auto i = set.index_of(a);
    const auto j = set.index_of(b);
    if (!i) throw ParseError("unknown upgrade id '" + a + "'", line_no);
    if (!j) throw ParseError("unknown upgrade id '" + b + "'", line_no);
    if (*i == *j) throw ParseError("self-pair '" + a + "'", line_no);
    out.insert({std::min(*i, *j), std::max(*i, *j)});
  }
  return out;
}

}  // namespace roadplan
