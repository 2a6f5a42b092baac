#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

#include "roadplan/network.hpp"
#include "roadplan/scenario.hpp"

namespace roadplan {

/// Where an upgrade sits: the mean of the midpoints of the links it adds
/// or modifies.
struct UpgradeLocation {
  std::size_t upgrade = 0;
  Point centroid;
};

struct PairDistance {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double distance = 0.0;
};

using PairSet = std::set<PairKey>;

/// Throws DataError listing every endpoint without coordinates.
std::vector<UpgradeLocation> upgrade_locations(const Network& net, const UpgradeSet& set);

/// All N(N-1)/2 Euclidean distances, ascending (ties by index).
std::vector<PairDistance> pairwise_distances(std::span<const UpgradeLocation> locations);
std::vector<PairDistance> pairwise_distances(const Network& net, const UpgradeSet& set);

/// Pairs strictly closer than `threshold`.
PairSet predict_pairs_threshold(std::span<const PairDistance> distances, double threshold);
/// The `count` closest pairs.
PairSet predict_pairs_count(std::span<const PairDistance> distances, std::size_t count);

struct KMeansResult {
  std::vector<int> cluster;  // per point
  std::vector<Point> centers;
  double within_ss = 0.0;
};

/// Lloyd's k-means with k-means++ seeding; best of `restarts` runs by
/// within-cluster sum of squares. Deterministic for a given seed.
KMeansResult kmeans(std::span<const Point> points, int k, int restarts, std::uint64_t seed);

/// Every pair of upgrades that land in the same cluster.
PairSet predict_pairs_clustering(std::span<const UpgradeLocation> locations, int k, int restarts,
                                 std::uint64_t seed);

std::set<SubsetMask> pair_masks(const PairSet& pairs);

/// Lines `id1 id2 distance`, ascending by distance. With `only`, pairs
/// outside it are skipped.
void write_pair_list(std::ostream& out, const UpgradeSet& set,
                     std::span<const PairDistance> distances, const PairSet* only = nullptr);
/// Reads `id1 id2 [distance]` lines; `#` starts a comment.
PairSet read_pair_list(std::istream& in, const UpgradeSet& set);

}  // namespace roadplan
