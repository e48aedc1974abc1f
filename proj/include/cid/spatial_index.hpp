#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "cid/common.hpp"

namespace cid {

struct Neighbor {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t index = npos;
  double squared_distance = std::numeric_limits<double>::infinity();

  double distance() const { return std::sqrt(squared_distance); }
  bool valid() const { return index != npos; }
};

/// Exact nearest-neighbor index over a fixed point set (k-d tree with
/// bounding boxes per node). Immutable after construction, so concurrent
/// queries are safe.
///
/// Distances are evaluated with the same expression as a linear scan and
/// pruning only discards boxes that are strictly farther than the current
/// best, so query results are bit-identical to a brute-force minimum.
/// Clouds with fewer than kLinearScanBelow points are kept in a single leaf.
template <int D>
class KdTree {
 public:
  static constexpr std::size_t kLinearScanBelow = 64;
  static constexpr std::size_t kLeafSize = 12;

  explicit KdTree(std::span<const Point<D>> points)
      : points_(points.begin(), points.end()) {
    if (points_.empty()) throw InvalidInput("cannot index an empty point set");
    for (const auto& p : points_)
      if (!is_finite<D>(p)) throw InvalidInput("cannot index a non-finite point");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    const std::size_t leaf =
        points_.size() < kLinearScanBelow ? points_.size() : kLeafSize;
    build(0, static_cast<std::uint32_t>(points_.size()), leaf);
    packed_.reserve(points_.size());
    for (std::uint32_t i : order_) packed_.push_back(points_[i]);
  }

  explicit KdTree(const PointCloud<D>& cloud) : KdTree(std::span<const Point<D>>(cloud.points)) {}

  std::size_t size() const noexcept { return points_.size(); }
  const Point<D>& point(std::size_t i) const { return points_[i]; }
  const std::vector<Point<D>>& points() const noexcept { return points_; }

  /// Exact nearest neighbor; equal distances resolve to the lowest index.
  Neighbor nearest(const Point<D>& q) const {
    Neighbor best;
    search(0, q, best, -1.0);
    return best;
  }

  /// Nearest-neighbor search that may stop early once any point within
  /// `radius` is found. If the returned distance exceeds `radius` it is the
  /// exact nearest distance; otherwise it is only an upper bound known to be
  /// <= radius. `hint` seeds the search with a known candidate.
  Neighbor nearest_unless_within(const Point<D>& q, double radius, Neighbor hint = {}) const {
    if (hint.valid() && hint.distance() <= radius) return hint;
    search(0, q, hint, radius);
    return hint;
  }

 private:
  struct Node {
    Point<D> lo;
    Point<D> hi;
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = node.hi = points_[order_[begin]];
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      const auto& p = points_[order_[i]];
      for (int k = 0; k < D; ++k) {
        node.lo[k] = std::min(node.lo[k], p[k]);
        node.hi[k] = std::max(node.hi[k], p[k]);
      }
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= leaf) return id;

    int axis = 0;
    for (int k = 1; k < D; ++k)
      if (node.hi[k] - node.lo[k] > node.hi[axis] - node.lo[axis]) axis = k;
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return points_[a][axis] < points_[b][axis] ||
                              (points_[a][axis] == points_[b][axis] && a < b);
                     });
    const std::int32_t left = build(begin, mid, leaf);
    const std::int32_t right = build(mid, end, leaf);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  static double box_squared_distance(const Node& n, const Point<D>& q) {
    double s = 0.0;
    for (int k = 0; k < D; ++k) {
      double gap = 0.0;
      if (q[k] < n.lo[k]) gap = n.lo[k] - q[k];
      else if (q[k] > n.hi[k]) gap = q[k] - n.hi[k];
      s += gap * gap;
    }
    return s;
  }

  // Returns true once the early-exit radius is satisfied (radius < 0 disables it).
  bool search(std::int32_t id, const Point<D>& q, Neighbor& best, double radius) const {
    const Node& n = nodes_[id];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double d2 = squared_distance<D>(q, packed_[i]);
        const std::size_t idx = order_[i];
        if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
          best.squared_distance = d2;
          best.index = idx;
          if (radius >= 0.0 && std::sqrt(d2) <= radius) return true;
        }
      }
      return false;
    }
    const double dl = box_squared_distance(nodes_[n.left], q);
    const double dr = box_squared_distance(nodes_[n.right], q);
    const bool left_first = dl <= dr;
    const std::int32_t first = left_first ? n.left : n.right;
    const std::int32_t second = left_first ? n.right : n.left;
    const double d_first = left_first ? dl : dr;
    const double d_second = left_first ? dr : dl;
    if (d_first <= best.squared_distance && search(first, q, best, radius)) return true;
    if (d_second <= best.squared_distance && search(second, q, best, radius)) return true;
    return false;
  }

  std::vector<Point<D>> points_;
  std::vector<Point<D>> packed_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// d(q; S): exact minimum Euclidean distance from q to the indexed set.
template <int D>
double point_to_set_distance(const Point<D>& q, const KdTree<D>& index) {
  if (!is_finite<D>(q)) throw InvalidInput("query point has a non-finite coordinate");
  return index.nearest(q).distance();
}

}  // namespace cid
