#pragma once

// Concavity-induced distance kernels.
//
//   cid_p(a, b) = max over m evenly spaced samples l of segment ab of d(l; S)
//   cid_g(G, H) = mean of cid_p over all pairs of downsample(G) x downsample(H)
//
// where d(.; S) is the exact point-to-set distance of the indexed cloud.

#include <span>
#include <vector>

#include "cid/common.hpp"
#include "cid/spatial_index.hpp"

namespace cid {

/// Number of samples on a segment, both endpoints included.
class SegmentDiscretization {
 public:
  static constexpr std::size_t kDefaultSamples = 100;

  constexpr SegmentDiscretization() = default;
  explicit SegmentDiscretization(std::size_t samples) : samples_(samples) {
    if (samples < 2) throw InvalidInput("segment discretization needs at least 2 samples");
  }

  constexpr std::size_t samples() const noexcept { return samples_; }

 private:
  std::size_t samples_ = kDefaultSamples;
};

/// Uniform-stride downsampling of a group before pairwise averaging.
class GroupSamplingPolicy {
 public:
  static constexpr std::size_t kDefaultCap = 32;

  constexpr GroupSamplingPolicy() = default;
  explicit GroupSamplingPolicy(std::size_t max_points_per_group) : cap_(max_points_per_group) {
    if (cap_ == 0) throw InvalidInput("group sampling cap must be positive");
  }

  constexpr std::size_t max_points_per_group() const noexcept { return cap_; }

  /// Sorts the group and keeps elements at positions floor(i * n / cap).
  IndexList downsample(IndexList group) const {
    std::sort(group.begin(), group.end());
    const std::size_t n = group.size();
    if (n <= cap_) return group;
    IndexList out(cap_);
    for (std::size_t i = 0; i < cap_; ++i) out[i] = group[i * n / cap_];
    return out;
  }

 private:
  std::size_t cap_ = kDefaultCap;
};

namespace detail {

// Segment endpoints ordered lexicographically so that cid_p(a, b) and
// cid_p(b, a) evaluate exactly the same sample points.
template <int D>
inline bool lexicographic_less(const Point<D>& a, const Point<D>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

template <int D>
inline Point<D> segment_sample(const Point<D>& lo, const Point<D>& hi, std::size_t l,
                               std::size_t m) {
  const double t = static_cast<double>(l) / static_cast<double>(m - 1);
  const double s = 1.0 - t;
  Point<D> p;
  for (int k = 0; k < D; ++k) p[k] = s * lo[k] + t * hi[k];
  return p;
}

template <int D>
inline void check_dimension(std::span<const double> q) {
  if (q.size() != static_cast<std::size_t>(D))
    throw InvalidInput("point has " + std::to_string(q.size()) + " coordinates, index is " +
                       std::to_string(D) + "-dimensional");
}

template <int D>
inline Point<D> to_point(std::span<const double> q) {
  check_dimension<D>(q);
  Point<D> p;
  std::copy(q.begin(), q.end(), p.begin());
  return p;
}

}  // namespace detail

/// Discretized concavity-induced distance between two points.
///
/// The maximum over samples is found best-first: d(.; S) is 1-Lipschitz, so
/// an interval of samples between two probed ones is bounded by the probes
/// plus half its length, and intervals that cannot beat the running maximum
/// are never probed. Probes themselves stop early once the point is known to
/// be within the running maximum. Neither shortcut changes the result, which
/// equals the plain max-min over all m samples.
template <int D>
double cid_p(const Point<D>& a, const Point<D>& b, const KdTree<D>& index,
             SegmentDiscretization disc = {}) {
  if (a == b) return 0.0;
  const bool swap = detail::lexicographic_less<D>(b, a);
  const Point<D>& lo = swap ? b : a;
  const Point<D>& hi = swap ? a : b;
  const std::size_t m = disc.samples();

  const double length = distance<D>(lo, hi);
  const double step = length / static_cast<double>(m - 1);
  double magnitude = length;
  for (int k = 0; k < D; ++k) magnitude = std::max({magnitude, std::abs(lo[k]), std::abs(hi[k])});
  // Covers rounding in sample positions and distances; pruning is only
  // taken when it holds with this much room.
  const double slack = 1e-10 * (1.0 + magnitude);

  double best = 0.0;
  struct Probe {
    double bound;  // exact distance if it exceeded the running max, else an upper bound
    std::size_t neighbor;
  };
  auto probe = [&](std::size_t l, std::size_t hint_index) {
    const Point<D> p = detail::segment_sample<D>(lo, hi, l, m);
    Neighbor hint;
    if (hint_index != Neighbor::npos) hint = {hint_index, squared_distance<D>(p, index.point(hint_index))};
    const Neighbor nn = index.nearest_unless_within(p, best, hint);
    const double d = nn.distance();
    best = std::max(best, d);
    return Probe{d, nn.index};
  };

  struct Interval {
    double bound;
    std::size_t first, last;
    Probe left, right;
    bool operator<(const Interval& o) const { return bound < o.bound; }
  };
  auto make = [&](std::size_t i, std::size_t j, Probe pi, Probe pj) {
    const double span = static_cast<double>(j - i) * step;
    return Interval{0.5 * (pi.bound + pj.bound + span), i, j, pi, pj};
  };

  const Probe first = probe(0, Neighbor::npos);
  const Probe last = probe(m - 1, first.neighbor);
  if (m == 2) return best;

  std::vector<Interval> heap;
  heap.reserve(64);
  heap.push_back(make(0, m - 1, first, last));
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end());
    const Interval iv = heap.back();
    heap.pop_back();
    if (iv.bound + slack <= best) break;
    const std::size_t mid = iv.first + (iv.last - iv.first) / 2;
    const Probe& near = iv.left.bound <= iv.right.bound ? iv.left : iv.right;
    const Probe pm = probe(mid, near.neighbor);
    if (mid - iv.first > 1) {
      heap.push_back(make(iv.first, mid, iv.left, pm));
      std::push_heap(heap.begin(), heap.end());
    }
    if (iv.last - mid > 1) {
      heap.push_back(make(mid, iv.last, pm, iv.right));
      std::push_heap(heap.begin(), heap.end());
    }
  }
  return best;
}

template <int D>
double cid_p(std::span<const double> a, std::span<const double> b, const KdTree<D>& index,
             SegmentDiscretization disc = {}) {
  const auto pa = detail::to_point<D>(a);
  const auto pb = detail::to_point<D>(b);
  if (!is_finite<D>(pa) || !is_finite<D>(pb))
    throw InvalidInput("segment endpoint has a non-finite coordinate");
  return cid_p<D>(pa, pb, index, disc);
}

template <int D>
double point_to_set_distance(std::span<const double> q, const KdTree<D>& index) {
  return point_to_set_distance<D>(detail::to_point<D>(q), index);
}

/// Cached cid_p values between two index lists, row-major.
struct CidMatrix {
  IndexList rows;
  IndexList cols;
  std::vector<double> values;

  std::size_t row_count() const noexcept { return rows.size(); }
  std::size_t col_count() const noexcept { return cols.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols.size() + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols.size() + c]; }
};

template <int D>
void check_indices(const IndexList& indices, const KdTree<D>& index) {
  for (std::size_t i : indices)
    if (i >= index.size())
      throw InvalidInput("point index " + std::to_string(i) + " out of range for " +
                         std::to_string(index.size()) + " points");
}

template <int D>
CidMatrix cid_matrix(const IndexList& sources, const IndexList& targets, const KdTree<D>& index,
                     SegmentDiscretization disc = {}) {
  check_indices<D>(sources, index);
  check_indices<D>(targets, index);
  CidMatrix out{sources, targets, std::vector<double>(sources.size() * targets.size())};
  parallel_for(sources.size(), [&](std::size_t r) {
    for (std::size_t c = 0; c < targets.size(); ++c)
      out.at(r, c) = cid_p<D>(index.point(sources[r]), index.point(targets[c]), index, disc);
  });
  return out;
}

/// Mean cid_p over all pairs of the already-downsampled groups. The sum runs
/// i-outer, j-inner before a single division.
template <int D>
double cid_g_sampled(const IndexList& gi, const IndexList& gj, const KdTree<D>& index,
                     SegmentDiscretization disc = {}) {
  double sum = 0.0;
  for (std::size_t p : gi)
    for (std::size_t q : gj) sum += cid_p<D>(index.point(p), index.point(q), index, disc);
  return sum / (static_cast<double>(gi.size()) * static_cast<double>(gj.size()));
}

template <int D>
double cid_g(const IndexList& gi, const IndexList& gj, const KdTree<D>& index,
             SegmentDiscretization disc = {}, const GroupSamplingPolicy& policy = {}) {
  if (gi.empty() || gj.empty()) throw InvalidInput("cid_g needs two non-empty groups");
  check_indices<D>(gi, index);
  check_indices<D>(gj, index);
  return cid_g_sampled<D>(policy.downsample(gi), policy.downsample(gj), index, disc);
}

}  // namespace cid
