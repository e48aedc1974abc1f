#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cid {

// Errors ---------------------------------------------------------------------

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse failure with the location (line for text, byte offset for binary).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t location, bool is_byte_offset)
      : std::runtime_error(what + (is_byte_offset ? " (byte " : " (line ") +
                           std::to_string(location) + ")"),
        location_(location),
        is_byte_offset_(is_byte_offset) {}

  std::size_t location() const noexcept { return location_; }
  bool is_byte_offset() const noexcept { return is_byte_offset_; }

 private:
  std::size_t location_;
  bool is_byte_offset_;
};

// Geometry primitives --------------------------------------------------------

template <int D>
using Point = std::array<double, D>;

using Label = std::int32_t;
using IndexList = std::vector<std::size_t>;

template <int D>
inline double squared_distance(const Point<D>& a, const Point<D>& b) {
  double s = 0.0;
  for (int k = 0; k < D; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

template <int D>
inline double distance(const Point<D>& a, const Point<D>& b) {
  return std::sqrt(squared_distance<D>(a, b));
}

template <int D>
inline bool is_finite(const Point<D>& p) {
  return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
}

/// A point set S with optional per-point labels. Label vectors are either
/// empty (absent) or aligned with `points`.
template <int D>
struct PointCloud {
  static_assert(D == 2 || D == 3, "only 2D and 3D clouds are supported");
  static constexpr int dim = D;

  std::vector<Point<D>> points;
  std::vector<Label> semantic_labels;
  std::vector<Label> instance_labels;

  std::size_t size() const noexcept { return points.size(); }
  bool has_semantic() const noexcept { return !semantic_labels.empty(); }
  bool has_instance() const noexcept { return !instance_labels.empty(); }

  void validate() const {
    if (points.empty()) throw InvalidInput("point cloud is empty");
    for (std::size_t i = 0; i < points.size(); ++i)
      if (!is_finite<D>(points[i]))
        throw InvalidInput("point " + std::to_string(i) + " has a non-finite coordinate");
    if (has_semantic() && semantic_labels.size() != points.size())
      throw InvalidInput("semantic label count does not match point count");
    if (has_instance() && instance_labels.size() != points.size())
      throw InvalidInput("instance label count does not match point count");
  }

  PointCloud subset(const IndexList& indices) const {
    PointCloud out;
    out.points.reserve(indices.size());
    for (std::size_t i : indices) out.points.push_back(points.at(i));
    if (has_semantic())
      for (std::size_t i : indices) out.semantic_labels.push_back(semantic_labels[i]);
    if (has_instance())
      for (std::size_t i : indices) out.instance_labels.push_back(instance_labels[i]);
    return out;
  }
};

// Randomness -----------------------------------------------------------------
//
// Every random decision flows from one 64-bit seed through mt19937_64. The
// distribution helpers below are written out so results do not depend on the
// standard library's distribution implementations.

using Rng = std::mt19937_64;

inline double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

/// Uniform random subset of size min(n, count) without replacement, sorted.
inline IndexList random_subset(std::size_t n, std::size_t count, std::uint64_t seed) {
  IndexList all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  if (count >= n) return all;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + uniform_index(rng, n - i);
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

// Threads --------------------------------------------------------------------

/// Worker count: hardware concurrency, capped by the CID_THREADS variable.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CID_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs fn(i) for i in [0, n) on static contiguous chunks. fn must only write
/// to state owned by index i, so the result never depends on the schedule.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n / 256 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cid
