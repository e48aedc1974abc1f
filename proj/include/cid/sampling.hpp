#pragma once

#include <cstdint>
#include <vector>

#include "cid/geometry.hpp"

namespace cid {

/// Output of CID farthest point sampling.
struct SeedProposal {
  IndexList seed_indices;       // in selection order
  IndexList remainder_indices;  // ascending
  CidMatrix cached_matrix;      // rows = remainder, cols = seeds
  std::uint64_t rng_seed = 0;
  // coverage[i] is the max-min CID that selected seed i; coverage[0] = +inf.
  std::vector<double> coverage;

  std::size_t seed_count() const noexcept { return seed_indices.size(); }
  std::size_t point_count() const noexcept { return seed_indices.size() + remainder_indices.size(); }
};

namespace detail {

struct FpsRun {
  std::size_t point_count = 0;
  IndexList seeds;
  std::vector<double> coverage;
  // columns[s * n + p] = cid_p(p, seeds[s]), valid while p was unselected at step s.
  std::vector<double> columns;

  SeedProposal proposal(std::size_t k, std::uint64_t rng_seed) const {
    const std::size_t n = point_count;
    SeedProposal out;
    out.rng_seed = rng_seed;
    out.seed_indices.assign(seeds.begin(), seeds.begin() + k);
    out.coverage.assign(coverage.begin(), coverage.begin() + k);
    std::vector<char> selected(n, 0);
    for (std::size_t s : out.seed_indices) selected[s] = 1;
    for (std::size_t p = 0; p < n; ++p)
      if (!selected[p]) out.remainder_indices.push_back(p);

    CidMatrix& m = out.cached_matrix;
    m.rows = out.remainder_indices;
    m.cols = out.seed_indices;
    m.values.resize(m.rows.size() * k);
    for (std::size_t r = 0; r < m.rows.size(); ++r)
      for (std::size_t c = 0; c < k; ++c) m.at(r, c) = columns[c * n + m.rows[r]];
    return out;
  }
};

template <int D>
FpsRun run_fps(const KdTree<D>& index, std::size_t k, SegmentDiscretization disc,
               std::uint64_t rng_seed) {
  const std::size_t n = index.size();
  if (k < 1) throw InvalidInput("cid_fps needs at least one seed");
  if (k > n)
    throw InvalidInput("cannot select " + std::to_string(k) + " seeds from " + std::to_string(n) +
                       " points");

  FpsRun run;
  run.point_count = n;
  run.seeds.reserve(k);
  run.columns.assign(k * n, 0.0);
  std::vector<char> selected(n, 0);
  std::vector<double> min_cid(n, std::numeric_limits<double>::infinity());

  Rng rng(rng_seed);
  std::size_t next = uniform_index(rng, n);
  run.coverage.push_back(std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < k; ++s) {
    run.seeds.push_back(next);
    selected[next] = 1;
    const Point<D>& seed = index.point(next);
    double* column = run.columns.data() + s * n;
    parallel_for(n, [&](std::size_t p) {
      if (selected[p]) return;
      column[p] = cid_p<D>(index.point(p), seed, index, disc);
      min_cid[p] = std::min(min_cid[p], column[p]);
    });
    if (s + 1 == k) break;

    double best = -1.0;
    for (std::size_t p = 0; p < n; ++p) {
      if (!selected[p] && min_cid[p] > best) {
        best = min_cid[p];
        next = p;
      }
    }
    run.coverage.push_back(best);
  }
  return run;
}

}  // namespace detail

/// Farthest point sampling under cid_p. The first seed is drawn uniformly
/// from rng_seed; each later seed maximizes the minimum cid_p to the seeds
/// already chosen (ties: lowest point index). One CID column is computed
/// per seed and cached.
template <int D>
SeedProposal cid_fps(const KdTree<D>& index, std::size_t k, SegmentDiscretization disc,
                     std::uint64_t rng_seed) {
  return detail::run_fps<D>(index, k, disc, rng_seed).proposal(k, rng_seed);
}

/// Proposals for several seed counts from one run. FPS is greedy, so the
/// proposal for k is the k-prefix of the run for max(ks).
template <int D>
std::vector<SeedProposal> cid_fps_prefixes(const KdTree<D>& index, const std::vector<std::size_t>& ks,
                                           SegmentDiscretization disc, std::uint64_t rng_seed) {
  if (ks.empty()) return {};
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  const auto run = detail::run_fps<D>(index, k_max, disc, rng_seed);
  std::vector<SeedProposal> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) {
    if (k < 1) throw InvalidInput("cid_fps needs at least one seed");
    out.push_back(run.proposal(k, rng_seed));
  }
  return out;
}

}  // namespace cid
