#pragma once

// Brute-force reference implementations. Nothing here calls into the library
// beyond its value types: nearest neighbors are linear scans, FPS and merging
// recompute every value from scratch each step.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "cid/common.hpp"

namespace oracle {

using cid::IndexList;
using cid::Label;
template <int D>
using Point = cid::Point<D>;

template <int D>
double scan_distance(const Point<D>& q, const std::vector<Point<D>>& cloud) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : cloud) {
    double s = 0.0;
    for (int k = 0; k < D; ++k) {
      const double d = q[k] - p[k];
      s += d * d;
    }
    best = std::min(best, s);
  }
  return std::sqrt(best);
}

template <int D>
std::size_t scan_nearest(const Point<D>& q, const std::vector<Point<D>>& cloud) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < D; ++k) {
      const double d = q[k] - cloud[i][k];
      s += d * d;
    }
    if (s < best) {
      best = s;
      arg = i;
    }
  }
  return arg;
}

// Max over all m samples of the scan distance. Endpoints are ordered
// lexicographically and samples are (1 - t) lo + t hi with t = l / (m - 1).
template <int D>
double cid_p(const Point<D>& a, const Point<D>& b, const std::vector<Point<D>>& cloud, std::size_t m) {
  if (a == b) return 0.0;
  const bool swap = std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  const Point<D>& lo = swap ? b : a;
  const Point<D>& hi = swap ? a : b;
  double best = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    const double t = static_cast<double>(l) / static_cast<double>(m - 1);
    Point<D> p;
    for (int k = 0; k < D; ++k) p[k] = (1.0 - t) * lo[k] + t * hi[k];
    best = std::max(best, scan_distance<D>(p, cloud));
  }
  return best;
}

inline IndexList stride_downsample(IndexList g, std::size_t cap) {
  std::sort(g.begin(), g.end());
  if (g.size() <= cap) return g;
  IndexList out;
  for (std::size_t i = 0; i < cap; ++i) out.push_back(g[i * g.size() / cap]);
  return out;
}

template <int D>
double cid_g(const IndexList& gi, const IndexList& gj, const std::vector<Point<D>>& cloud, std::size_t m,
             std::size_t cap) {
  const IndexList a = stride_downsample(gi, cap), b = stride_downsample(gj, cap);
  double sum = 0.0;
  for (std::size_t p : a)
    for (std::size_t q : b) sum += cid_p<D>(cloud[p], cloud[q], cloud, m);
  return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

template <int D>
std::vector<double> full_matrix(const std::vector<Point<D>>& cloud, std::size_t m) {
  const std::size_t n = cloud.size();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out[i * n + j] = out[j * n + i] = cid_p<D>(cloud[i], cloud[j], cloud, m);
  return out;
}

// Greedy replay over the full matrix: first seed from the generator, then the
// argmax (lowest index on ties) of the minimum CID to the chosen seeds.
inline IndexList fps(const std::vector<double>& matrix, std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  IndexList seeds{static_cast<std::size_t>(rng() % n)};
  while (seeds.size() < k) {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (std::find(seeds.begin(), seeds.end(), p) != seeds.end()) continue;
      double mn = std::numeric_limits<double>::infinity();
      for (std::size_t s : seeds) mn = std::min(mn, matrix[p * n + s]);
      if (mn > best) {
        best = mn;
        arg = p;
      }
    }
    seeds.push_back(arg);
  }
  return seeds;
}

// Group id per point: seeds own their group; others take the seed of least
// CID, ties to the smaller seed point index.
inline std::vector<std::size_t> group_of(const std::vector<double>& matrix, std::size_t n, const IndexList& seeds) {
  std::vector<std::size_t> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    auto it = std::find(seeds.begin(), seeds.end(), p);
    if (it != seeds.end()) {
      out[p] = static_cast<std::size_t>(it - seeds.begin());
      continue;
    }
    std::size_t g = 0;
    for (std::size_t c = 1; c < seeds.size(); ++c) {
      const double v = matrix[p * n + seeds[c]], b = matrix[p * n + seeds[g]];
      if (v < b || (v == b && seeds[c] < seeds[g])) g = c;
    }
    out[p] = g;
  }
  return out;
}

struct Merge {
  std::vector<IndexList> groups;  // survivors in original slot order
  std::vector<std::array<std::size_t, 2>> pairs;
  std::vector<double> values;
};

// Every iteration recomputes cid_g for all live pairs.
template <int D>
Merge merge(std::vector<IndexList> groups, const std::vector<Point<D>>& cloud, std::size_t m, std::size_t cap,
            std::size_t iterations) {
  Merge out;
  std::vector<bool> live(groups.size(), true);
  for (std::size_t it = 0; it < iterations; ++it) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < groups.size(); ++i)
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        if (!live[i] || !live[j]) continue;
        const double v = cid_g<D>(groups[i], groups[j], cloud, m, cap);
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    groups[bi].insert(groups[bi].end(), groups[bj].begin(), groups[bj].end());
    std::sort(groups[bi].begin(), groups[bi].end());
    live[bj] = false;
    out.pairs.push_back({bi, bj});
    out.values.push_back(best);
  }
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (live[g]) out.groups.push_back(groups[g]);
  return out;
}

inline double purity(const std::vector<IndexList>& groups, const std::vector<Label>& gt, std::size_t n) {
  std::size_t sum = 0;
  for (const auto& g : groups) {
    std::size_t best = 0;
    for (Label l : gt) {
      std::size_t c = 0;
      for (std::size_t p : g) c += gt[p] == l;
      best = std::max(best, c);
    }
    sum += best;
  }
  return static_cast<double>(sum) / static_cast<double>(n);
}

// Per-point label form of AP, written after the VOC reference code: sort
// detections, mark TP/FP, then the precision envelope over recall steps.
struct Instance {
  std::vector<bool> mask;
  Label semantic;
};

// One mask per non-negative instance id, in id order. The semantic label is
// the most common one among the instance's points, smallest on ties.
inline std::vector<Instance> masks(const std::vector<Label>& sem, const std::vector<Label>& inst) {
  const std::size_t n = inst.size();
  std::vector<Label> ids;
  for (Label l : inst)
    if (l >= 0 && std::find(ids.begin(), ids.end(), l) == ids.end()) ids.push_back(l);
  std::sort(ids.begin(), ids.end());
  std::vector<Instance> out;
  for (Label id : ids) {
    Instance x{std::vector<bool>(n, false), 0};
    std::vector<Label> cats;
    for (std::size_t p = 0; p < n; ++p)
      if (inst[p] == id) {
        x.mask[p] = true;
        cats.push_back(sem[p]);
      }
    std::size_t best = 0;
    for (Label c : cats) {
      const auto votes = static_cast<std::size_t>(std::count(cats.begin(), cats.end(), c));
      if (votes > best || (votes == best && c < x.semantic)) {
        best = votes;
        x.semantic = c;
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

inline double iou(const std::vector<bool>& a, const std::vector<bool>& b) {
  std::size_t i = 0, u = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    i += a[p] && b[p];
    u += a[p] || b[p];
  }
  return u ? static_cast<double>(i) / static_cast<double>(u) : 0.0;
}

inline double voc_ap(std::vector<Instance> preds, const std::vector<Instance>& gts, Label cat, double thr) {
  std::vector<const Instance*> g;
  for (const auto& x : gts)
    if (x.semantic == cat) g.push_back(&x);
  std::stable_sort(preds.begin(), preds.end(), [](const Instance& a, const Instance& b) {
    return std::count(a.mask.begin(), a.mask.end(), true) > std::count(b.mask.begin(), b.mask.end(), true);
  });
  std::vector<bool> used(g.size(), false);
  std::vector<double> tp, fp;
  for (const auto& p : preds) {
    if (p.semantic != cat) continue;
    double ovmax = -1.0;
    std::size_t jmax = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double o = iou(p.mask, g[j]->mask);
      if (o > ovmax) {
        ovmax = o;
        jmax = j;
      }
    }
    const bool hit = ovmax >= thr && !used[jmax];
    if (hit) used[jmax] = true;
    tp.push_back(hit ? 1.0 : 0.0);
    fp.push_back(hit ? 0.0 : 1.0);
  }
  for (std::size_t i = 1; i < tp.size(); ++i) {
    tp[i] += tp[i - 1];
    fp[i] += fp[i - 1];
  }
  std::vector<double> mrec{0.0}, mpre{0.0};
  for (std::size_t i = 0; i < tp.size(); ++i) {
    mrec.push_back(tp[i] / static_cast<double>(g.size()));
    mpre.push_back(tp[i] / (tp[i] + fp[i]));
  }
  mrec.push_back(1.0);
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i > 0; --i) mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
  double ap = 0.0;
  for (std::size_t i = 1; i < mrec.size(); ++i)
    if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
  return ap;
}

// Hull vertex test in general position: p is a vertex iff some plane through
// p and two other points has every remaining point strictly on one side.
inline std::vector<bool> extreme_points(const std::vector<Point<3>>& pts) {
  const std::size_t n = pts.size();
  std::vector<bool> out(n, false);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n && !out[a]; ++b) {
      if (b == a) continue;
      for (std::size_t c = b + 1; c < n && !out[a]; ++c) {
        if (c == a) continue;
        Point<3> u, v, nrm;
        for (int k = 0; k < 3; ++k) {
          u[k] = pts[b][k] - pts[a][k];
          v[k] = pts[c][k] - pts[a][k];
        }
        nrm = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
        int pos = 0, neg = 0;
        for (std::size_t q = 0; q < n; ++q) {
          if (q == a || q == b || q == c) continue;
          const double s = nrm[0] * (pts[q][0] - pts[a][0]) + nrm[1] * (pts[q][1] - pts[a][1]) +
                           nrm[2] * (pts[q][2] - pts[a][2]);
          if (s > 0) ++pos;
          else if (s < 0) ++neg;
          else ++pos, ++neg;
          if (pos && neg) break;
        }
        if (!(pos && neg)) out[a] = true;
      }
    }
  }
  return out;
}

}  // namespace oracle
