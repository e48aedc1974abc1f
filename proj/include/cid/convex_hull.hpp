#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cid/common.hpp"

namespace cid {

/// Affine rank of a group relative to the ambient dimension.
enum class Degeneracy { none, planar, linear, point };

inline std::string_view to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::none: return "none";
    case Degeneracy::planar: return "planar";
    case Degeneracy::linear: return "linear";
    case Degeneracy::point: return "point";
  }
  return "none";
}

/// Convex hull of one group. Facets hold cloud indices:
///  - full-rank 3D: outward-oriented (counter-clockwise) triangles
///  - planar 3D group: a single counter-clockwise polygon loop
///  - full-rank 2D: polygon edges in counter-clockwise order
///  - linear: one edge between the two extreme points
///  - point: no facets
struct ConvexPart {
  std::size_t group_id = 0;
  IndexList hull_vertices;  // ascending
  std::vector<IndexList> hull_facets;
  Degeneracy degeneracy = Degeneracy::none;
};

namespace detail {

// Singular values below this fraction of the largest count as zero.
inline constexpr double kAffineRankTolerance = 1e-8;

struct AffineFrame {
  int rank = 0;
  Eigen::VectorXd centroid;
  Eigen::MatrixXd axes;  // principal directions, strongest first
};

template <int D>
AffineFrame affine_frame(const std::vector<Point<D>>& pts, const IndexList& ids) {
  AffineFrame f;
  f.centroid = Eigen::VectorXd::Zero(D);
  for (std::size_t i : ids)
    for (int k = 0; k < D; ++k) f.centroid[k] += pts[i][k];
  f.centroid /= static_cast<double>(ids.size());
  Eigen::MatrixXd centered(ids.size(), D);
  for (std::size_t r = 0; r < ids.size(); ++r)
    for (int k = 0; k < D; ++k) centered(r, k) = pts[ids[r]][k] - f.centroid[k];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  f.axes = svd.matrixV();
  if (sv.size() == 0 || sv[0] == 0.0) return f;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > kAffineRankTolerance * sv[0]) ++f.rank;
  return f;
}

/// Andrew's monotone chain. Returns a counter-clockwise loop of indices into
/// `xy` without collinear vertices.
inline std::vector<std::size_t> monotone_chain(const std::vector<std::array<double, 2>>& xy) {
  std::vector<std::size_t> order(xy.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xy[a] < xy[b] || (xy[a] == xy[b] && a < b);
  });
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (xy[a][0] - xy[o][0]) * (xy[b][1] - xy[o][1]) - (xy[a][1] - xy[o][1]) * (xy[b][0] - xy[o][0]);
  };
  std::vector<std::size_t> hull(2 * order.size());
  std::size_t h = 0;
  for (std::size_t i : order) {
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], i) <= 0) --h;
    hull[h++] = i;
  }
  for (std::size_t t = order.size() - 1, lower = h + 1; t-- > 0;) {
    const std::size_t i = order[t];
    while (h >= lower && cross(hull[h - 2], hull[h - 1], i) <= 0) --h;
    hull[h++] = i;
  }
  hull.resize(h > 1 ? h - 1 : h);
  return hull;
}

/// Quickhull over full-rank 3D points. Points closer than `eps` to a facet
/// plane count as inside. Returns outward-oriented triangles (local indices).
class Quickhull3 {
 public:
  Quickhull3(const std::vector<Eigen::Vector3d>& pts, double eps) : pts_(pts), eps_(eps) {}

  std::vector<std::array<std::uint32_t, 3>> run() {
    initial_simplex();
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
      while (faces_[fi].alive && !faces_[fi].outside.empty()) add_point(fi);
    }
    std::vector<std::array<std::uint32_t, 3>> out;
    for (const auto& f : faces_)
      if (f.alive) out.push_back(f.v);
    return out;
  }

 private:
  struct Face {
    std::array<std::uint32_t, 3> v;
    Eigen::Vector3d normal;
    std::vector<std::uint32_t> outside;
    std::uint32_t visit = 0;
    bool alive = true;
  };

  double signed_distance(const Face& f, std::uint32_t p) const {
    return f.normal.dot(pts_[p] - pts_[f.v[0]]);
  }

  std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) const {
    return static_cast<std::uint64_t>(a) * pts_.size() + b;
  }

  std::uint32_t make_face(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    Face f;
    f.v = {a, b, c};
    const Eigen::Vector3d n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    const double len = n.norm();
    f.normal = len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::Zero();
    const auto id = static_cast<std::uint32_t>(faces_.size());
    faces_.push_back(std::move(f));
    edges_[edge_key(a, b)] = id;
    edges_[edge_key(b, c)] = id;
    edges_[edge_key(c, a)] = id;
    return id;
  }

  void initial_simplex() {
    const auto n = static_cast<std::uint32_t>(pts_.size());
    std::uint32_t i0 = 0;
    for (std::uint32_t i = 1; i < n; ++i)
      if (pts_[i].x() < pts_[i0].x()) i0 = i;
    auto argmax = [&](auto&& score) {
      std::uint32_t best = 0;
      double best_score = -1.0;
      for (std::uint32_t i = 0; i < n; ++i) {
        const double s = score(i);
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      return best;
    };
    const std::uint32_t i1 = argmax([&](std::uint32_t i) { return (pts_[i] - pts_[i0]).squaredNorm(); });
    const Eigen::Vector3d dir = (pts_[i1] - pts_[i0]).normalized();
    const std::uint32_t i2 = argmax([&](std::uint32_t i) {
      const Eigen::Vector3d d = pts_[i] - pts_[i0];
      return (d - d.dot(dir) * dir).squaredNorm();
    });
    const Eigen::Vector3d pn = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    const std::uint32_t i3 = argmax([&](std::uint32_t i) { return std::abs(pn.dot(pts_[i] - pts_[i0])); });

    std::array<std::uint32_t, 4> s = {i0, i1, i2, i3};
    if (pn.dot(pts_[i3] - pts_[i0]) > 0.0) std::swap(s[1], s[2]);
    // With (s0, s1, s2) seen clockwise from s3, these four are outward.
    make_face(s[0], s[1], s[2]);
    make_face(s[0], s[3], s[1]);
    make_face(s[1], s[3], s[2]);
    make_face(s[2], s[3], s[0]);

    for (std::uint32_t p = 0; p < n; ++p) {
      if (p == s[0] || p == s[1] || p == s[2] || p == s[3]) continue;
      assign(p, 0, faces_.size());
    }
  }

  void assign(std::uint32_t p, std::size_t first_face, std::size_t end_face) {
    for (std::size_t f = first_face; f < end_face; ++f) {
      if (faces_[f].alive && signed_distance(faces_[f], p) > eps_) {
        faces_[f].outside.push_back(p);
        return;
      }
    }
  }

  void add_point(std::size_t fi) {
    Face& start = faces_[fi];
    std::uint32_t apex = start.outside.front();
    double far = signed_distance(start, apex);
    for (std::uint32_t q : start.outside) {
      const double d = signed_distance(start, q);
      if (d > far || (d == far && q < apex)) {
        far = d;
        apex = q;
      }
    }

    ++stamp_;
    std::vector<std::uint32_t> visible{static_cast<std::uint32_t>(fi)};
    faces_[fi].visit = stamp_;
    std::vector<std::array<std::uint32_t, 2>> horizon;
    for (std::size_t h = 0; h < visible.size(); ++h) {
      const Face& f = faces_[visible[h]];
      for (int e = 0; e < 3; ++e) {
        const std::uint32_t a = f.v[e];
        const std::uint32_t b = f.v[(e + 1) % 3];
        const std::uint32_t g = edges_.at(edge_key(b, a));
        if (faces_[g].visit == stamp_) continue;
        if (signed_distance(faces_[g], apex) > eps_) {
          faces_[g].visit = stamp_;
          visible.push_back(g);
        }
      }
    }
    // Horizon: edges of visible faces whose twin is not visible.
    for (std::uint32_t vf : visible) {
      const Face& f = faces_[vf];
      for (int e = 0; e < 3; ++e) {
        const std::uint32_t a = f.v[e];
        const std::uint32_t b = f.v[(e + 1) % 3];
        if (faces_[edges_.at(edge_key(b, a))].visit != stamp_) horizon.push_back({a, b});
      }
    }

    std::vector<std::uint32_t> orphans;
    for (std::uint32_t vf : visible) {
      Face& f = faces_[vf];
      f.alive = false;
      for (std::uint32_t q : f.outside)
        if (q != apex) orphans.push_back(q);
      f.outside.clear();
      f.outside.shrink_to_fit();
      for (int e = 0; e < 3; ++e) {
        auto it = edges_.find(edge_key(f.v[e], f.v[(e + 1) % 3]));
        if (it != edges_.end() && it->second == vf) edges_.erase(it);
      }
    }

    const std::size_t first_new = faces_.size();
    for (const auto& [a, b] : horizon) make_face(a, b, apex);
    std::sort(orphans.begin(), orphans.end());
    for (std::uint32_t q : orphans) assign(q, first_new, faces_.size());
  }

  const std::vector<Eigen::Vector3d>& pts_;
  double eps_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, std::uint32_t> edges_;
  std::uint32_t stamp_ = 0;
};

template <int D>
double bounding_diagonal(const std::vector<Point<D>>& pts, const IndexList& ids) {
  Point<D> lo = pts[ids.front()], hi = lo;
  for (std::size_t i : ids)
    for (int k = 0; k < D; ++k) {
      lo[k] = std::min(lo[k], pts[i][k]);
      hi[k] = std::max(hi[k], pts[i][k]);
    }
  return distance<D>(lo, hi);
}

inline IndexList sorted_unique(IndexList v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

/// Exact convex hull of the points `group` (indices into `points`).
/// Affinely degenerate groups get a rank-appropriate hull and a flag.
template <int D>
ConvexPart convex_hull(const std::vector<Point<D>>& points, IndexList group, std::size_t group_id = 0) {
  if (group.empty()) throw InvalidInput("cannot take the hull of an empty group");
  group = detail::sorted_unique(std::move(group));
  for (std::size_t i : group)
    if (i >= points.size()) throw InvalidInput("hull group index out of range");

  ConvexPart part;
  part.group_id = group_id;
  const auto frame = detail::affine_frame<D>(points, group);

  auto project = [&](std::size_t i, int axis) {
    double s = 0.0;
    for (int k = 0; k < D; ++k) s += (points[i][k] - frame.centroid[k]) * frame.axes(k, axis);
    return s;
  };

  if (frame.rank == 0) {
    part.degeneracy = Degeneracy::point;
    part.hull_vertices = {group.front()};
    return part;
  }
  if (frame.rank == 1) {
    part.degeneracy = Degeneracy::linear;
    std::size_t lo = group.front(), hi = group.front();
    double vlo = project(lo, 0), vhi = vlo;
    for (std::size_t i : group) {
      const double v = project(i, 0);
      if (v < vlo) { vlo = v; lo = i; }
      if (v > vhi) { vhi = v; hi = i; }
    }
    part.hull_facets = {{lo, hi}};
    part.hull_vertices = detail::sorted_unique({lo, hi});
    return part;
  }
  if (frame.rank == 2) {
    std::vector<std::array<double, 2>> xy(group.size());
    for (std::size_t r = 0; r < group.size(); ++r) {
      if constexpr (D == 2) {
        xy[r] = {points[group[r]][0], points[group[r]][1]};
      } else {
        xy[r] = {project(group[r], 0), project(group[r], 1)};
      }
    }
    IndexList loop;
    for (std::size_t r : detail::monotone_chain(xy)) loop.push_back(group[r]);
    part.hull_vertices = detail::sorted_unique(loop);
    if constexpr (D == 2) {
      part.degeneracy = Degeneracy::none;
      for (std::size_t e = 0; e < loop.size(); ++e) part.hull_facets.push_back({loop[e], loop[(e + 1) % loop.size()]});
    } else {
      part.degeneracy = Degeneracy::planar;
      part.hull_facets = {loop};
    }
    return part;
  }

  if constexpr (D == 3) {
    std::vector<Eigen::Vector3d> local(group.size());
    for (std::size_t r = 0; r < group.size(); ++r)
      local[r] = Eigen::Vector3d(points[group[r]][0], points[group[r]][1], points[group[r]][2]);
    const double eps = 1e-11 * detail::bounding_diagonal<D>(points, group);
    const auto tris = detail::Quickhull3(local, eps).run();
    IndexList verts;
    for (const auto& t : tris) {
      part.hull_facets.push_back({group[t[0]], group[t[1]], group[t[2]]});
      for (auto v : t) verts.push_back(group[v]);
    }
    part.hull_vertices = detail::sorted_unique(std::move(verts));
    part.degeneracy = Degeneracy::none;
  }
  return part;
}

template <int D>
std::vector<ConvexPart> convex_hulls(const PointCloud<D>& cloud, const std::vector<IndexList>& groups) {
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidInput("convex hull of an empty group");
    for (std::size_t i : g)
      if (i >= cloud.size()) throw InvalidInput("hull point index out of range");
  }
  std::vector<ConvexPart> parts(groups.size());
  parallel_for(groups.size(), [&](std::size_t g) {
    parts[g] = convex_hull<D>(cloud.points, groups[g], g);
  });
  return parts;
}

}  // namespace cid
