#pragma once

// Synthetic scenes with ground-truth labels, used by tests and demos.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>

#include "cid/common.hpp"

namespace cid {

enum class SceneKind { l_shape, four_arcs, two_planes, box_room };

inline SceneKind parse_scene_kind(std::string_view name) {
  if (name == "l_shape") return SceneKind::l_shape;
  if (name == "four_arcs") return SceneKind::four_arcs;
  if (name == "two_planes") return SceneKind::two_planes;
  if (name == "box_room") return SceneKind::box_room;
  throw InvalidInput("unknown scene descriptor '" + std::string(name) + "'");
}

inline std::string_view to_string(SceneKind k) {
  switch (k) {
    case SceneKind::l_shape: return "l_shape";
    case SceneKind::four_arcs: return "four_arcs";
    case SceneKind::two_planes: return "two_planes";
    case SceneKind::box_room: return "box_room";
  }
  return "";
}

/// Density is points per unit length for curve scenes (l_shape, four_arcs)
/// and points per unit area for surface scenes. Zero selects the default.
struct SceneDescriptor {
  SceneKind kind = SceneKind::box_room;
  double density = 0.0;

  double effective_density() const {
    if (density != 0.0) return density;
    switch (kind) {
      case SceneKind::l_shape: return 100.0;
      case SceneKind::four_arcs: return 20.0;
      case SceneKind::two_planes: return 2500.0;
      case SceneKind::box_room: return 130.0;
    }
    return 1.0;
  }
};

// Box-room layout, meters.
namespace room {
inline constexpr double kWidth = 4.0;
inline constexpr double kLength = 3.0;
inline constexpr double kHeight = 2.5;
inline constexpr double kBoxX0 = 1.4, kBoxX1 = 2.2;
inline constexpr double kBoxY0 = 1.0, kBoxY1 = 1.6;
inline constexpr double kBoxHeight = 0.75;

inline constexpr Label kFloor = 0;
inline constexpr Label kCeiling = 1;
inline constexpr Label kWall = 2;
inline constexpr Label kTable = 3;
}  // namespace room

namespace detail {

struct SceneBuilder {
  PointCloud<3> cloud;
  Rng rng;

  explicit SceneBuilder(std::uint64_t seed) : rng(seed) {}

  void add(const Point<3>& p, Label sem, Label inst) {
    cloud.points.push_back(p);
    cloud.semantic_labels.push_back(sem);
    cloud.instance_labels.push_back(inst);
  }

  // Stratified sampling of the rectangle origin + s*u + t*v, s in [0,lu],
  // t in [0,lv]: one uniform point per grid cell. Cells whose center fails
  // `keep` are skipped.
  void rectangle(const Point<3>& origin, const Point<3>& u, const Point<3>& v, double lu, double lv,
                 double density, Label sem, Label inst,
                 const std::function<bool(const Point<3>&)>& keep = {}) {
    const double pitch = 1.0 / std::sqrt(density);
    const auto nu = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(lu / pitch)));
    const auto nv = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(lv / pitch)));
    const double du = lu / static_cast<double>(nu), dv = lv / static_cast<double>(nv);
    auto at = [&](double s, double t) {
      Point<3> p;
      for (int k = 0; k < 3; ++k) p[k] = origin[k] + s * u[k] + t * v[k];
      return p;
    };
    for (std::size_t i = 0; i < nu; ++i) {
      for (std::size_t j = 0; j < nv; ++j) {
        const double cs = (static_cast<double>(i) + 0.5) * du;
        const double ct = (static_cast<double>(j) + 0.5) * dv;
        if (keep && !keep(at(cs, ct))) continue;
        const double s = (static_cast<double>(i) + unit_uniform(rng)) * du;
        const double t = (static_cast<double>(j) + unit_uniform(rng)) * dv;
        add(at(s, t), sem, inst);
      }
    }
  }
};

}  // namespace detail

/// Builds a labeled synthetic scene. All randomness comes from `rng_seed`.
///   l_shape    two unit arms along +x and +y on a regular grid
///   four_arcs  four unit semicircles alternating up and down in z = 0
///   two_planes unit floor (z = 0) and unit wall (x = 0) sharing an edge
///   box_room   floor, ceiling, four walls and a box, seven instances
inline PointCloud<3> synth_scene(const SceneDescriptor& desc, std::uint64_t rng_seed) {
  const double density = desc.effective_density();
  if (!(density > 0.0) || !std::isfinite(density)) throw InvalidInput("scene density must be positive");
  detail::SceneBuilder b(rng_seed);

  switch (desc.kind) {
    case SceneKind::l_shape: {
      const auto n = std::max<long>(1, std::lround(density));
      const double step = 1.0 / static_cast<double>(n);
      for (long i = 0; i <= n; ++i) b.add({static_cast<double>(i) * step, 0.0, 0.0}, 0, 0);
      for (long j = 1; j <= n; ++j) b.add({0.0, static_cast<double>(j) * step, 0.0}, 0, 1);
      break;
    }
    case SceneKind::four_arcs: {
      const auto n = std::max<long>(3, std::lround(std::numbers::pi * density));
      for (int arc = 0; arc < 4; ++arc) {
        const double cx = 1.0 + 2.0 * arc;
        const double sign = arc % 2 == 0 ? 1.0 : -1.0;
        const long count = arc == 3 ? n + 1 : n;
        for (long j = 0; j < count; ++j) {
          const double theta = std::numbers::pi * (1.0 - static_cast<double>(j) / static_cast<double>(n));
          b.add({cx + std::cos(theta), sign * std::sin(theta), 0.0}, arc % 2, arc);
        }
      }
      break;
    }
    case SceneKind::two_planes: {
      b.rectangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 1.0, 1.0, density, 0, 0);
      b.rectangle({0, 0, 0}, {0, 1, 0}, {0, 0, 1}, 1.0, 1.0, density, 1, 1);
      break;
    }
    case SceneKind::box_room: {
      using namespace room;
      auto outside_box = [](const Point<3>& p) {
        return !(p[0] > kBoxX0 && p[0] < kBoxX1 && p[1] > kBoxY0 && p[1] < kBoxY1);
      };
      b.rectangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, kWidth, kLength, density, kFloor, 0, outside_box);
      b.rectangle({0, 0, kHeight}, {1, 0, 0}, {0, 1, 0}, kWidth, kLength, density, kCeiling, 1);
      b.rectangle({0, 0, 0}, {0, 1, 0}, {0, 0, 1}, kLength, kHeight, density, kWall, 2);
      b.rectangle({kWidth, 0, 0}, {0, 1, 0}, {0, 0, 1}, kLength, kHeight, density, kWall, 3);
      b.rectangle({0, 0, 0}, {1, 0, 0}, {0, 0, 1}, kWidth, kHeight, density, kWall, 4);
      b.rectangle({0, kLength, 0}, {1, 0, 0}, {0, 0, 1}, kWidth, kHeight, density, kWall, 5);
      const double bw = kBoxX1 - kBoxX0, bl = kBoxY1 - kBoxY0;
      b.rectangle({kBoxX0, kBoxY0, kBoxHeight}, {1, 0, 0}, {0, 1, 0}, bw, bl, density, kTable, 6);
      b.rectangle({kBoxX0, kBoxY0, 0}, {1, 0, 0}, {0, 0, 1}, bw, kBoxHeight, density, kTable, 6);
      b.rectangle({kBoxX0, kBoxY1, 0}, {1, 0, 0}, {0, 0, 1}, bw, kBoxHeight, density, kTable, 6);
      b.rectangle({kBoxX0, kBoxY0, 0}, {0, 1, 0}, {0, 0, 1}, bl, kBoxHeight, density, kTable, 6);
      b.rectangle({kBoxX1, kBoxY0, 0}, {0, 1, 0}, {0, 0, 1}, bl, kBoxHeight, density, kTable, 6);
      break;
    }
  }
  return std::move(b.cloud);
}

}  // namespace cid
