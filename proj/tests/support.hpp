#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "cid/cid.hpp"

namespace support {

template <int D>
cid::PointCloud<D> random_cloud(std::size_t n, std::uint64_t seed, double extent = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  cid::PointCloud<D> c;
  for (std::size_t i = 0; i < n; ++i) {
    cid::Point<D> p;
    for (auto& x : p) x = u(rng);
    c.points.push_back(p);
  }
  return c;
}

// Points on the L made of two unit arms along +x and +y, spacing 0.01.
inline cid::PointCloud<3> l_arms() {
  cid::PointCloud<3> c;
  for (int i = 0; i <= 100; ++i) c.points.push_back({i * 0.01, 0.0, 0.0});
  for (int i = 1; i <= 100; ++i) c.points.push_back({0.0, i * 0.01, 0.0});
  return c;
}

struct Rigid {
  Eigen::Matrix3d r;
  Eigen::Vector3d t;

  cid::Point<3> operator()(const cid::Point<3>& p) const {
    const Eigen::Vector3d q = r * Eigen::Vector3d(p[0], p[1], p[2]) + t;
    return {q[0], q[1], q[2]};
  }
};

inline Rigid random_rigid(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  return {q.toRotationMatrix(), Eigen::Vector3d(u(rng), u(rng), u(rng))};
}

inline cid::PointCloud<3> transformed(const cid::PointCloud<3>& c, const Rigid& f) {
  auto out = c;
  for (auto& p : out.points) p = f(p);
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("cid_test_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  out << data;
}

}  // namespace support
