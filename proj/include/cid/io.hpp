#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cid/common.hpp"
#include "cid/convex_hull.hpp"

namespace cid {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class CloudFormat { ply_ascii, ply_binary_le, xyz_text };

inline CloudFormat parse_cloud_format(std::string_view s) {
  if (s == "ply-ascii") return CloudFormat::ply_ascii;
  if (s == "ply-binary-le") return CloudFormat::ply_binary_le;
  if (s == "xyz-text" || s == "xyz") return CloudFormat::xyz_text;
  throw InvalidInput("unknown point cloud format '" + std::string(s) + "'");
}

inline std::string_view to_string(CloudFormat f) {
  switch (f) {
    case CloudFormat::ply_ascii: return "ply-ascii";
    case CloudFormat::ply_binary_le: return "ply-binary-le";
    case CloudFormat::xyz_text: return "xyz-text";
  }
  return "";
}

using AnyCloud = std::variant<PointCloud<2>, PointCloud<3>>;

inline std::size_t point_count(const AnyCloud& c) {
  return std::visit([](const auto& pc) { return pc.size(); }, c);
}

inline int dimension(const AnyCloud& c) {
  return std::visit([](const auto& pc) { return std::decay_t<decltype(pc)>::dim; }, c);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

inline double numeric_field(std::string_view tok, std::size_t line) {
  double v;
  if (!parse_double(tok, v)) throw ParseError("non-numeric field '" + std::string(tok) + "'", line, false);
  return v;
}

inline Label label_field(std::string_view tok, std::size_t line) {
  const double v = numeric_field(tok, line);
  if (v != std::floor(v) || std::abs(v) > 2147483647.0)
    throw ParseError("label field '" + std::string(tok) + "' is not an integer", line, false);
  return static_cast<Label>(v);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

inline PlyType ply_type(std::string_view s, std::size_t line) {
  if (s == "char" || s == "int8") return PlyType::i8;
  if (s == "uchar" || s == "uint8") return PlyType::u8;
  if (s == "short" || s == "int16") return PlyType::i16;
  if (s == "ushort" || s == "uint16") return PlyType::u16;
  if (s == "int" || s == "int32") return PlyType::i32;
  if (s == "uint" || s == "uint32") return PlyType::u32;
  if (s == "float" || s == "float32") return PlyType::f32;
  if (s == "double" || s == "float64") return PlyType::f64;
  throw ParseError("unknown PLY property type '" + std::string(s) + "'", line, false);
}

inline std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8: case PlyType::u8: return 1;
    case PlyType::i16: case PlyType::u16: return 2;
    case PlyType::i32: case PlyType::u32: case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

template <typename T>
inline double load_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

inline double ply_load(PlyType t, const char* p) {
  switch (t) {
    case PlyType::i8: return load_as<std::int8_t>(p);
    case PlyType::u8: return load_as<std::uint8_t>(p);
    case PlyType::i16: return load_as<std::int16_t>(p);
    case PlyType::u16: return load_as<std::uint16_t>(p);
    case PlyType::i32: return load_as<std::int32_t>(p);
    case PlyType::u32: return load_as<std::uint32_t>(p);
    case PlyType::f32: return load_as<float>(p);
    case PlyType::f64: return load_as<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

inline bool is_semantic_name(std::string_view n) {
  return n == "semantic" || n == "semantic_label" || n == "label";
}
inline bool is_instance_name(std::string_view n) { return n == "instance" || n == "instance_label"; }

template <int D>
AnyCloud finish_cloud(std::vector<std::array<double, 3>>&& xyz, std::vector<Label>&& sem,
                      std::vector<Label>&& inst) {
  PointCloud<D> c;
  c.points.reserve(xyz.size());
  for (const auto& p : xyz) {
    Point<D> q;
    for (int k = 0; k < D; ++k) q[k] = p[k];
    c.points.push_back(q);
  }
  c.semantic_labels = std::move(sem);
  c.instance_labels = std::move(inst);
  c.validate();
  return c;
}

inline AnyCloud parse_ply(const std::string& data, std::optional<CloudFormat> expected) {
  // Header.
  std::size_t pos = 0, line_no = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= data.size()) throw ParseError("unexpected end of PLY header", line_no + 1, false);
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string_view line(data.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = std::min(data.size(), end + 1);
    ++line_no;
    return line;
  };
  if (next_line() != "ply") throw ParseError("missing 'ply' magic", 1, false);
  bool binary = false, have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string_view line = next_line();
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) throw ParseError("malformed format line", line_no, false);
      if (tok[2] != "1.0") throw ParseError("unsupported PLY version '" + std::string(tok[2]) + "'", line_no, false);
      if (tok[1] == "ascii") binary = false;
      else if (tok[1] == "binary_little_endian") binary = true;
      else throw ParseError("unsupported PLY format '" + std::string(tok[1]) + "'", line_no, false);
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError("malformed element line", line_no, false);
      PlyElement e;
      e.name = std::string(tok[1]);
      double count;
      if (!parse_double(tok[2], count) || count < 0 || count != std::floor(count))
        throw ParseError("bad element count", line_no, false);
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError("property before any element", line_no, false);
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        p.is_list = true;
        p.count_type = ply_type(tok[2], line_no);
        p.type = ply_type(tok[3], line_no);
        p.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        p.type = ply_type(tok[1], line_no);
        p.name = std::string(tok[2]);
      } else {
        throw ParseError("malformed property line", line_no, false);
      }
      elements.back().properties.push_back(std::move(p));
    } else {
      throw ParseError("unknown header keyword '" + std::string(tok[0]) + "'", line_no, false);
    }
  }
  if (!have_format) throw ParseError("missing format line", line_no, false);
  if (expected && *expected == CloudFormat::ply_ascii && binary)
    throw ParseError("expected an ascii PLY, header declares binary", line_no, false);
  if (expected && *expected == CloudFormat::ply_binary_le && !binary)
    throw ParseError("expected a binary PLY, header declares ascii", line_no, false);

  const auto vit = std::find_if(elements.begin(), elements.end(), [](const PlyElement& e) { return e.name == "vertex"; });
  if (vit == elements.end()) throw ParseError("no vertex element", line_no, false);
  int ix = -1, iy = -1, iz = -1, isem = -1, iinst = -1;
  for (std::size_t i = 0; i < vit->properties.size(); ++i) {
    const auto& p = vit->properties[i];
    if (p.is_list) continue;
    const int ii = static_cast<int>(i);
    if (p.name == "x") ix = ii;
    else if (p.name == "y") iy = ii;
    else if (p.name == "z") iz = ii;
    else if (is_semantic_name(p.name)) isem = ii;
    else if (is_instance_name(p.name)) iinst = ii;
  }
  if (ix < 0 || iy < 0) throw ParseError("vertex element lacks x/y properties", line_no, false);
  if (vit->count == 0) throw ParseError("vertex element is empty", line_no, false);

  std::vector<std::array<double, 3>> xyz(vit->count, {0.0, 0.0, 0.0});
  std::vector<Label> sem(isem >= 0 ? vit->count : 0), inst(iinst >= 0 ? vit->count : 0);
  const bool last_is_vertex = &elements.back() == &*vit;

  auto store = [&](std::size_t row, int prop, double v, std::size_t loc, bool byte) {
    if (prop == ix) xyz[row][0] = v;
    else if (prop == iy) xyz[row][1] = v;
    else if (prop == iz) xyz[row][2] = v;
    else if (prop == isem || prop == iinst) {
      if (v != std::floor(v)) throw ParseError("non-integer label", loc, byte);
      (prop == isem ? sem : inst)[row] = static_cast<Label>(v);
    }
    if ((prop == ix || prop == iy || prop == iz) && !std::isfinite(v))
      throw ParseError("non-finite coordinate", loc, byte);
  };

  if (!binary) {
    for (const auto& e : elements) {
      const bool is_vertex = &e == &*vit;
      for (std::size_t row = 0; row < e.count; ++row) {
        std::string_view line;
        do {
          if (pos >= data.size())
            throw ParseError("element '" + e.name + "' declares " + std::to_string(e.count) +
                                 " rows, found " + std::to_string(row),
                             line_no + 1, false);
          line = next_line();
        } while (split_ws(line).empty());
        const auto tok = split_ws(line);
        std::size_t t = 0;
        for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
          const auto& p = e.properties[pi];
          if (t >= tok.size()) throw ParseError("too few fields", line_no, false);
          if (p.is_list) {
            const double n = numeric_field(tok[t++], line_no);
            if (n < 0 || n != std::floor(n)) throw ParseError("bad list length", line_no, false);
            if (t + static_cast<std::size_t>(n) > tok.size()) throw ParseError("truncated list", line_no, false);
            for (std::size_t q = 0; q < static_cast<std::size_t>(n); ++q) numeric_field(tok[t++], line_no);
            continue;
          }
          const double v = numeric_field(tok[t++], line_no);
          if (is_vertex) store(row, static_cast<int>(pi), v, line_no, false);
        }
        if (t != tok.size()) throw ParseError("too many fields", line_no, false);
      }
      if (is_vertex && last_is_vertex) break;
    }
    if (last_is_vertex) {
      while (pos < data.size()) {
        if (!split_ws(next_line()).empty())
          throw ParseError("more vertex rows than the declared " + std::to_string(vit->count), line_no, false);
      }
    }
  } else {
    std::size_t off = pos;
    auto need = [&](std::size_t n) {
      if (off + n > data.size())
        throw ParseError("binary payload truncated", off, true);
    };
    for (const auto& e : elements) {
      const bool is_vertex = &e == &*vit;
      for (std::size_t row = 0; row < e.count; ++row) {
        for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
          const auto& p = e.properties[pi];
          if (p.is_list) {
            need(ply_size(p.count_type));
            const double n = ply_load(p.count_type, data.data() + off);
            off += ply_size(p.count_type);
            if (n < 0) throw ParseError("negative list length", off, true);
            need(static_cast<std::size_t>(n) * ply_size(p.type));
            off += static_cast<std::size_t>(n) * ply_size(p.type);
            continue;
          }
          need(ply_size(p.type));
          const double v = ply_load(p.type, data.data() + off);
          if (is_vertex) store(row, static_cast<int>(pi), v, off, true);
          off += ply_size(p.type);
        }
      }
      if (is_vertex && last_is_vertex) break;
    }
    if (last_is_vertex && off != data.size())
      throw ParseError("trailing bytes after the declared " + std::to_string(vit->count) + " vertices", off, true);
  }

  if (iz >= 0) return finish_cloud<3>(std::move(xyz), std::move(sem), std::move(inst));
  return finish_cloud<2>(std::move(xyz), std::move(sem), std::move(inst));
}

inline AnyCloud parse_xyz(const std::string& data) {
  std::vector<std::array<double, 3>> xyz;
  std::vector<Label> sem, inst;
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  int labeled = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok.size() < 3) throw ParseError("expected at least 3 numeric fields", line_no, false);
    const bool has_labels = tok.size() >= 5;
    if (labeled < 0) labeled = has_labels ? 1 : 0;
    if (labeled == 1 && !has_labels) throw ParseError("missing label fields", line_no, false);
    xyz.push_back({numeric_field(tok[0], line_no), numeric_field(tok[1], line_no), numeric_field(tok[2], line_no)});
    if (labeled == 1) {
      sem.push_back(label_field(tok[3], line_no));
      inst.push_back(label_field(tok[4], line_no));
    } else {
      for (std::size_t t = 3; t < tok.size(); ++t) numeric_field(tok[t], line_no);
    }
  }
  if (xyz.empty()) throw ParseError("no points", line_no, false);
  return finish_cloud<3>(std::move(xyz), std::move(sem), std::move(inst));
}

}  // namespace detail

/// Parses a PLY (ascii or binary little-endian) or xyz text cloud. The format
/// is taken from `format` when given, otherwise from the file contents.
inline AnyCloud parse_point_cloud_string(const std::string& data, std::optional<CloudFormat> format = {}) {
  const bool looks_ply = data.rfind("ply", 0) == 0;
  if (format == CloudFormat::xyz_text || (!format && !looks_ply)) return detail::parse_xyz(data);
  return detail::parse_ply(data, format);
}

inline AnyCloud parse_point_cloud(const std::filesystem::path& path, std::optional<CloudFormat> format = {}) {
  return parse_point_cloud_string(detail::read_file(path), format);
}

/// Sidecar label file: one "semantic instance" pair per line.
inline std::pair<std::vector<Label>, std::vector<Label>> parse_label_sidecar(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  std::vector<Label> sem, inst;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = detail::split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok.size() != 2) throw ParseError("expected 'semantic instance'", line_no, false);
    sem.push_back(detail::label_field(tok[0], line_no));
    inst.push_back(detail::label_field(tok[1], line_no));
  }
  return {std::move(sem), std::move(inst)};
}

inline void attach_labels(AnyCloud& cloud, std::vector<Label> sem, std::vector<Label> inst) {
  std::visit([&](auto& c) {
    if (sem.size() != c.size())
      throw InvalidInput("label file has " + std::to_string(sem.size()) + " rows for " +
                         std::to_string(c.size()) + " points");
    c.semantic_labels = std::move(sem);
    c.instance_labels = std::move(inst);
  }, cloud);
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

inline void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace detail

/// Writes a cloud. Coordinates are stored as doubles (binary) or with 17
/// significant digits (text), so they round-trip exactly. Absent label
/// arrays are omitted.
template <int D>
void write_point_cloud(const PointCloud<D>& cloud, const std::filesystem::path& path, CloudFormat format) {
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  const bool sem = cloud.has_semantic(), inst = cloud.has_instance();
  if (format == CloudFormat::xyz_text) {
    if (D != 3) throw InvalidInput("xyz text output needs a 3D cloud");
    if (sem != inst) throw InvalidInput("xyz text stores either both label arrays or neither");
    auto out = detail::open_out(path);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      for (int k = 0; k < D; ++k) out << (k ? " " : "") << cloud.points[i][k];
      if (sem) out << ' ' << cloud.semantic_labels[i] << ' ' << cloud.instance_labels[i];
      out << '\n';
    }
    detail::check_written(out, path);
    return;
  }
  const bool binary = format == CloudFormat::ply_binary_le;
  auto out = detail::open_out(path, binary);
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  for (int k = 0; k < D; ++k) out << "property double " << kAxes[k] << "\n";
  if (sem) out << "property int semantic\n";
  if (inst) out << "property int instance\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (binary) {
      out.write(reinterpret_cast<const char*>(cloud.points[i].data()), sizeof(double) * D);
      if (sem) out.write(reinterpret_cast<const char*>(&cloud.semantic_labels[i]), sizeof(Label));
      if (inst) out.write(reinterpret_cast<const char*>(&cloud.instance_labels[i]), sizeof(Label));
    } else {
      for (int k = 0; k < D; ++k) out << (k ? " " : "") << cloud.points[i][k];
      if (sem) out << ' ' << cloud.semantic_labels[i];
      if (inst) out << ' ' << cloud.instance_labels[i];
      out << '\n';
    }
  }
  detail::check_written(out, path);
}

inline void write_point_cloud(const AnyCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  std::visit([&](const auto& c) { write_point_cloud(c, path, format); }, cloud);
}

/// One hull as OBJ text: v records for the hull vertices, f records for
/// polygonal facets and l records for edges.
template <int D>
std::string hull_obj(const ConvexPart& part, const std::vector<Point<D>>& points) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# group " << part.group_id << " degeneracy " << to_string(part.degeneracy) << "\n";
  std::vector<std::size_t> local(part.hull_vertices.size());
  for (std::size_t v : part.hull_vertices) {
    out << "v";
    for (int k = 0; k < 3; ++k) out << ' ' << (k < D ? points[v][k] : 0.0);
    out << "\n";
  }
  auto slot = [&](std::size_t v) {
    return std::lower_bound(part.hull_vertices.begin(), part.hull_vertices.end(), v) - part.hull_vertices.begin() + 1;
  };
  for (const auto& f : part.hull_facets) {
    out << (f.size() >= 3 ? "f" : "l");
    for (std::size_t v : f) out << ' ' << slot(v);
    out << "\n";
  }
  return out.str();
}

/// Writes part_<id>.obj for each part into `dir`, returning the paths.
template <int D>
std::vector<std::filesystem::path> write_hulls(const std::vector<ConvexPart>& parts, const std::vector<Point<D>>& points,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> paths;
  for (const auto& part : parts) {
    const auto path = dir / ("part_" + std::to_string(part.group_id) + ".obj");
    auto out = detail::open_out(path);
    out << hull_obj<D>(part, points);
    detail::check_written(out, path);
    paths.push_back(path);
  }
  return paths;
}

// S3DIS -------------------------------------------------------------------------

inline const std::vector<std::string>& s3dis_classes() {
  static const std::vector<std::string> names = {"ceiling", "floor",  "wall",  "beam",     "column", "window", "door",
                                                 "chair",   "table",  "bookcase", "sofa", "board",  "stairs", "clutter"};
  return names;
}

/// Loads one S3DIS room from its Annotations directory (<class>_<n>.txt files
/// with "x y z r g b" rows). Each file is one instance; colors are dropped.
inline PointCloud<3> load_s3dis_room(const std::filesystem::path& room_dir) {
  const auto ann = room_dir / "Annotations";
  if (!std::filesystem::is_directory(ann)) throw IoError("no Annotations directory in '" + room_dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(ann))
    if (e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  PointCloud<3> cloud;
  Label instance = 0;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const std::string cls = stem.substr(0, stem.rfind('_'));
    const auto& names = s3dis_classes();
    auto it = std::find(names.begin(), names.end(), cls);
    const Label sem = static_cast<Label>(it == names.end() ? names.size() - 1 : it - names.begin());
    std::istringstream in(detail::read_file(f));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto tok = detail::split_ws(line);
      if (tok.empty()) continue;
      if (tok.size() < 3) throw ParseError("expected x y z in " + f.string(), line_no, false);
      cloud.points.push_back({detail::numeric_field(tok[0], line_no), detail::numeric_field(tok[1], line_no),
                              detail::numeric_field(tok[2], line_no)});
      cloud.semantic_labels.push_back(sem);
      cloud.instance_labels.push_back(instance);
    }
    ++instance;
  }
  cloud.validate();
  return cloud;
}

}  // namespace cid
