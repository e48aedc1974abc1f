#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace cid;

namespace {

const PointCloud<3>& as3(const AnyCloud& c) { return std::get<PointCloud<3>>(c); }

std::size_t count_prefix(const std::string& text, const std::string& prefix) {
  std::size_t n = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) == 0) ++n;
  return n;
}

PointCloud<3> labeled_room() { return synth_scene({SceneKind::box_room, 8.0}, 3); }

}  // namespace

TEST(ParsePly, AsciiThreeVertices) {
  const std::string ply =
      "ply\nformat ascii 1.0\ncomment tiny\nelement vertex 3\nproperty float x\nproperty float y\n"
      "property float z\nproperty uchar red\nend_header\n0 0 0 255\n1 0 0 0\n0 1 0.5 7\n";
  const auto c = parse_point_cloud_string(ply);
  ASSERT_EQ(dimension(c), 3);
  EXPECT_EQ(as3(c).size(), 3u);
  EXPECT_EQ(as3(c).points[2][2], 0.5);
  EXPECT_FALSE(as3(c).has_semantic());
}

TEST(ParsePly, LabelsAndExtraElements) {
  const std::string ply =
      "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\nproperty double z\n"
      "property int semantic_label\nproperty int instance\nelement face 1\nproperty list uchar int vertex_indices\n"
      "end_header\n0 0 0 3 9\n1 1 1 4 8\n3 0 1 1\n";
  const auto c = as3(parse_point_cloud_string(ply));
  EXPECT_EQ(c.semantic_labels, (std::vector<Label>{3, 4}));
  EXPECT_EQ(c.instance_labels, (std::vector<Label>{9, 8}));
}

TEST(ParsePly, TwoDimensionalWithoutZ) {
  const std::string ply = "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\nend_header\n0 0\n1 2\n";
  const auto c = parse_point_cloud_string(ply);
  EXPECT_EQ(dimension(c), 2);
  EXPECT_EQ(point_count(c), 2u);
}

TEST(ParseXyz, TwoPoints) {
  const auto c = parse_point_cloud_string("0 0 0\n1 0 0\n", CloudFormat::xyz_text);
  EXPECT_EQ(point_count(c), 2u);
  const auto l = as3(parse_point_cloud_string("# comment\n0 0 0 1 2\n1 0 0 3 4\n", CloudFormat::xyz_text));
  EXPECT_EQ(l.instance_labels, (std::vector<Label>{2, 4}));
}

TEST(RoundTrip, BinaryIsBitIdentical) {
  support::TempDir dir("rt");
  auto room = labeled_room();
  room.points[0] = {0.1 + 0.2, 1e-300, -123456.789012345678};
  write_point_cloud(room, dir / "a.ply", CloudFormat::ply_binary_le);
  const auto back = as3(parse_point_cloud(dir / "a.ply"));
  EXPECT_EQ(back.points, room.points);
  EXPECT_EQ(back.semantic_labels, room.semantic_labels);
  EXPECT_EQ(back.instance_labels, room.instance_labels);
}

TEST(RoundTrip, TextFormatsKeepValuesAndLabels) {
  support::TempDir dir("rt_text");
  const auto room = labeled_room();
  for (auto f : {CloudFormat::ply_ascii, CloudFormat::xyz_text}) {
    write_point_cloud(room, dir / "b.txt", f);
    const auto back = as3(parse_point_cloud(dir / "b.txt", f));
    EXPECT_EQ(back.points, room.points);
    EXPECT_EQ(back.instance_labels, room.instance_labels);
  }
}

TEST(RoundTrip, UnlabeledCloudOmitsLabelProperties) {
  support::TempDir dir("rt_nolabel");
  const auto c = support::random_cloud<3>(10, 1);
  write_point_cloud(c, dir / "c.ply", CloudFormat::ply_ascii);
  const auto text = support::slurp(dir / "c.ply");
  EXPECT_EQ(text.find("semantic"), std::string::npos);
  EXPECT_EQ(text.find("instance"), std::string::npos);
  EXPECT_FALSE(as3(parse_point_cloud(dir / "c.ply")).has_instance());
}

TEST(RoundTrip, UnwritablePathIsIoError) {
  EXPECT_THROW(write_point_cloud(support::random_cloud<3>(3, 1), "/nonexistent_dir/x/y.ply", CloudFormat::ply_ascii),
               IoError);
  EXPECT_THROW(parse_point_cloud("/nonexistent_dir/x.ply"), IoError);
}

TEST(Mutations, EveryBinaryTruncationIsRejected) {
  support::TempDir dir("trunc");
  const auto c = synth_scene({SceneKind::two_planes, 20.0}, 1);
  write_point_cloud(c, dir / "d.ply", CloudFormat::ply_binary_le);
  const std::string data = support::slurp(dir / "d.ply");
  for (std::size_t cut = 0; cut < data.size(); cut += (cut < 400 ? 1 : 7))
    EXPECT_THROW(parse_point_cloud_string(data.substr(0, cut)), ParseError) << "cut at " << cut;
  EXPECT_THROW(parse_point_cloud_string(data + "xx"), ParseError);
}

TEST(Mutations, AsciiTruncationAndCountMismatch) {
  support::TempDir dir("ascii_mut");
  const auto c = synth_scene({SceneKind::two_planes, 20.0}, 1);
  write_point_cloud(c, dir / "e.ply", CloudFormat::ply_ascii);
  const std::string data = support::slurp(dir / "e.ply");
  // Dropping only the final newline leaves a complete file; any shorter cut
  // loses at least one declared vertex.
  for (std::size_t cut = 0; cut + 1 < data.size(); cut += 5)
    EXPECT_THROW(parse_point_cloud_string(data.substr(0, cut)), ParseError) << "cut at " << cut;
  std::string more = data;
  more.replace(more.find("element vertex"), 14 + 1 + std::to_string(c.size()).size(),
               "element vertex " + std::to_string(c.size() + 1));
  EXPECT_THROW(parse_point_cloud_string(more), ParseError);
  std::string fewer = data;
  fewer.replace(fewer.find("element vertex"), 14 + 1 + std::to_string(c.size()).size(),
                "element vertex " + std::to_string(c.size() - 1));
  EXPECT_THROW(parse_point_cloud_string(fewer), ParseError);
}

TEST(Mutations, MalformedHeadersAndFields) {
  const std::vector<std::string> bad{
      "",
      "plx\nformat ascii 1.0\nend_header\n",
      "ply\nformat ascii 2.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n",
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n0 0 0\n",
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty foo x\nend_header\n0\n",
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 a 0\n",
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty float y\nproperty float z\nend_header\n0 0\n",
      "ply\nformat binary_big_endian 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n",
      "ply\nformat ascii 1.0\nelement vertex -3\nproperty float x\nproperty float y\nend_header\n",
  };
  for (const auto& s : bad) EXPECT_THROW(parse_point_cloud_string(s), ParseError) << s;
  EXPECT_THROW(parse_point_cloud_string("0 0\n1 1 1\n", CloudFormat::xyz_text), ParseError);
  EXPECT_THROW(parse_point_cloud_string("0 0 nan\n", CloudFormat::xyz_text), ParseError);
  EXPECT_THROW(parse_point_cloud_string("0 0 0 1 2\n1 1 1\n", CloudFormat::xyz_text), ParseError);
  EXPECT_THROW(parse_point_cloud_string("", CloudFormat::xyz_text), ParseError);
}

TEST(ParseError, ReportsLocation) {
  try {
    parse_point_cloud_string("0 0 0\n1 1\n", CloudFormat::xyz_text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), 2u);
    EXPECT_FALSE(e.is_byte_offset());
  }
}

TEST(LabelSidecar, AttachesAndValidates) {
  support::TempDir dir("sidecar");
  support::spit(dir / "l.txt", "1 10\n2 20\n");
  auto c = parse_point_cloud_string("0 0 0\n1 0 0\n", CloudFormat::xyz_text);
  auto [sem, inst] = parse_label_sidecar(dir / "l.txt");
  attach_labels(c, sem, inst);
  EXPECT_EQ(as3(c).instance_labels, (std::vector<Label>{10, 20}));
  auto three = parse_point_cloud_string("0 0 0\n1 0 0\n2 0 0\n", CloudFormat::xyz_text);
  EXPECT_THROW(attach_labels(three, sem, inst), InvalidInput);
  support::spit(dir / "bad.txt", "1\n");
  EXPECT_THROW(parse_label_sidecar(dir / "bad.txt"), ParseError);
}

TEST(HullExport, TetrahedronObj) {
  const std::vector<Point<3>> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto part = convex_hull<3>(pts, {0, 1, 2, 3}, 5);
  const auto obj = hull_obj<3>(part, pts);
  EXPECT_EQ(count_prefix(obj, "v "), 4u);
  EXPECT_EQ(count_prefix(obj, "f "), 4u);

  support::TempDir dir("obj");
  const auto files = write_hulls<3>({part}, pts, dir.path());
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0].filename(), "part_5.obj");
  EXPECT_EQ(support::slurp(files[0]), obj);
}

TEST(HullExport, LinearPartUsesEdgeRecord) {
  const std::vector<Point<3>> pts{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  const auto obj = hull_obj<3>(convex_hull<3>(pts, {0, 1, 2}), pts);
  EXPECT_EQ(count_prefix(obj, "v "), 2u);
  EXPECT_EQ(count_prefix(obj, "l "), 1u);
}

TEST(Synth, TwoPlanesCountMatchesArea) {
  for (double d : {100.0, 400.0, 2500.0}) {
    const auto c = synth_scene({SceneKind::two_planes, d}, 1);
    EXPECT_NEAR(static_cast<double>(c.size()), 2.0 * d, 0.01 * 2.0 * d);
    std::set<Label> inst(c.instance_labels.begin(), c.instance_labels.end());
    EXPECT_EQ(inst.size(), 2u);
  }
}

TEST(Synth, BoxRoomHasSevenInstances) {
  const auto c = synth_scene({SceneKind::box_room, 0.0}, 2);
  std::set<Label> inst(c.instance_labels.begin(), c.instance_labels.end());
  EXPECT_EQ(inst.size(), 7u);
  EXPECT_NEAR(static_cast<double>(c.size()), 8000.0, 400.0);
  c.validate();
}

TEST(Synth, DeterministicAndSeedDependent) {
  const auto a = synth_scene({SceneKind::box_room, 20.0}, 5);
  EXPECT_EQ(a.points, synth_scene({SceneKind::box_room, 20.0}, 5).points);
  EXPECT_NE(a.points, synth_scene({SceneKind::box_room, 20.0}, 6).points);
}

TEST(Synth, UnknownSceneAndBadDensity) {
  EXPECT_THROW(parse_scene_kind("castle"), InvalidInput);
  EXPECT_EQ(parse_scene_kind("four_arcs"), SceneKind::four_arcs);
  EXPECT_THROW(synth_scene({SceneKind::two_planes, -1.0}, 0), InvalidInput);
}

TEST(RunConfig, ValidatesValues) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.k_seeds = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.iou_thresholds = {0.5, 1.0};
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.merge_iterations = 3;
  c.merge_threshold = 0.1;
  EXPECT_THROW(c.validate(), InvalidInput);
}
