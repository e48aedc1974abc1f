// Command-line driver: cid <subcommand> [flags]
//
// Exit codes: 0 success, 2 usage error (bad/conflicting flags, missing
// files), 3 malformed input file, 4 invalid input values, 5 I/O failure.
// Failures print {"error": <kind>, "message": <text>} on stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cid/cid.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kParse = 3, kInvalid = 4, kIo = 5 };

int fail(ExitCode code, std::string_view kind, const std::string& message) {
  json err{{"error", kind}, {"message", message}};
  std::cerr << err.dump() << "\n";
  return code;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string format;
  std::string labels;
  std::string out_dir = ".";
  cid::RunConfig config;
  std::size_t merge_iters = 0;
  double merge_thresh = 0.0;
};

std::optional<cid::CloudFormat> format_of(const Options& o) {
  if (o.format.empty()) return std::nullopt;
  return cid::parse_cloud_format(o.format);
}

cid::AnyCloud load_input(const Options& o) {
  auto cloud = cid::parse_point_cloud(o.input, format_of(o));
  if (!o.labels.empty()) {
    auto [sem, inst] = cid::parse_label_sidecar(o.labels);
    cid::attach_labels(cloud, std::move(sem), std::move(inst));
  }
  return cloud;
}

std::string scene_name(const Options& o) { return fs::path(o.input).stem().string(); }

void write_json(const fs::path& path, const json& j) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw cid::IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw cid::IoError("failed writing '" + path.string() + "'");
}

void add_input(CLI::App* cmd, Options& o, bool labels) {
  cmd->add_option("--input", o.input, "Point cloud (.ply or xyz text)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", o.format, "Input format: ply-ascii | ply-binary-le | xyz-text");
  if (labels)
    cmd->add_option("--labels", o.labels, "Sidecar label file, one 'semantic instance' pair per line")
        ->check(CLI::ExistingFile);
}

void add_run_flags(CLI::App* cmd, Options& o) {
  auto& c = o.config;
  cmd->add_option("--subsample", c.subsample_size, "Working-resolution point budget")->capture_default_str();
  cmd->add_option("--seeds", c.k_seeds, "Number of CID-FPS seeds K")->capture_default_str();
  cmd->add_option("--disc", c.m_discretization, "Samples per segment M")->capture_default_str();
  cmd->add_option("--rng-seed", c.rng_seed, "64-bit random seed")->capture_default_str();
  cmd->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
}

// Subcommands ------------------------------------------------------------------

int cmd_synth(const std::string& scene, double density, std::uint64_t seed, const std::string& out,
              const std::string& format) {
  const auto cloud = cid::synth_scene({cid::parse_scene_kind(scene), density}, seed);
  cid::write_point_cloud(cloud, out, format.empty() ? cid::CloudFormat::ply_binary_le : cid::parse_cloud_format(format));
  std::cout << json{{"scene", scene}, {"points", cloud.size()}, {"rng_seed", seed}, {"out", out}}.dump() << "\n";
  return kOk;
}

int cmd_cid(const Options& o, std::size_t i, std::size_t j) {
  const auto cloud = load_input(o);
  return std::visit([&](const auto& c) {
    constexpr int D = std::decay_t<decltype(c)>::dim;
    if (i >= c.size() || j >= c.size()) throw cid::InvalidInput("point index out of range");
    const cid::KdTree<D> index(c);
    const double v = cid::cid_p<D>(c.points[i], c.points[j], index, o.config.discretization());
    std::cout << json{{"i", i}, {"j", j}, {"disc", o.config.m_discretization}, {"cid", v}}.dump() << "\n";
    return static_cast<int>(kOk);
  }, cloud);
}

int cmd_fps(const Options& o) {
  o.config.validate();
  const auto cloud = load_input(o);
  return std::visit([&](const auto& c) {
    constexpr int D = std::decay_t<decltype(c)>::dim;
    const auto working = cid::working_indices(c, o.config);
    const auto working_cloud = c.subset(working);
    const cid::KdTree<D> index(working_cloud);
    const auto proposal = cid::cid_fps<D>(index, o.config.k_seeds, o.config.discretization(), o.config.rng_seed);
    cid::IndexList seeds;
    for (std::size_t s : proposal.seed_indices) seeds.push_back(working[s]);
    json j;
    j["scene"] = scene_name(o);
    j["working_points"] = working.size();
    j["seed_indices"] = seeds;
    std::vector<double> coverage(proposal.coverage.begin() + 1, proposal.coverage.end());
    j["coverage"] = coverage;
    j["config"] = cid::config_json(o.config);
    j["rng_seed"] = o.config.rng_seed;
    write_json(fs::path(o.out_dir) / "fps.json", j);
    return static_cast<int>(kOk);
  }, cloud);
}

int cmd_segment(const Options& o) {
  const auto cloud = load_input(o);
  return std::visit([&](const auto& c) {
    constexpr int D = std::decay_t<decltype(c)>::dim;
    const auto run = cid::run_segmentation<D>(c, o.config);
    write_json(fs::path(o.out_dir) / "segment_report.json", cid::segmentation_report_json(scene_name(o), run, o.config));
    auto predicted = c;
    predicted.semantic_labels = run.semantic;
    predicted.instance_labels = run.instance;
    cid::write_point_cloud(predicted, fs::path(o.out_dir) / "predicted.ply", cid::CloudFormat::ply_binary_le);
    return static_cast<int>(kOk);
  }, cloud);
}

int cmd_abstract(const Options& o) {
  const auto cloud = load_input(o);
  return std::visit([&](const auto& c) {
    constexpr int D = std::decay_t<decltype(c)>::dim;
    const auto run = cid::run_abstraction<D>(c, o.config);
    const auto files = cid::write_hulls<D>(run.parts, c.points, o.out_dir);
    json j;
    j["scene"] = scene_name(o);
    j["groups"] = run.full_assignment.group_count();
    j["history"] = cid::merge_history_json(run.merged.schedule);
    json parts = json::array();
    for (std::size_t p = 0; p < run.parts.size(); ++p)
      parts.push_back({{"file", files[p].filename().string()},
                       {"points", run.full_assignment.groups[run.parts[p].group_id].size()},
                       {"vertices", run.parts[p].hull_vertices.size()},
                       {"facets", run.parts[p].hull_facets.size()},
                       {"degeneracy", cid::to_string(run.parts[p].degeneracy)}});
    j["parts"] = parts;
    if (run.report) {
      j["compactness"] = run.report->compactness;
      j["purity"] = run.report->purity;
      j["k_gt"] = run.report->k_gt;
    }
    j["config"] = cid::config_json(o.config);
    j["rng_seed"] = o.config.rng_seed;
    write_json(fs::path(o.out_dir) / "abstract_report.json", j);
    return static_cast<int>(kOk);
  }, cloud);
}

int cmd_eval(const Options& o, const std::string& predictions) {
  const auto gt = load_input(o);
  const auto pred = cid::parse_point_cloud(predictions);
  if (cid::point_count(gt) != cid::point_count(pred))
    throw cid::InvalidInput("prediction cloud has a different point count than the ground truth");
  auto labels = [](const cid::AnyCloud& c) {
    return std::visit([](const auto& pc) { return std::pair{pc.semantic_labels, pc.instance_labels}; }, c);
  };
  const auto [gs, gi] = labels(gt);
  const auto [ps, pi] = labels(pred);
  if (gs.empty() || gi.empty()) throw cid::InvalidInput("ground truth lacks semantic/instance labels");
  if (ps.empty() || pi.empty()) throw cid::InvalidInput("predictions lack semantic/instance labels");
  cid::EvaluationScene scene{cid::predicted_instances(ps, pi), cid::ground_truth_instances(gs, gi)};
  const auto ap = cid::evaluate_instances({scene}, o.config.iou_thresholds);

  std::vector<std::size_t> group_of(pi.size());
  std::map<cid::Label, std::size_t> dense;
  for (std::size_t p = 0; p < pi.size(); ++p) group_of[p] = dense.emplace(pi[p], dense.size()).first->second;
  const auto abs = cid::abstraction_report(cid::GroupAssignment::from_group_of(group_of, dense.size()), gi);

  json j;
  j["scene"] = scene_name(o);
  const auto ap_fields = cid::ap_json(ap);
  for (const auto& [k, v] : ap_fields.items()) j[k] = v;
  j["compactness"] = abs.compactness;
  j["purity"] = abs.purity;
  j["config"] = cid::config_json(o.config);
  j["rng_seed"] = o.config.rng_seed;
  write_json(fs::path(o.out_dir) / "eval_report.json", j);
  return kOk;
}

int cmd_sweep(const Options& o, std::size_t k_min, std::size_t k_max, std::size_t k_step, std::size_t runs) {
  if (k_step == 0 || k_min == 0 || k_min > k_max) throw UsageError("sweep needs 0 < k-min <= k-max and k-step > 0");
  const auto cloud = load_input(o);
  std::vector<std::size_t> ks;
  for (std::size_t k = k_min; k <= k_max; k += k_step) ks.push_back(k);
  return std::visit([&](const auto& c) {
    constexpr int D = std::decay_t<decltype(c)>::dim;
    const auto sweep = cid::run_sweep<D>(c, o.config, ks, runs);
    json entries = json::array();
    for (const auto& p : sweep) {
      json e;
      e["k"] = p.k;
      json mean;
      for (std::size_t t = 0; t < o.config.iou_thresholds.size(); ++t)
        mean[cid::threshold_key(o.config.iou_thresholds[t])] = p.mean_ap[t];
      e["mean"] = mean;
      e["rng_seeds"] = p.rng_seeds;
      json per_run = json::array();
      for (const auto& r : p.runs) per_run.push_back(cid::ap_json(r));
      e["runs"] = per_run;
      entries.push_back(e);
    }
    json j;
    j["scene"] = scene_name(o);
    j["entries"] = entries;
    j["config"] = cid::config_json(o.config);
    j["rng_seed"] = o.config.rng_seed;
    write_json(fs::path(o.out_dir) / "sweep.json", j);
    return static_cast<int>(kOk);
  }, cloud);
}

int cmd_convert_s3dis(const std::string& room, const std::string& out) {
  const auto cloud = cid::load_s3dis_room(room);
  cid::write_point_cloud(cloud, out, cid::CloudFormat::ply_binary_le);
  std::cout << json{{"room", room}, {"points", cloud.size()}, {"out", out}}.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concavity-induced distance toolkit for unoriented point clouds"};
  app.require_subcommand(1);
  Options o;

  std::string scene = "box_room", synth_out, synth_format;
  double density = 0.0;
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic scene");
  synth->add_option("--scene", scene, "l_shape | four_arcs | two_planes | box_room")->capture_default_str();
  synth->add_option("--density", density, "Points per unit length/area (0 = scene default)");
  synth->add_option("--rng-seed", o.config.rng_seed, "64-bit random seed");
  synth->add_option("--out", synth_out, "Output file")->required();
  synth->add_option("--format", synth_format, "ply-ascii | ply-binary-le | xyz-text");

  std::size_t qi = 0, qj = 0;
  auto* cidq = app.add_subcommand("cid", "CID between two points of a cloud");
  add_input(cidq, o, false);
  cidq->add_option("--i", qi, "First point index")->required();
  cidq->add_option("--j", qj, "Second point index")->required();
  cidq->add_option("--disc", o.config.m_discretization, "Samples per segment M")->capture_default_str();

  auto* fps = app.add_subcommand("fps", "CID farthest point sampling");
  add_input(fps, o, false);
  add_run_flags(fps, o);

  auto* segment = app.add_subcommand("segment", "Instance segmentation by label propagation from GT-labeled seeds");
  add_input(segment, o, true);
  add_run_flags(segment, o);

  auto* abstract = app.add_subcommand("abstract", "Merge CID groups and export their convex hulls");
  add_input(abstract, o, true);
  add_run_flags(abstract, o);
  abstract->add_option("--group-cap", o.config.group_cap, "Max points per group in CID_g")->capture_default_str();
  auto* iters = abstract->add_option("--merge-iters", o.merge_iters, "Number of merges T");
  auto* thresh = abstract->add_option("--merge-thresh", o.merge_thresh, "Stop when the smallest CID_g exceeds this");
  iters->excludes(thresh);
  thresh->excludes(iters);

  std::string predictions;
  auto* eval = app.add_subcommand("eval", "Evaluate predicted labels against ground truth");
  add_input(eval, o, true);
  eval->add_option("--predictions", predictions, "Cloud carrying predicted semantic/instance labels")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();

  std::size_t k_min = 10, k_max = 100, k_step = 10, runs = 5;
  auto* sweep = app.add_subcommand("sweep", "AP versus number of seeds");
  add_input(sweep, o, true);
  add_run_flags(sweep, o);
  sweep->add_option("--k-min", k_min, "Smallest seed count")->capture_default_str();
  sweep->add_option("--k-max", k_max, "Largest seed count")->capture_default_str();
  sweep->add_option("--k-step", k_step, "Seed count increment")->capture_default_str();
  sweep->add_option("--runs", runs, "Runs with consecutive rng seeds")->capture_default_str();

  std::string room, convert_out;
  auto* convert = app.add_subcommand("convert-s3dis", "Convert one S3DIS room to a labeled binary PLY");
  convert->add_option("--room-dir", room, "Room directory containing Annotations/")->required()->check(CLI::ExistingDirectory);
  convert->add_option("--out", convert_out, "Output .ply")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    if (*iters) o.config.merge_iterations = o.merge_iters;
    if (*thresh) o.config.merge_threshold = o.merge_thresh;
    if (*abstract && !*iters && !*thresh) throw UsageError("abstract needs --merge-iters or --merge-thresh");

    if (*synth) return cmd_synth(scene, density, o.config.rng_seed, synth_out, synth_format);
    if (*cidq) return cmd_cid(o, qi, qj);
    if (*fps) return cmd_fps(o);
    if (*segment) return cmd_segment(o);
    if (*abstract) return cmd_abstract(o);
    if (*eval) return cmd_eval(o, predictions);
    if (*sweep) return cmd_sweep(o, k_min, k_max, k_step, runs);
    if (*convert) return cmd_convert_s3dis(room, convert_out);
  } catch (const UsageError& e) {
    return fail(kUsage, "usage", e.what());
  } catch (const cid::ParseError& e) {
    return fail(kParse, "parse", e.what());
  } catch (const cid::InvalidInput& e) {
    return fail(kInvalid, "invalid_input", e.what());
  } catch (const cid::IoError& e) {
    return fail(kIo, "io", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "internal", e.what());
  }
  return kFailure;
}
