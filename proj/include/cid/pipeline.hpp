#pragma once

// End-to-end runs used by the command-line tool: working-resolution
// subsampling, CID-FPS, grouping, labeling or merging, upsampling back to
// full resolution, and evaluation. Also the JSON report layout.

#include <nlohmann/json.hpp>

#include <cmath>
#include <optional>
#include <string>

#include "cid/abstraction.hpp"
#include "cid/convex_hull.hpp"
#include "cid/metrics.hpp"
#include "cid/sampling.hpp"
#include "cid/segmentation.hpp"

namespace cid {

struct RunConfig {
  std::size_t subsample_size = 20000;
  std::size_t k_seeds = 100;
  std::size_t m_discretization = SegmentDiscretization::kDefaultSamples;
  std::size_t group_cap = GroupSamplingPolicy::kDefaultCap;
  std::optional<std::size_t> merge_iterations;
  std::optional<double> merge_threshold;
  std::uint64_t rng_seed = 0;
  std::vector<double> iou_thresholds{0.25, 0.5, 0.75};

  void validate() const {
    if (subsample_size == 0 || k_seeds == 0 || m_discretization < 2 || group_cap == 0)
      throw InvalidInput("run configuration values must be positive (discretization >= 2)");
    if (merge_iterations && merge_threshold)
      throw InvalidInput("merge iterations and merge threshold are mutually exclusive");
    if (merge_threshold && !(*merge_threshold >= 0.0)) throw InvalidInput("merge threshold must be non-negative");
    for (double t : iou_thresholds)
      if (!(t > 0.0 && t < 1.0)) throw InvalidInput("IoU thresholds must be in (0, 1)");
  }

  SegmentDiscretization discretization() const { return SegmentDiscretization(m_discretization); }
  GroupSamplingPolicy sampling_policy() const { return GroupSamplingPolicy(group_cap); }

  /// Seed for the working-resolution subsample, derived from rng_seed.
  std::uint64_t subsample_seed() const { return rng_seed ^ 0x9E3779B97F4A7C15ull; }
};

/// Uniform random subsample of at most config.subsample_size points.
template <int D>
IndexList working_indices(const PointCloud<D>& cloud, const RunConfig& config) {
  return random_subset(cloud.size(), config.subsample_size, config.subsample_seed());
}

struct SegmentationRun {
  IndexList working;            // subsample indices into the full cloud
  SeedProposal proposal;        // indices into the working cloud
  GroupAssignment assignment;   // labeled, over the working cloud
  std::vector<Label> semantic;  // predicted, full resolution
  std::vector<Label> instance;
  ApReport ap;
  AbstractionReport instances;  // predicted instances vs ground truth, full resolution
};

/// Labels seeds from ground truth, propagates to the working cloud, upsamples
/// to full resolution and evaluates. Seeds sharing a ground-truth instance
/// form one predicted instance.
template <int D>
SegmentationRun finish_segmentation(const PointCloud<D>& full, const IndexList& working,
                                    const PointCloud<D>& working_cloud, SeedProposal proposal,
                                    const std::vector<double>& thresholds) {
  SegmentationRun run;
  run.working = working;
  run.assignment = propagate_labels(group_points(proposal),
                                    label_seeds_from_ground_truth(working_cloud, proposal.seed_indices));
  run.proposal = std::move(proposal);

  PointCloud<D> labeled = working_cloud;
  labeled.semantic_labels = run.assignment.semantic_per_point();
  labeled.instance_labels = run.assignment.instance_per_point();
  if (working.size() == full.size()) {
    run.semantic = labeled.semantic_labels;
    run.instance = labeled.instance_labels;
  } else {
    auto up = upsample_labels<D>(labeled, full);
    run.semantic = std::move(up.semantic);
    run.instance = std::move(up.instance);
  }

  EvaluationScene scene{predicted_instances(run.semantic, run.instance),
                        ground_truth_instances(full.semantic_labels, full.instance_labels)};
  run.ap = evaluate_instances({scene}, thresholds);

  std::vector<std::size_t> group_of(full.size());
  std::map<Label, std::size_t> dense;
  for (std::size_t p = 0; p < full.size(); ++p) group_of[p] = dense.emplace(run.instance[p], dense.size()).first->second;
  run.instances = abstraction_report(GroupAssignment::from_group_of(std::move(group_of), dense.size()),
                                     full.instance_labels);
  return run;
}

template <int D>
SegmentationRun run_segmentation(const PointCloud<D>& full, const RunConfig& config) {
  config.validate();
  full.validate();
  if (!full.has_semantic() || !full.has_instance())
    throw InvalidInput("segmentation needs ground-truth semantic and instance labels to label seeds");
  const IndexList working = working_indices(full, config);
  const PointCloud<D> working_cloud = full.subset(working);
  const KdTree<D> index(working_cloud);
  auto proposal = cid_fps<D>(index, config.k_seeds, config.discretization(), config.rng_seed);
  return finish_segmentation<D>(full, working, working_cloud, std::move(proposal), config.iou_thresholds);
}

struct SweepPoint {
  std::size_t k = 0;
  std::vector<std::uint64_t> rng_seeds;
  std::vector<ApReport> runs;
  std::vector<double> mean_ap;  // per threshold, averaged over runs
};

/// Seed-count sweep: for each rng seed, one FPS run to max(ks) whose prefixes
/// give the proposals for every k.
template <int D>
std::vector<SweepPoint> run_sweep(const PointCloud<D>& full, const RunConfig& config, const std::vector<std::size_t>& ks,
                                  std::size_t runs) {
  config.validate();
  full.validate();
  if (runs == 0 || ks.empty()) throw InvalidInput("sweep needs at least one run and one seed count");
  std::vector<SweepPoint> out(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) out[i].k = ks[i];
  for (std::size_t r = 0; r < runs; ++r) {
    RunConfig rc = config;
    rc.rng_seed = config.rng_seed + r;
    const IndexList working = working_indices(full, rc);
    const PointCloud<D> working_cloud = full.subset(working);
    const KdTree<D> index(working_cloud);
    auto proposals = cid_fps_prefixes<D>(index, ks, rc.discretization(), rc.rng_seed);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      auto seg = finish_segmentation<D>(full, working, working_cloud, std::move(proposals[i]), rc.iou_thresholds);
      out[i].rng_seeds.push_back(rc.rng_seed);
      out[i].runs.push_back(std::move(seg.ap));
    }
  }
  for (auto& p : out) {
    p.mean_ap.assign(config.iou_thresholds.size(), 0.0);
    for (const auto& rep : p.runs)
      for (std::size_t t = 0; t < rep.mean.size(); ++t) p.mean_ap[t] += rep.mean[t];
    for (auto& v : p.mean_ap) v /= static_cast<double>(p.runs.size());
  }
  return out;
}

struct AbstractionRun {
  IndexList working;
  SeedProposal proposal;
  GroupAssignment initial;          // over the working cloud
  MergeResult merged;               // over the working cloud
  GroupAssignment full_assignment;  // merged groups upsampled to full resolution
  std::vector<ConvexPart> parts;    // hulls over the full cloud
  std::optional<AbstractionReport> report;
};

template <int D>
AbstractionRun run_abstraction(const PointCloud<D>& full, const RunConfig& config) {
  config.validate();
  full.validate();
  if (!config.merge_iterations && !config.merge_threshold)
    throw InvalidInput("abstraction needs a merge iteration count or a merge threshold");
  AbstractionRun run;
  run.working = working_indices(full, config);
  const PointCloud<D> working_cloud = full.subset(run.working);
  const KdTree<D> index(working_cloud);
  run.proposal = cid_fps<D>(index, config.k_seeds, config.discretization(), config.rng_seed);
  run.initial = group_points(run.proposal);
  const MergeSchedule schedule = config.merge_iterations ? MergeSchedule::fixed(*config.merge_iterations)
                                                         : MergeSchedule::until_threshold(*config.merge_threshold);
  run.merged = merge_groups<D>(run.initial, index, config.discretization(), config.sampling_policy(), schedule);

  if (run.working.size() == full.size()) {
    run.full_assignment = run.merged.assignment;
  } else {
    const IndexList src = nearest_sources<D>(working_cloud.points, full.points);
    std::vector<std::size_t> group_of(full.size());
    for (std::size_t p = 0; p < full.size(); ++p) group_of[p] = run.merged.assignment.group_of[src[p]];
    run.full_assignment = GroupAssignment::from_group_of(std::move(group_of), run.merged.assignment.group_count());
    run.full_assignment.seed_of_group = run.merged.assignment.seed_of_group;
  }
  std::vector<IndexList> nonempty;
  for (const auto& g : run.full_assignment.groups)
    if (!g.empty()) nonempty.push_back(g);
  run.parts = convex_hulls<D>(full, nonempty);
  if (full.has_instance()) run.report = abstraction_report(run.full_assignment, full.instance_labels);
  return run;
}

// JSON -----------------------------------------------------------------------

inline std::string threshold_key(double t) {
  return "ap" + std::to_string(static_cast<int>(std::lround(t * 100.0)));
}

inline nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["subsample"] = c.subsample_size;
  j["seeds"] = c.k_seeds;
  j["disc"] = c.m_discretization;
  j["group_cap"] = c.group_cap;
  if (c.merge_iterations) j["merge_iters"] = *c.merge_iterations;
  if (c.merge_threshold) j["merge_thresh"] = *c.merge_threshold;
  j["rng_seed"] = c.rng_seed;
  j["iou_thresholds"] = c.iou_thresholds;
  return j;
}

inline nlohmann::ordered_json ap_json(const ApReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (const auto& [cat, c] : r.per_category) {
    nlohmann::ordered_json e;
    for (std::size_t t = 0; t < r.thresholds.size(); ++t) e[threshold_key(r.thresholds[t])] = c.ap[t];
    e["gt_instances"] = c.gt_count;
    cats[std::to_string(cat)] = e;
  }
  j["per_category"] = cats;
  nlohmann::ordered_json mean;
  for (std::size_t t = 0; t < r.thresholds.size(); ++t) mean[threshold_key(r.thresholds[t])] = r.mean[t];
  j["mean"] = mean;
  j["interpolation"] = "all-point (VOC 2010+)";
  return j;
}

inline nlohmann::ordered_json abstraction_json(const AbstractionReport& r) {
  nlohmann::ordered_json j;
  j["compactness"] = r.compactness;
  j["purity"] = r.purity;
  j["k_gt"] = r.k_gt;
  j["k_prime"] = r.k_prime;
  j["majority_counts"] = r.majority_counts;
  return j;
}

inline nlohmann::ordered_json segmentation_report_json(const std::string& scene, const SegmentationRun& run,
                                                       const RunConfig& config) {
  nlohmann::ordered_json j;
  j["scene"] = scene;
  const auto ap = ap_json(run.ap);
  for (const auto& [k, v] : ap.items()) j[k] = v;
  j["compactness"] = run.instances.compactness;
  j["purity"] = run.instances.purity;
  j["config"] = config_json(config);
  j["rng_seed"] = config.rng_seed;
  j["seed_indices"] = [&] {
    IndexList full_ids;
    for (std::size_t s : run.proposal.seed_indices) full_ids.push_back(run.working[s]);
    return full_ids;
  }();
  return j;
}

inline nlohmann::ordered_json merge_history_json(const MergeSchedule& s) {
  nlohmann::ordered_json h = nlohmann::ordered_json::array();
  for (const auto& step : s.history)
    h.push_back({{"iteration", step.iteration}, {"merged", {step.first, step.second}}, {"cid_g", step.cid_g}});
  return h;
}

}  // namespace cid
