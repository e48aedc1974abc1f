#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cid/segmentation.hpp"

namespace cid {

struct InstancePrediction {
  IndexList points;  // ascending
  Label semantic = 0;
  double confidence = 1.0;
  std::size_t id = 0;
};

struct GroundTruthInstance {
  IndexList points;  // ascending
  Label semantic = 0;
  Label instance = 0;
};

inline double instance_iou(const IndexList& pred, const IndexList& gt) {
  if (pred.empty() || gt.empty()) throw InvalidInput("IoU of an empty instance");
  std::size_t inter = 0;
  auto a = pred.begin();
  auto b = gt.begin();
  while (a != pred.end() && b != gt.end()) {
    if (*a < *b) ++a;
    else if (*b < *a) ++b;
    else { ++inter; ++a; ++b; }
  }
  const std::size_t uni = pred.size() + gt.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Area under the precision envelope (all-point interpolation).
inline double interpolated_ap(const std::vector<bool>& true_positive, std::size_t gt_count) {
  if (gt_count == 0) throw InvalidInput("AP is undefined without ground truth");
  std::vector<double> recall, precision;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < true_positive.size(); ++i) {
    if (true_positive[i]) ++tp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_count));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

/// Predictions sorted by descending confidence, then size, then ascending id.
inline std::vector<const InstancePrediction*> ranked(const std::vector<InstancePrediction>& preds) {
  std::vector<const InstancePrediction*> out;
  for (const auto& p : preds) out.push_back(&p);
  std::stable_sort(out.begin(), out.end(), [](const InstancePrediction* a, const InstancePrediction* b) {
    if (a->confidence != b->confidence) return a->confidence > b->confidence;
    if (a->points.size() != b->points.size()) return a->points.size() > b->points.size();
    return a->id < b->id;
  });
  return out;
}

/// VOC-style AP for one category. Each prediction is matched to the ground
/// truth instance of highest IoU; it is a true positive when that IoU reaches
/// the threshold and the instance is not already taken. Returns nullopt when
/// the category has no ground truth.
inline std::optional<double> average_precision(const std::vector<InstancePrediction>& preds,
                                               const std::vector<GroundTruthInstance>& gts, Label category,
                                               double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
    throw InvalidInput("IoU threshold must be in (0, 1)");
  std::vector<const GroundTruthInstance*> cat_gt;
  for (const auto& g : gts)
    if (g.semantic == category) cat_gt.push_back(&g);
  if (cat_gt.empty()) return std::nullopt;

  std::vector<char> taken(cat_gt.size(), 0);
  std::vector<bool> tp;
  for (const InstancePrediction* p : ranked(preds)) {
    if (p->semantic != category) continue;
    double best = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < cat_gt.size(); ++g) {
      const double iou = instance_iou(p->points, cat_gt[g]->points);
      if (iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    const bool hit = best >= iou_threshold && !taken[best_gt];
    if (hit) taken[best_gt] = 1;
    tp.push_back(hit);
  }
  return interpolated_ap(tp, cat_gt.size());
}

struct CategoryAp {
  std::size_t gt_count = 0;
  std::vector<double> ap;  // aligned with ApReport::thresholds
};

struct ApReport {
  std::vector<double> thresholds{0.25, 0.5, 0.75};
  std::map<Label, CategoryAp> per_category;  // categories with ground truth only
  std::vector<double> mean;                  // over present categories

  double mean_at(double threshold) const {
    for (std::size_t t = 0; t < thresholds.size(); ++t)
      if (thresholds[t] == threshold) return mean.at(t);
    throw InvalidInput("threshold not in report");
  }
};

/// Scene-level inputs to AP: predictions and ground truth over one cloud.
struct EvaluationScene {
  std::vector<InstancePrediction> predictions;
  std::vector<GroundTruthInstance> ground_truth;
};

/// AP over one or more scenes, pooling instances per category. Scenes are
/// kept apart so instances from different scenes never overlap.
inline ApReport evaluate_instances(const std::vector<EvaluationScene>& scenes,
                                   std::vector<double> thresholds = {0.25, 0.5, 0.75}) {
  ApReport report;
  report.thresholds = std::move(thresholds);
  std::vector<InstancePrediction> preds;
  std::vector<GroundTruthInstance> gts;
  // Offset point indices per scene so pooled sets stay disjoint.
  std::size_t offset = 0, id_offset = 0;
  for (const auto& s : scenes) {
    std::size_t max_index = 0, max_id = 0;
    for (auto p : s.predictions) {
      for (auto& i : p.points) { max_index = std::max(max_index, i); i += offset; }
      max_id = std::max(max_id, p.id);
      p.id += id_offset;
      preds.push_back(std::move(p));
    }
    for (auto g : s.ground_truth) {
      for (auto& i : g.points) { max_index = std::max(max_index, i); i += offset; }
      gts.push_back(std::move(g));
    }
    offset += max_index + 1;
    id_offset += max_id + 1;
  }

  std::map<Label, std::size_t> counts;
  for (const auto& g : gts) ++counts[g.semantic];
  for (const auto& [cat, count] : counts) {
    CategoryAp c;
    c.gt_count = count;
    for (double t : report.thresholds) c.ap.push_back(*average_precision(preds, gts, cat, t));
    report.per_category[cat] = std::move(c);
  }
  report.mean.assign(report.thresholds.size(), 0.0);
  if (!report.per_category.empty()) {
    for (const auto& [cat, c] : report.per_category)
      for (std::size_t t = 0; t < c.ap.size(); ++t) report.mean[t] += c.ap[t];
    for (auto& m : report.mean) m /= static_cast<double>(report.per_category.size());
  }
  return report;
}

/// Ground-truth instances from per-point labels. Points with a negative
/// instance label are unannotated and ignored. The semantic label of an
/// instance is the most frequent one among its points (ties: smallest).
inline std::vector<GroundTruthInstance> ground_truth_instances(const std::vector<Label>& semantic,
                                                               const std::vector<Label>& instance) {
  if (semantic.size() != instance.size()) throw InvalidInput("label arrays differ in length");
  std::map<Label, GroundTruthInstance> by_id;
  std::map<Label, std::map<Label, std::size_t>> votes;
  for (std::size_t p = 0; p < instance.size(); ++p) {
    if (instance[p] < 0) continue;
    auto& g = by_id[instance[p]];
    g.instance = instance[p];
    g.points.push_back(p);
    ++votes[instance[p]][semantic[p]];
  }
  std::vector<GroundTruthInstance> out;
  for (auto& [id, g] : by_id) {
    std::size_t best = 0;
    for (const auto& [sem, n] : votes[id])
      if (n > best) { best = n; g.semantic = sem; }
    out.push_back(std::move(g));
  }
  return out;
}

/// Predicted instances from propagated per-point labels: one prediction per
/// distinct predicted instance label, confidence 1.0.
inline std::vector<InstancePrediction> predicted_instances(const std::vector<Label>& semantic,
                                                           const std::vector<Label>& instance) {
  std::vector<InstancePrediction> out;
  for (const auto& g : ground_truth_instances(semantic, instance)) {
    InstancePrediction p;
    p.points = g.points;
    p.semantic = g.semantic;
    p.id = static_cast<std::size_t>(g.instance);
    out.push_back(std::move(p));
  }
  return out;
}

// Abstraction metrics ----------------------------------------------------------

inline double compactness(std::size_t k_gt, std::size_t k_prime) {
  if (k_gt == 0 || k_prime == 0) throw InvalidInput("compactness needs positive group counts");
  return static_cast<double>(k_gt) / static_cast<double>(k_prime);
}

/// Size of the most frequent ground-truth instance within a group.
inline std::size_t majority_count(const IndexList& group, const std::vector<Label>& gt_instance) {
  std::map<Label, std::size_t> counts;
  std::size_t best = 0;
  for (std::size_t p : group) best = std::max(best, ++counts[gt_instance.at(p)]);
  return best;
}

struct AbstractionReport {
  double compactness = 0.0;
  double purity = 0.0;
  std::size_t k_gt = 0;
  std::size_t k_prime = 0;
  std::vector<std::size_t> majority_counts;
};

inline AbstractionReport abstraction_report(const GroupAssignment& assignment,
                                            const std::vector<Label>& gt_instance) {
  if (gt_instance.size() != assignment.point_count())
    throw InvalidInput("ground-truth instance labels must cover every point");
  if (assignment.point_count() == 0) throw InvalidInput("purity of an empty assignment");
  AbstractionReport r;
  std::map<Label, char> distinct;
  for (Label l : gt_instance) distinct[l] = 1;
  r.k_gt = distinct.size();
  std::size_t sum = 0;
  for (const auto& g : assignment.groups) {
    if (g.empty()) continue;
    r.majority_counts.push_back(majority_count(g, gt_instance));
    sum += r.majority_counts.back();
  }
  r.k_prime = r.majority_counts.size();
  r.purity = static_cast<double>(sum) / static_cast<double>(assignment.point_count());
  r.compactness = compactness(r.k_gt, r.k_prime);
  return r;
}

inline double purity(const GroupAssignment& assignment, const std::vector<Label>& gt_instance) {
  return abstraction_report(assignment, gt_instance).purity;
}

}  // namespace cid
