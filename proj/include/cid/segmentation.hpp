#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cid/sampling.hpp"

namespace cid {

struct LabelPair {
  Label semantic = 0;
  Label instance = 0;
  friend bool operator==(const LabelPair&, const LabelPair&) = default;
};

/// Partition of point indices into groups. Group ids are dense in [0, K).
struct GroupAssignment {
  std::vector<std::size_t> group_of;        // point -> group id
  std::vector<IndexList> groups;            // ascending indices per group
  IndexList seed_of_group;                  // empty when unknown
  std::vector<LabelPair> label_of_group;    // empty until labeled

  std::size_t group_count() const noexcept { return groups.size(); }
  std::size_t point_count() const noexcept { return group_of.size(); }
  bool labeled() const noexcept { return !label_of_group.empty(); }

  static GroupAssignment from_group_of(std::vector<std::size_t> group_of, std::size_t group_count) {
    GroupAssignment a;
    a.groups.resize(group_count);
    for (std::size_t p = 0; p < group_of.size(); ++p) {
      if (group_of[p] >= group_count) throw InvalidInput("group id out of range");
      a.groups[group_of[p]].push_back(p);
    }
    a.group_of = std::move(group_of);
    return a;
  }

  std::vector<Label> semantic_per_point() const {
    std::vector<Label> out(group_of.size());
    for (std::size_t p = 0; p < group_of.size(); ++p) out[p] = label_of_group.at(group_of[p]).semantic;
    return out;
  }

  std::vector<Label> instance_per_point() const {
    std::vector<Label> out(group_of.size());
    for (std::size_t p = 0; p < group_of.size(); ++p) out[p] = label_of_group.at(group_of[p]).instance;
    return out;
  }
};

struct LabeledSeedSet {
  IndexList seed_indices;
  std::vector<LabelPair> labels;  // one per seed
};

/// Label each seed with its ground-truth labels (the "manual labeling" step).
template <int D>
LabeledSeedSet label_seeds_from_ground_truth(const PointCloud<D>& cloud, const IndexList& seeds) {
  if (!cloud.has_semantic() || !cloud.has_instance())
    throw InvalidInput("ground-truth seed labeling needs semantic and instance labels");
  LabeledSeedSet out;
  out.seed_indices = seeds;
  for (std::size_t s : seeds) out.labels.push_back({cloud.semantic_labels.at(s), cloud.instance_labels.at(s)});
  return out;
}

/// Row-wise argmin of the cached CID matrix. Group i belongs to seed i in
/// selection order; ties go to the seed with the lowest point index.
inline GroupAssignment group_points(const SeedProposal& proposal) {
  const std::size_t k = proposal.seed_count();
  const std::size_t n = proposal.point_count();
  const CidMatrix& m = proposal.cached_matrix;
  if (k == 0 || m.col_count() != k || m.row_count() != proposal.remainder_indices.size() ||
      m.values.size() != m.row_count() * k)
    throw InvalidInput("malformed seed proposal");

  std::vector<std::size_t> group_of(n, Neighbor::npos);
  for (std::size_t g = 0; g < k; ++g) group_of.at(proposal.seed_indices[g]) = g;
  parallel_for(m.row_count(), [&](std::size_t r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      const double v = m.at(r, c);
      const double b = m.at(r, best);
      if (v < b || (v == b && proposal.seed_indices[c] < proposal.seed_indices[best])) best = c;
    }
    group_of[m.rows[r]] = best;
  });
  for (std::size_t g : group_of)
    if (g == Neighbor::npos) throw InvalidInput("malformed seed proposal: uncovered point");

  auto out = GroupAssignment::from_group_of(std::move(group_of), k);
  out.seed_of_group = proposal.seed_indices;
  return out;
}

/// Every group takes the labels of its seed.
inline GroupAssignment propagate_labels(GroupAssignment assignment, const LabeledSeedSet& seeds) {
  if (seeds.labels.size() != seeds.seed_indices.size())
    throw InvalidInput("labeled seed set needs one label pair per seed");
  if (assignment.seed_of_group.size() != assignment.group_count())
    throw InvalidInput("assignment has groups without a seed");
  std::map<std::size_t, LabelPair> by_seed;
  for (std::size_t i = 0; i < seeds.seed_indices.size(); ++i) by_seed[seeds.seed_indices[i]] = seeds.labels[i];
  assignment.label_of_group.clear();
  for (std::size_t g = 0; g < assignment.group_count(); ++g) {
    auto it = by_seed.find(assignment.seed_of_group[g]);
    if (it == by_seed.end())
      throw InvalidInput("group " + std::to_string(g) + " has no labeled seed");
    assignment.label_of_group.push_back(it->second);
  }
  return assignment;
}

/// For each query point, the index of its Euclidean-nearest source point
/// (exact; ties to the lowest index).
template <int D>
IndexList nearest_sources(const std::vector<Point<D>>& sources, const std::vector<Point<D>>& queries) {
  if (sources.empty()) throw InvalidInput("cannot upsample from an empty subsample");
  const KdTree<D> tree{std::span<const Point<D>>(sources)};
  IndexList out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) { out[i] = tree.nearest(queries[i]).index; });
  return out;
}

struct UpsampledLabels {
  std::vector<Label> semantic;  // empty if the subsample had none
  std::vector<Label> instance;
};

/// Carry subsample labels to a full-resolution cloud by nearest neighbor.
template <int D>
UpsampledLabels upsample_labels(const PointCloud<D>& labeled_subsample, const PointCloud<D>& full_cloud) {
  if (labeled_subsample.points.empty()) throw InvalidInput("cannot upsample from an empty subsample");
  if (!labeled_subsample.has_semantic() && !labeled_subsample.has_instance())
    throw InvalidInput("subsample carries no labels");
  const IndexList src = nearest_sources<D>(labeled_subsample.points, full_cloud.points);
  UpsampledLabels out;
  if (labeled_subsample.has_semantic())
    for (std::size_t s : src) out.semantic.push_back(labeled_subsample.semantic_labels[s]);
  if (labeled_subsample.has_instance())
    for (std::size_t s : src) out.instance.push_back(labeled_subsample.instance_labels[s]);
  return out;
}

}  // namespace cid
