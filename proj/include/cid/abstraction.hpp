#pragma once

#include <optional>
#include <vector>

#include "cid/convex_hull.hpp"
#include "cid/segmentation.hpp"

namespace cid {

struct MergeStep {
  std::size_t iteration = 0;
  std::size_t first = 0;   // surviving group id (ids of the input assignment)
  std::size_t second = 0;  // absorbed group id
  double cid_g = 0.0;
};

/// Stopping rule for greedy merging plus the record of what was merged.
struct MergeSchedule {
  enum class Mode { fixed_iterations, threshold };

  Mode mode = Mode::fixed_iterations;
  std::size_t iterations = 0;  // fixed_iterations
  double threshold = 0.0;      // threshold: merge while the minimum CID_g <= threshold
  std::vector<MergeStep> history;

  static MergeSchedule fixed(std::size_t t) { return {Mode::fixed_iterations, t, 0.0, {}}; }
  static MergeSchedule until_threshold(double tau) {
    if (!(tau >= 0.0)) throw InvalidInput("merge threshold must be non-negative");
    return {Mode::threshold, 0, tau, {}};
  }
};

struct MergeResult {
  GroupAssignment assignment;
  MergeSchedule schedule;
};

/// Greedy agglomeration: each iteration merges the pair of groups with the
/// smallest cid_g (ties: lexicographically smallest pair of ids). Pair values
/// not involving the merged group are reused; the merged group is
/// re-downsampled from the union. Survivors keep their relative order in the
/// output and take the seed of the lower id.
template <int D>
MergeResult merge_groups(const GroupAssignment& assignment, const KdTree<D>& index,
                         SegmentDiscretization disc, const GroupSamplingPolicy& policy,
                         MergeSchedule schedule) {
  const std::size_t k = assignment.group_count();
  if (assignment.point_count() != index.size())
    throw InvalidInput("assignment and index cover different point counts");
  for (const auto& g : assignment.groups)
    if (g.empty()) throw InvalidInput("cannot merge an empty group");
  if (schedule.mode == MergeSchedule::Mode::fixed_iterations && k > 0 && schedule.iterations > k - 1)
    throw InvalidInput("cannot merge " + std::to_string(schedule.iterations) + " times with " +
                       std::to_string(k) + " groups");
  schedule.history.clear();

  std::vector<IndexList> groups = assignment.groups;
  std::vector<IndexList> samples(k);
  std::vector<char> alive(k, 1);
  for (std::size_t g = 0; g < k; ++g) samples[g] = policy.downsample(groups[g]);

  // pair[i * k + j], i < j
  std::vector<double> pair(k * k, 0.0);
  std::vector<std::array<std::size_t, 2>> todo;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) todo.push_back({i, j});
  auto evaluate = [&](const std::vector<std::array<std::size_t, 2>>& pairs) {
    parallel_for(pairs.size(), [&](std::size_t t) {
      const auto [i, j] = pairs[t];
      pair[i * k + j] = cid_g_sampled<D>(samples[i], samples[j], index, disc);
    });
  };
  evaluate(todo);

  std::size_t remaining = k;
  for (std::size_t iter = 0; remaining > 1; ++iter) {
    if (schedule.mode == MergeSchedule::Mode::fixed_iterations && iter >= schedule.iterations) break;
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < k; ++j) {
        if (alive[j] && pair[i * k + j] < best) {
          best = pair[i * k + j];
          bi = i;
          bj = j;
        }
      }
    }
    if (schedule.mode == MergeSchedule::Mode::threshold && best > schedule.threshold) break;

    schedule.history.push_back({iter, bi, bj, best});
    IndexList merged;
    merged.reserve(groups[bi].size() + groups[bj].size());
    std::merge(groups[bi].begin(), groups[bi].end(), groups[bj].begin(), groups[bj].end(),
               std::back_inserter(merged));
    groups[bi] = std::move(merged);
    groups[bj].clear();
    alive[bj] = 0;
    --remaining;
    samples[bi] = policy.downsample(groups[bi]);

    todo.clear();
    for (std::size_t o = 0; o < k; ++o) {
      if (!alive[o] || o == bi) continue;
      todo.push_back({std::min(o, bi), std::max(o, bi)});
    }
    evaluate(todo);
  }

  MergeResult out;
  out.schedule = std::move(schedule);
  std::vector<std::size_t> new_id(k, Neighbor::npos);
  std::size_t next = 0;
  for (std::size_t g = 0; g < k; ++g)
    if (alive[g]) new_id[g] = next++;
  std::vector<std::size_t> group_of(assignment.point_count());
  for (std::size_t g = 0; g < k; ++g)
    for (std::size_t p : groups[g]) group_of[p] = new_id[g];
  out.assignment = GroupAssignment::from_group_of(std::move(group_of), next);
  if (assignment.seed_of_group.size() == k)
    for (std::size_t g = 0; g < k; ++g)
      if (alive[g]) out.assignment.seed_of_group.push_back(assignment.seed_of_group[g]);
  return out;
}

}  // namespace cid
