#include "sfseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace sfseg {

OutlierReport outlier_rates(const SceneFlowMaps& pred, const SceneFlowMaps& gt,
                            const ValidMasks& valid) {
  const int w = gt.d1.width;
  const int h = gt.d1.height;
  const bool sizes_ok = pred.d1.same_size(w, h) && pred.d2.same_size(w, h) &&
                        pred.of.same_size(w, h) && gt.d2.same_size(w, h) && gt.of.same_size(w, h) &&
                        valid.d1.same_size(w, h) && valid.d2.same_size(w, h) &&
                        valid.of.same_size(w, h);
  if (!sizes_ok) throw std::invalid_argument("outlier_rates: size mismatch");

  auto disparity_outlier = [](float p, float g) {
    const double err = std::abs(static_cast<double>(p) - g);
    return err > 3.0 && err > 0.05 * std::abs(static_cast<double>(g));
  };

  long d1_count = 0, d2_count = 0, of_count = 0, sf_count = 0;
  long d1_out = 0, d2_out = 0, of_out = 0, sf_out = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool v_d1 = valid.d1(x, y) && std::isfinite(pred.d1(x, y)) && std::isfinite(gt.d1(x, y));
      const bool v_d2 = valid.d2(x, y) && std::isfinite(pred.d2(x, y)) && std::isfinite(gt.d2(x, y));
      const bool v_of = valid.of(x, y) && pred.of(x, y).allFinite() && gt.of(x, y).allFinite();

      bool o_d1 = false, o_d2 = false, o_of = false;
      if (v_d1) {
        ++d1_count;
        o_d1 = disparity_outlier(pred.d1(x, y), gt.d1(x, y));
        if (o_d1) ++d1_out;
      }
      if (v_d2) {
        ++d2_count;
        o_d2 = disparity_outlier(pred.d2(x, y), gt.d2(x, y));
        if (o_d2) ++d2_out;
      }
      if (v_of) {
        ++of_count;
        const double epe = (pred.of(x, y).cast<double>() - gt.of(x, y).cast<double>()).norm();
        o_of = epe > 3.0 && epe > 0.05 * gt.of(x, y).cast<double>().norm();
        if (o_of) ++of_out;
      }
      if (v_d1 && v_d2 && v_of) {
        ++sf_count;
        if (o_d1 || o_d2 || o_of) ++sf_out;
      }
    }
  }

  if (d1_count == 0 || d2_count == 0 || of_count == 0 || sf_count == 0)
    throw DegenerateInputError("outlier_rates: a metric has zero valid pixels");

  OutlierReport report;
  report.d1_count = d1_count;
  report.d2_count = d2_count;
  report.of_count = of_count;
  report.sf_count = sf_count;
  report.d1_pct = 100.0 * d1_out / d1_count;
  report.d2_pct = 100.0 * d2_out / d2_count;
  report.of_pct = 100.0 * of_out / of_count;
  report.sf_pct = 100.0 * sf_out / sf_count;
  return report;
}

RPE relative_pose_error(const SE3& gt, const SE3& pred, double dt_seconds) {
  if (!(dt_seconds > 0.0)) throw std::invalid_argument("relative_pose_error: dt must be > 0");
  const SE3 rel = gt.inverse() * pred;
  RPE rpe;
  rpe.transl = rel.translation().norm() / dt_seconds;
  rpe.rot = axis_angle(rel.rotation()).norm() * (180.0 / M_PI) / dt_seconds;
  return rpe;
}

LabelMap fuse_gt_objects(const LabelMap& instances, const std::vector<SE3>& motions,
                         double delta_transl, double delta_rot) {
  if (!(delta_transl > 0.0) || !(delta_rot > 0.0))
    throw std::invalid_argument("fuse_gt_objects: thresholds must be > 0");

  const int n = static_cast<int>(motions.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const RPE rpe = relative_pose_error(motions[i], motions[j], 1.0);
      if (rpe.transl < delta_transl && rpe.rot < delta_rot) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  // Contiguous ids ordered by the smallest original id of each group.
  std::vector<int> remap(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (remap[root] < 0) remap[root] = next++;
    remap[i] = remap[root];
  }

  LabelMap fused(instances.width, instances.height, kUnassignedLabel);
  for (int y = 0; y < instances.height; ++y) {
    for (int x = 0; x < instances.width; ++x) {
      const std::int32_t id = instances(x, y);
      if (id == kUnassignedLabel) continue;
      if (id < 0 || id >= n) throw std::invalid_argument("fuse_gt_objects: instance id out of range");
      fused(x, y) = remap[id];
    }
  }
  return fused;
}

std::vector<int> solve_min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("assignment: matrix must be square");
  }
  if (n == 0) return {};

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

SegmentationReport segmentation_accuracy(const LabelMap& pred, const LabelMap& gt,
                                         const Mask& valid) {
  if (!pred.same_size(gt.width, gt.height) || !valid.same_size(gt.width, gt.height))
    throw std::invalid_argument("segmentation_accuracy: size mismatch");

  std::map<std::int32_t, int> pred_ids, gt_ids;
  long valid_pixels = 0;
  for (int y = 0; y < gt.height; ++y) {
    for (int x = 0; x < gt.width; ++x) {
      if (!valid(x, y)) continue;
      ++valid_pixels;
      if (pred(x, y) != kUnassignedLabel) pred_ids.emplace(pred(x, y), 0);
      if (gt(x, y) != kUnassignedLabel) gt_ids.emplace(gt(x, y), 0);
    }
  }
  if (valid_pixels == 0 || gt_ids.empty())
    throw DegenerateInputError("segmentation_accuracy: nothing to evaluate");

  int idx = 0;
  for (auto& [label, i] : pred_ids) i = idx++;
  idx = 0;
  for (auto& [label, i] : gt_ids) i = idx++;

  const int np = static_cast<int>(pred_ids.size());
  const int ng = static_cast<int>(gt_ids.size());
  const int n = std::max(np, ng);
  std::vector<std::vector<long>> counts(n, std::vector<long>(n, 0));
  for (int y = 0; y < gt.height; ++y) {
    for (int x = 0; x < gt.width; ++x) {
      if (!valid(x, y)) continue;
      if (pred(x, y) == kUnassignedLabel || gt(x, y) == kUnassignedLabel) continue;
      ++counts[pred_ids[pred(x, y)]][gt_ids[gt(x, y)]];
    }
  }

  // Max-weight matching = min-cost on negated counts (padding rows/cols
  // carry zero weight).
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost[i][j] = -static_cast<double>(counts[i][j]);
  const std::vector<int> assignment = solve_min_cost_assignment(cost);

  SegmentationReport report;
  report.valid_pixels = valid_pixels;
  std::vector<std::int32_t> pred_labels(np), gt_labels(ng);
  for (const auto& [label, i] : pred_ids) pred_labels[i] = label;
  for (const auto& [label, i] : gt_ids) gt_labels[i] = label;
  for (int i = 0; i < np; ++i) {
    const int j = assignment[i];
    if (j < 0 || j >= ng) continue;
    if (counts[i][j] <= 0) continue;
    report.matched_pixels += counts[i][j];
    report.matches.emplace_back(pred_labels[i], gt_labels[j]);
  }
  report.accuracy_pct = 100.0 * static_cast<double>(report.matched_pixels) / valid_pixels;
  return report;
}

}  // namespace sfseg
