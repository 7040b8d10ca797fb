#pragma once

#include <utility>
#include <vector>

#include "sfseg/geometry.hpp"
#include "sfseg/image.hpp"

namespace sfseg {

/// KITTI-style outlier percentages. A disparity/flow pixel is an outlier
/// iff its error exceeds 3 px absolutely AND 5% relatively; a scene-flow
/// pixel is an outlier iff any of D1, D2, OF is.
struct OutlierReport {
  double d1_pct = 0.0;
  double d2_pct = 0.0;
  double of_pct = 0.0;
  double sf_pct = 0.0;
  long d1_count = 0;
  long d2_count = 0;
  long of_count = 0;
  long sf_count = 0;
};

/// Disparity maps (px) at both timestamps plus optical flow.
struct SceneFlowMaps {
  DepthMap d1;
  DepthMap d2;
  FlowMap of;
};

struct ValidMasks {
  Mask d1;
  Mask d2;
  Mask of;
};

OutlierReport outlier_rates(const SceneFlowMaps& pred, const SceneFlowMaps& gt,
                            const ValidMasks& valid);

/// Relative pose error between two transforms over a time interval.
struct RPE {
  double transl = 0.0;  // m/s
  double rot = 0.0;     // deg/s
};

RPE relative_pose_error(const SE3& gt, const SE3& pred, double dt_seconds);

/// Merge ground-truth instances whose pairwise relative pose error (dt = 1)
/// is below both thresholds; returns the relabeled map with contiguous ids
/// (groups ordered by their smallest original id). Result is independent
/// of instance enumeration order.
LabelMap fuse_gt_objects(const LabelMap& instances, const std::vector<SE3>& motions,
                         double delta_transl, double delta_rot);

/// Exact min-cost assignment on a square matrix (O(n^3), shortest
/// augmenting paths with potentials). Returns row -> column.
std::vector<int> solve_min_cost_assignment(const std::vector<std::vector<double>>& cost);

struct SegmentationReport {
  double accuracy_pct = 0.0;
  long valid_pixels = 0;
  long matched_pixels = 0;
  std::vector<std::pair<std::int32_t, std::int32_t>> matches;  // (pred label, gt label)
};

/// Hungarian one-to-one matching of predicted and ground-truth segments by
/// intersection counts; accuracy is the matched fraction of valid pixels.
/// Sentinel predictions count as wrong, not excluded.
SegmentationReport segmentation_accuracy(const LabelMap& pred, const LabelMap& gt,
                                         const Mask& valid);

}  // namespace sfseg
