#pragma once

#include <vector>

#include "sfseg/consensus.hpp"
#include "sfseg/selection.hpp"

namespace sfseg {

/// Final per-frame output: objects, full-resolution labels (kUnassignedLabel
/// where no valid flow), background index, camera odometry, dense scene
/// flow (NaN where unassigned or depth1 invalid).
struct SceneResult {
  std::vector<RigidObject> objects;
  LabelMap labels;
  int background_idx = -1;
  SE3 odometry;
  Image<Eigen::Vector3f> scene_flow;
};

/// The background is the object with the largest contribution probability
/// against all other objects (self excluded from the coverage max).
/// Ties break to the lowest index.
int select_background(const std::vector<RigidObject>& objects, const PointSet& points,
                      const ConsensusModel& model);

/// Maximum-likelihood assignment of every full-resolution point to an
/// object; ties break to the lowest index. Pixels absent from the point
/// set keep kUnassignedLabel.
LabelMap assign_pixels(const std::vector<RigidObject>& objects, const PointSet& full_res,
                       const ConsensusModel& model);

/// Dense scene flow s = R*p + t - p from each pixel's assigned motion.
Image<Eigen::Vector3f> derive_scene_flow(const LabelMap& labels,
                                         const std::vector<RigidObject>& objects,
                                         const DepthMap& depth1, const CameraIntrinsics& K);

/// Camera egomotion: the inverse of the background object's scene motion.
SE3 derive_odometry(const std::vector<RigidObject>& objects, int background_idx);

}  // namespace sfseg
