#include "sfseg/deduction.hpp"

#include <algorithm>
#include <cmath>

namespace sfseg {

int select_background(const std::vector<RigidObject>& objects, const PointSet& points,
                      const ConsensusModel& model) {
  if (objects.empty()) throw DegenerateInputError("select_background: no objects");

  const std::size_t n = points.points.size();
  std::vector<std::vector<double>> joint(objects.size());
  std::vector<std::vector<double>> motion(objects.size());
  for (std::size_t k = 0; k < objects.size(); ++k) {
    joint[k].resize(n);
    motion[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      joint[k][i] = model.joint_inlier_prob(points.points[i], objects[k]);
      motion[k][i] = model.motion_inlier_prob(points.points[i], objects[k]);
    }
  }

  int best = 0;
  double best_contribution = -1.0;
  for (std::size_t k = 0; k < objects.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double cover = 0.0;
      for (std::size_t other = 0; other < objects.size(); ++other) {
        if (other == k) continue;
        cover = std::max(cover, joint[other][i]);
      }
      sum += std::max(motion[k][i] - cover, 0.0);
    }
    const double contribution = sum / static_cast<double>(n);
    if (contribution > best_contribution) {
      best_contribution = contribution;
      best = static_cast<int>(k);
    }
  }
  return best;
}

LabelMap assign_pixels(const std::vector<RigidObject>& objects, const PointSet& full_res,
                       const ConsensusModel& model) {
  if (objects.empty()) throw DegenerateInputError("assign_pixels: no objects");

  LabelMap labels(full_res.source_width, full_res.source_height, kUnassignedLabel);
  for (const ImagePoint& p : full_res.points) {
    int best = 0;
    double best_likelihood = -1.0;
    for (std::size_t k = 0; k < objects.size(); ++k) {
      const double f = model.joint_likelihood(p, objects[k]);
      if (f > best_likelihood) {
        best_likelihood = f;
        best = static_cast<int>(k);
      }
    }
    labels(static_cast<int>(p.x), static_cast<int>(p.y)) = best;
  }
  return labels;
}

Image<Eigen::Vector3f> derive_scene_flow(const LabelMap& labels,
                                         const std::vector<RigidObject>& objects,
                                         const DepthMap& depth1, const CameraIntrinsics& K) {
  if (!depth1.same_size(labels.width, labels.height))
    throw std::invalid_argument("derive_scene_flow: size mismatch");

  Image<Eigen::Vector3f> flow(labels.width, labels.height, Eigen::Vector3f::Constant(kNaNf));
  for (int y = 0; y < labels.height; ++y) {
    for (int x = 0; x < labels.width; ++x) {
      const std::int32_t label = labels(x, y);
      if (label == kUnassignedLabel) continue;
      const float z = depth1(x, y);
      if (!finite_depth(z)) continue;
      const Vec3 p = backproject(x, y, z, K);
      const Vec3 s = objects.at(label).motion().apply(p) - p;
      flow(x, y) = s.cast<float>();
    }
  }
  return flow;
}

SE3 derive_odometry(const std::vector<RigidObject>& objects, int background_idx) {
  if (background_idx < 0 || background_idx >= static_cast<int>(objects.size()))
    throw std::invalid_argument("derive_odometry: invalid background index");
  return objects[static_cast<std::size_t>(background_idx)].motion().inverse();
}

}  // namespace sfseg
