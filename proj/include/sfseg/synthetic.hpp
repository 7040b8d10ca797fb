#pragma once

#include <string>
#include <vector>

#include "sfseg/preprocess.hpp"

namespace sfseg {

/// Analytic rigid body: a shape posed in the reference (first camera)
/// frame plus its world-frame motion between the two timestamps.
struct BodySpec {
  enum class Shape { Box, Sphere, Plane };
  Shape shape = Shape::Plane;
  SE3 pose;     // local -> world at t1
  Vec3 extent;  // box: half sizes; sphere: radius in x; plane: half sizes in local xy
  SE3 motion;   // world-frame rigid motion t1 -> t2
};

struct NoiseSpec {
  double flow_sigma_px = 0.0;
  double depth_rel_sigma = 0.0;
  double outlier_frac = 0.0;
};

struct SceneSpec {
  CameraIntrinsics K;
  std::vector<BodySpec> bodies;
  SE3 camera_motion;  // pose of the second camera in the reference frame
  NoiseSpec noise;
  std::uint64_t rng_seed = 0;
};

/// Exact per-pixel ground truth of a rendered scene. Motions are expressed
/// the way the pipeline observes them: camera_motion^-1 * body world motion
/// (so a static body carries the inverse camera motion).
struct GroundTruth {
  LabelMap instance_map;                 // body index at t1, kUnassignedLabel off-body
  std::vector<SE3> body_motions;         // observed (reference-frame) motion per body
  SE3 camera_motion;
  Image<Eigen::Vector3d> scene_flow;     // exact (double precision), NaN off-body
  Mask occlusion;                        // t1 pixels losing the z-buffer at t2
};

struct RenderResult {
  FramePairInput input;
  GroundTruth gt;
};

/// Z-buffered ray cast of the analytic bodies at both timestamps; forward
/// and backward flow come from advecting exact surface points. Noise is
/// applied to the input maps only, after the exact render; ground truth
/// stays exact. Deterministic per rng_seed. Throws DegenerateInputError
/// when no pixel hits any body.
RenderResult render(const SceneSpec& spec);

}  // namespace sfseg
