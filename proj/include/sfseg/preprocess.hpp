#pragma once

#include <vector>

#include "sfseg/geometry.hpp"
#include "sfseg/image.hpp"

namespace sfseg {

/// One frame pair: depths at both timestamps, forward/backward optical
/// flow, and validity masks. All maps share the intrinsics' size.
/// NaN encodes invalid depth / flow samples.
struct FramePairInput {
  CameraIntrinsics K;
  DepthMap depth1;
  DepthMap depth2;
  FlowMap flow_fwd;
  FlowMap flow_bwd;
  Mask valid1;
  Mask valid2;

  void validate() const;
};

/// One downsampled pixel with its spatial and motion observations.
/// r_t1 = 1 implies z finite and > 0; r_t2 = 1 implies d finite and > 0
/// (and r_t1 = 1). (u, v) is always finite; points without valid flow are
/// never emitted.
struct ImagePoint {
  double x = 0.0;  // pixel coords at t1
  double y = 0.0;
  double z = kNaN;  // depth at t1 (m)
  Vec3 p_t1 = Vec3::Constant(kNaN);
  Vec3 p_t2 = Vec3::Constant(kNaN);
  double u = 0.0;  // optical flow (px)
  double v = 0.0;
  double d = kNaN;  // warped disparity at t2 (px)
  bool r_t1 = false;
  bool r_t2 = false;
};

struct PointSet {
  std::vector<ImagePoint> points;
  int stride = 1;
  int source_width = 0;
  int source_height = 0;
};

/// Backward-warp the second depth map along the forward flow:
/// warped(x, y) = bilinear(depth2, (x, y) + flow_fwd(x, y)).
/// NaN where the flow is invalid, any of the four taps is invalid, or the
/// target falls out of bounds.
DepthMap warp_depth_backward(const DepthMap& depth2, const Mask& valid2, const FlowMap& flow_fwd);

/// Forward-backward consistency check: a pixel is occluded iff
/// |flow_fwd(x,y) + flow_bwd((x,y)+flow_fwd(x,y))| > limit_px, the backward
/// sample falls out of bounds, or the forward flow itself is invalid.
Mask detect_occlusion(const FlowMap& flow_fwd, const FlowMap& flow_bwd, double limit_px);

/// Assemble the downsampled point set: one point per stride-grid node with
/// valid flow, reliability flags from the masks / warp / occlusion test,
/// sorted by (y, x). Throws DegenerateInputError when no grid pixel has
/// valid flow.
PointSet build_point_set(const FramePairInput& input, int stride, double occl_limit_px);

}  // namespace sfseg
