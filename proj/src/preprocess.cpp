#include "sfseg/preprocess.hpp"

#include <cmath>

namespace sfseg {

void FramePairInput::validate() const {
  K.validate();
  const int w = K.width;
  const int h = K.height;
  if (!depth1.same_size(w, h) || !depth2.same_size(w, h) || !flow_fwd.same_size(w, h) ||
      !flow_bwd.same_size(w, h) || !valid1.same_size(w, h) || !valid2.same_size(w, h)) {
    throw std::invalid_argument("frame pair: map sizes do not match intrinsics");
  }
}

DepthMap warp_depth_backward(const DepthMap& depth2, const Mask& valid2, const FlowMap& flow_fwd) {
  if (!flow_fwd.same_size(depth2.width, depth2.height) || !valid2.same_size(depth2.width, depth2.height))
    throw std::invalid_argument("warp_depth_backward: size mismatch");
  DepthMap warped(depth2.width, depth2.height, kNaNf);
  for (int y = 0; y < depth2.height; ++y) {
    for (int x = 0; x < depth2.width; ++x) {
      const Eigen::Vector2f f = flow_fwd(x, y);
      if (!std::isfinite(f.x()) || !std::isfinite(f.y())) continue;
      const auto s = sample_bilinear(depth2, x + static_cast<double>(f.x()),
                                     y + static_cast<double>(f.y()), &valid2);
      if (s) warped(x, y) = static_cast<float>(*s);
    }
  }
  return warped;
}

Mask detect_occlusion(const FlowMap& flow_fwd, const FlowMap& flow_bwd, double limit_px) {
  if (!(limit_px > 0.0)) throw std::invalid_argument("detect_occlusion: limit must be > 0");
  if (!flow_bwd.same_size(flow_fwd.width, flow_fwd.height))
    throw std::invalid_argument("detect_occlusion: size mismatch");
  Mask occluded(flow_fwd.width, flow_fwd.height, 1);
  for (int y = 0; y < flow_fwd.height; ++y) {
    for (int x = 0; x < flow_fwd.width; ++x) {
      const Eigen::Vector2f f = flow_fwd(x, y);
      if (!std::isfinite(f.x()) || !std::isfinite(f.y())) continue;  // stays occluded
      const auto back = sample_bilinear(flow_bwd, x + static_cast<double>(f.x()),
                                        y + static_cast<double>(f.y()));
      if (!back) continue;
      const Eigen::Vector2d residual = f.cast<double>() + *back;
      if (residual.norm() <= limit_px) occluded(x, y) = 0;
    }
  }
  return occluded;
}

PointSet build_point_set(const FramePairInput& input, int stride, double occl_limit_px) {
  if (stride < 1) throw std::invalid_argument("build_point_set: stride must be >= 1");
  input.validate();

  const DepthMap warped = warp_depth_backward(input.depth2, input.valid2, input.flow_fwd);
  const Mask occluded = detect_occlusion(input.flow_fwd, input.flow_bwd, occl_limit_px);

  PointSet set;
  set.stride = stride;
  set.source_width = input.K.width;
  set.source_height = input.K.height;

  for (int y = 0; y < input.K.height; y += stride) {
    for (int x = 0; x < input.K.width; x += stride) {
      const Eigen::Vector2f f = input.flow_fwd(x, y);
      if (!std::isfinite(f.x()) || !std::isfinite(f.y())) continue;

      ImagePoint pt;
      pt.x = x;
      pt.y = y;
      pt.u = f.x();
      pt.v = f.y();

      const float z1 = input.depth1(x, y);
      pt.r_t1 = input.valid1(x, y) != 0 && finite_depth(z1);
      if (pt.r_t1) {
        pt.z = z1;
        pt.p_t1 = backproject(pt.x, pt.y, pt.z, input.K);
      }

      const float z2 = warped(x, y);
      pt.r_t2 = pt.r_t1 && finite_depth(z2) && occluded(x, y) == 0;
      if (pt.r_t2) {
        pt.d = input.K.fx * input.K.baseline / z2;
        pt.p_t2 = backproject(pt.x + pt.u, pt.y + pt.v, z2, input.K);
      }
      set.points.push_back(pt);
    }
  }

  if (set.points.empty()) throw DegenerateInputError("build_point_set: no grid pixel has valid flow");
  return set;
}

}  // namespace sfseg
