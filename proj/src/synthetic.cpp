#include "sfseg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sfseg {

namespace {

constexpr double kRayEps = 1e-9;

// Smallest positive ray parameter hitting the shape, in the shape's local
// frame. The ray direction is not normalized; parameters stay in the
// caller's scale.
std::optional<double> intersect_local(const BodySpec& body, const Vec3& origin, const Vec3& dir) {
  switch (body.shape) {
    case BodySpec::Shape::Sphere: {
      const double r = body.extent.x();
      const double a = dir.squaredNorm();
      const double b = 2.0 * origin.dot(dir);
      const double c = origin.squaredNorm() - r * r;
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) return std::nullopt;
      const double sq = std::sqrt(disc);
      const double t0 = (-b - sq) / (2.0 * a);
      const double t1 = (-b + sq) / (2.0 * a);
      if (t0 > kRayEps) return t0;
      if (t1 > kRayEps) return t1;
      return std::nullopt;
    }
    case BodySpec::Shape::Box: {
      double tmin = -std::numeric_limits<double>::infinity();
      double tmax = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 3; ++i) {
        const double e = body.extent[i];
        if (std::abs(dir[i]) < 1e-15) {
          if (origin[i] < -e || origin[i] > e) return std::nullopt;
          continue;
        }
        double t0 = (-e - origin[i]) / dir[i];
        double t1 = (e - origin[i]) / dir[i];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return std::nullopt;
      }
      if (tmin > kRayEps) return tmin;
      if (tmax > kRayEps) return tmax;
      return std::nullopt;
    }
    case BodySpec::Shape::Plane: {
      if (std::abs(dir.z()) < 1e-15) return std::nullopt;
      const double t = -origin.z() / dir.z();
      if (t <= kRayEps) return std::nullopt;
      const Vec3 p = origin + t * dir;
      if (std::abs(p.x()) > body.extent.x() || std::abs(p.y()) > body.extent.y())
        return std::nullopt;
      return t;
    }
  }
  return std::nullopt;
}

struct Hit {
  int body = -1;
  double t = std::numeric_limits<double>::infinity();
};

// World-space ray against all bodies at the given poses.
Hit raycast(const std::vector<BodySpec>& bodies, const std::vector<SE3>& poses, const Vec3& origin,
            const Vec3& dir) {
  Hit hit;
  for (std::size_t k = 0; k < bodies.size(); ++k) {
    const SE3 inv = poses[k].inverse();
    const Vec3 o_local = inv.apply(origin);
    const Vec3 d_local = inv.rotation() * dir;
    const auto t = intersect_local(bodies[k], o_local, d_local);
    if (t && *t < hit.t) {
      hit.t = *t;
      hit.body = static_cast<int>(k);
    }
  }
  return hit;
}

}  // namespace

RenderResult render(const SceneSpec& spec) {
  spec.K.validate();
  if (spec.bodies.empty()) throw DegenerateInputError("render: no bodies");
  if (spec.noise.flow_sigma_px < 0.0 || spec.noise.depth_rel_sigma < 0.0 ||
      spec.noise.outlier_frac < 0.0 || spec.noise.outlier_frac > 1.0) {
    throw std::invalid_argument("render: invalid noise parameters");
  }

  const int w = spec.K.width;
  const int h = spec.K.height;
  const CameraIntrinsics& K = spec.K;

  std::vector<SE3> poses_t1, poses_t2;
  std::vector<SE3> observed;
  const SE3 cam_inv = spec.camera_motion.inverse();
  for (const auto& body : spec.bodies) {
    poses_t1.push_back(body.pose);
    poses_t2.push_back(body.motion * body.pose);
    observed.push_back(cam_inv * body.motion);
  }

  RenderResult out;
  out.input.K = K;
  out.input.depth1 = DepthMap(w, h, kNaNf);
  out.input.depth2 = DepthMap(w, h, kNaNf);
  out.input.flow_fwd = FlowMap(w, h, Eigen::Vector2f::Constant(kNaNf));
  out.input.flow_bwd = FlowMap(w, h, Eigen::Vector2f::Constant(kNaNf));
  out.input.valid1 = Mask(w, h, 0);
  out.input.valid2 = Mask(w, h, 0);
  out.gt.instance_map = LabelMap(w, h, kUnassignedLabel);
  out.gt.body_motions = observed;
  out.gt.camera_motion = spec.camera_motion;
  out.gt.scene_flow = Image<Eigen::Vector3d>(w, h, Eigen::Vector3d::Constant(kNaN));
  out.gt.occlusion = Mask(w, h, 0);

  // Second-frame raster first; the first-frame pass samples it for the
  // ground-truth occlusion test.
  const Vec3 cam_origin = spec.camera_motion.translation();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 dir_c((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
      const Vec3 dir_w = spec.camera_motion.rotation() * dir_c;
      const Hit hit = raycast(spec.bodies, poses_t2, cam_origin, dir_w);
      if (hit.body < 0) continue;
      // dir_c.z == 1, so the ray parameter equals the camera-frame depth.
      out.input.depth2(x, y) = static_cast<float>(hit.t);
      out.input.valid2(x, y) = 1;
      const Vec3 p_world = cam_origin + hit.t * dir_w;
      const Vec3 p_t1 = spec.bodies[hit.body].motion.inverse().apply(p_world);
      if (p_t1.z() > 0.0) {
        // Differencing two projections (instead of subtracting the pixel
        // index) makes zero-motion flow cancel exactly.
        const Vec3 uvd = project_uvd(p_t1, K);
        const Vec3 uvd_self = project_uvd(hit.t * dir_c, K);
        out.input.flow_bwd(x, y) = Eigen::Vector2f(static_cast<float>(uvd.x() - uvd_self.x()),
                                                   static_cast<float>(uvd.y() - uvd_self.y()));
      }
    }
  }

  bool any_hit = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 dir_c((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
      const Hit hit = raycast(spec.bodies, poses_t1, Vec3::Zero(), dir_c);
      if (hit.body < 0) continue;
      any_hit = true;
      const Vec3 p1 = hit.t * dir_c;
      out.input.depth1(x, y) = static_cast<float>(hit.t);
      out.input.valid1(x, y) = 1;
      out.gt.instance_map(x, y) = hit.body;

      const Vec3 p2 = observed[hit.body].apply(p1);  // second-camera coordinates
      out.gt.scene_flow(x, y) = p2 - p1;

      if (p2.z() > 0.0) {
        const Vec3 uvd = project_uvd(p2, K);
        const Vec3 uvd_self = project_uvd(p1, K);
        out.input.flow_fwd(x, y) = Eigen::Vector2f(static_cast<float>(uvd.x() - uvd_self.x()),
                                                   static_cast<float>(uvd.y() - uvd_self.y()));
        // Occluded iff the advected point loses the z-buffer at t2.
        const int x2 = static_cast<int>(std::lround(uvd.x()));
        const int y2 = static_cast<int>(std::lround(uvd.y()));
        if (!out.input.depth2.in_bounds(x2, y2)) {
          out.gt.occlusion(x, y) = 1;
        } else {
          const float z_buf = out.input.depth2(x2, y2);
          if (!std::isfinite(z_buf) || z_buf < p2.z() * (1.0 - 1e-3)) out.gt.occlusion(x, y) = 1;
        }
      } else {
        out.gt.occlusion(x, y) = 1;
      }
    }
  }
  if (!any_hit) throw DegenerateInputError("render: scene not visible from the reference camera");

  const bool noisy = spec.noise.flow_sigma_px > 0.0 || spec.noise.depth_rel_sigma > 0.0 ||
                     spec.noise.outlier_frac > 0.0;
  if (noisy) {
    // Independent streams per map so parameter toggles do not reshuffle
    // unrelated draws.
    Rng rng_depth(mix_seed(spec.rng_seed, 1));
    Rng rng_flow(mix_seed(spec.rng_seed, 2));
    Rng rng_outlier(mix_seed(spec.rng_seed, 3));

    auto perturb_depth = [&](DepthMap& map) {
      for (auto& z : map.data) {
        const double n = rng_depth.normal();
        if (std::isfinite(z) && spec.noise.depth_rel_sigma > 0.0)
          z = static_cast<float>(z * (1.0 + spec.noise.depth_rel_sigma * n));
      }
    };
    perturb_depth(out.input.depth1);
    perturb_depth(out.input.depth2);

    auto perturb_flow = [&](FlowMap& map) {
      for (auto& f : map.data) {
        const double nx = rng_flow.normal();
        const double ny = rng_flow.normal();
        if (f.allFinite() && spec.noise.flow_sigma_px > 0.0) {
          f.x() += static_cast<float>(spec.noise.flow_sigma_px * nx);
          f.y() += static_cast<float>(spec.noise.flow_sigma_px * ny);
        }
      }
    };
    perturb_flow(out.input.flow_fwd);
    perturb_flow(out.input.flow_bwd);

    if (spec.noise.outlier_frac > 0.0) {
      for (auto& f : out.input.flow_fwd.data) {
        if (rng_outlier.uniform() < spec.noise.outlier_frac && f.allFinite()) {
          f.x() = static_cast<float>(rng_outlier.uniform(-20.0, 20.0));
          f.y() = static_cast<float>(rng_outlier.uniform(-20.0, 20.0));
        }
      }
    }
  }

  return out;
}

}  // namespace sfseg
