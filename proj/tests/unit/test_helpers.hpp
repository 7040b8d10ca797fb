#pragma once

#include <Eigen/Geometry>
#include <cmath>

#include "sfseg/common.hpp"
#include "sfseg/geometry.hpp"
#include "sfseg/synthetic.hpp"

namespace sfseg::test {

/// Independent rotation source for oracles (Eigen's AngleAxis, not the
/// library's Rodrigues code).
inline Mat3 oracle_rotation(Rng& rng, double max_angle = M_PI - 1e-3) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  while (axis.norm() < 1e-9) axis = Vec3(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  const double angle = rng.uniform(0.0, max_angle);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline Mat3 oracle_rotation_exp(const Vec3& aa) {
  const double angle = aa.norm();
  if (angle < 1e-14) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, aa / angle).toRotationMatrix();
}

/// Numeric standard normal CDF by Simpson integration of the density;
/// absolute error well below 1e-9 at this step count.
inline double oracle_normal_cdf(double x) {
  const double ax = std::abs(x);
  const int n = 4000;  // even
  const double h = ax / n;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double sum = pdf(0.0) + pdf(ax);
  for (int i = 1; i < n; ++i) sum += pdf(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  const double integral = sum * h / 3.0;
  return x >= 0.0 ? 0.5 + integral : 0.5 - integral;
}

/// Two-tailed inlier mass at deviation `dev` sigmas, via the CDF oracle.
inline double oracle_two_tail(double dev) { return 2.0 * (1.0 - oracle_normal_cdf(dev)); }

/// An image point whose observations are generated exactly by `motion`.
inline ImagePoint planted_point(const CameraIntrinsics& K, const SE3& motion, double x, double y,
                                double z) {
  ImagePoint p;
  p.x = x;
  p.y = y;
  p.z = z;
  p.r_t1 = true;
  p.p_t1 = backproject(x, y, z, K);
  p.p_t2 = motion.apply(p.p_t1);
  const Vec3 uvd = project_uvd(p.p_t2, K);
  p.u = uvd.x() - x;
  p.v = uvd.y() - y;
  p.d = uvd.z();
  p.r_t2 = true;
  return p;
}

/// Points drawn from several planted motions; per-point body labels are
/// returned alongside. Pixel positions are uniform over the image.
inline PointSet planted_point_set(const CameraIntrinsics& K, const std::vector<SE3>& motions,
                                  const std::vector<int>& counts, Rng& rng,
                                  std::vector<int>* labels = nullptr, double z_lo = 2.0,
                                  double z_hi = 4.0) {
  PointSet set;
  set.stride = 4;
  set.source_width = K.width;
  set.source_height = K.height;
  for (std::size_t body = 0; body < motions.size(); ++body) {
    for (int i = 0; i < counts[body]; ++i) {
      const double x = rng.uniform(4.0, K.width - 4.0);
      const double y = rng.uniform(4.0, K.height - 4.0);
      const double z = rng.uniform(z_lo, z_hi);
      set.points.push_back(planted_point(K, motions[body], x, y, z));
      if (labels) labels->push_back(static_cast<int>(body));
    }
  }
  return set;
}

inline CameraIntrinsics unit_camera(int w = 128, int h = 128) {
  CameraIntrinsics K;
  K.fx = 100.0;
  K.fy = 100.0;
  K.cx = w / 2.0;
  K.cy = h / 2.0;
  K.baseline = 0.5;
  K.width = w;
  K.height = h;
  return K;
}

/// A 128x128 scene: fronto-parallel background plane plus three moving
/// fronto-parallel patches, with a small camera motion. Patches keep the
/// per-body depth constant at t1; grazing surfaces would split along the
/// relative-depth connectivity term. Shared by the preprocess, selection,
/// deduction and acceptance suites.
inline SceneSpec three_body_scene(std::uint64_t seed = 0) {
  SceneSpec spec;
  spec.K.fx = 120.0;
  spec.K.fy = 120.0;
  spec.K.cx = 64.0;
  spec.K.cy = 64.0;
  spec.K.baseline = 0.5;
  spec.K.width = 128;
  spec.K.height = 128;
  spec.rng_seed = seed;

  spec.camera_motion =
      SE3::from_axis_angle(Vec3(0.0, 0.015, 0.0), Vec3(0.03, 0.0, 0.04));

  BodySpec background;
  background.shape = BodySpec::Shape::Plane;
  background.pose = SE3(Mat3::Identity(), Vec3(0.0, 0.0, 8.0));
  background.extent = Vec3(12.0, 12.0, 0.0);
  background.motion = SE3();
  spec.bodies.push_back(background);

  BodySpec patch1;
  patch1.shape = BodySpec::Shape::Plane;
  patch1.pose = SE3(Mat3::Identity(), Vec3(-1.2, -0.8, 4.0));
  patch1.extent = Vec3(0.7, 0.5, 0.0);
  patch1.motion = SE3::from_axis_angle(Vec3(0.0, 0.0, 0.02), Vec3(0.22, 0.05, 0.0));
  spec.bodies.push_back(patch1);

  BodySpec patch2;
  patch2.shape = BodySpec::Shape::Plane;
  patch2.pose = SE3(Mat3::Identity(), Vec3(1.2, 0.9, 5.0));
  patch2.extent = Vec3(0.6, 0.6, 0.0);
  patch2.motion = SE3::from_axis_angle(Vec3(0.01, 0.0, 0.0), Vec3(-0.18, -0.05, -0.10));
  spec.bodies.push_back(patch2);

  BodySpec patch3;
  patch3.shape = BodySpec::Shape::Plane;
  patch3.pose = SE3(Mat3::Identity(), Vec3(0.4, -1.3, 3.2));
  patch3.extent = Vec3(0.4, 0.35, 0.0);
  patch3.motion = SE3::from_axis_angle(Vec3(0.0, 0.012, 0.0), Vec3(-0.08, 0.05, 0.25));
  spec.bodies.push_back(patch3);

  return spec;
}

}  // namespace sfseg::test
