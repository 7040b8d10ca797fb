#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "sfseg/common.hpp"

namespace sfseg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole camera with a stereo baseline; disparity d = fx * baseline / z.
/// RGB-D inputs use a virtual baseline so depth residuals can still be
/// expressed in disparity units.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double baseline = 0.1;
  int width = 0;
  int height = 0;

  void validate() const;
};

/// Rigid transform p -> R*p + t. Constructors enforce R in SO(3):
/// drift up to 1e-6 is re-orthonormalized via SVD, worse input is rejected.
class SE3 {
 public:
  SE3() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  SE3(const Mat3& rotation, const Vec3& translation);

  static SE3 from_axis_angle(const Vec3& axis_angle, const Vec3& translation = Vec3::Zero());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 operator*(const Vec3& p) const { return apply(p); }

  SE3 inverse() const;
  SE3 operator*(const SE3& rhs) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// Rotation validity tolerance and the re-orthonormalization cutoff.
inline constexpr double kRotationTol = 1e-9;
inline constexpr double kRotationFixTol = 1e-6;

bool is_rotation(const Mat3& R, double tol = kRotationTol);

/// Inverse pinhole projection. z must be finite and > 0.
Vec3 backproject(double x, double y, double z, const CameraIntrinsics& K);

/// Forward projection to (u, v, d) pixel/disparity coordinates.
/// Throws std::invalid_argument for points at or behind the camera.
Vec3 project_uvd(const Vec3& p, const CameraIntrinsics& K);

/// Weighted least-squares rigid fit: argmin_{R,t} sum w_i |R*src_i + t - dst_i|^2,
/// solved in closed form via SVD of the weighted cross-covariance with the
/// determinant-sign correction. Needs >= 3 positively weighted, non-collinear
/// pairs; throws DegenerateInputError otherwise.
SE3 fit_se3(std::span<const Vec3> src, std::span<const Vec3> dst,
            std::span<const double> weights = {});

/// Rotation matrix from an axis-angle vector (Rodrigues).
Mat3 rotation_exp(const Vec3& axis_angle);

/// Axis-angle vector of a rotation; |result| is the angle in [0, pi].
/// Angles near pi use the largest-diagonal column extraction branch.
Vec3 axis_angle(const Mat3& R);

}  // namespace sfseg
