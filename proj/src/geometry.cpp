#include "sfseg/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

namespace sfseg {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("intrinsics: focal lengths must be > 0");
  if (!(baseline > 0.0)) throw std::invalid_argument("intrinsics: baseline must be > 0");
  if (width < 1 || height < 1) throw std::invalid_argument("intrinsics: image size must be >= 1");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw std::invalid_argument("intrinsics: principal point not finite");
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  const double ortho = (R.transpose() * R - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

namespace {

Mat3 orthonormalize(const Mat3& R) {
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 fixed = svd.matrixU() * svd.matrixV().transpose();
  if (fixed.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    fixed = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return fixed;
}

}  // namespace

SE3::SE3(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!translation_.allFinite()) throw std::invalid_argument("SE3: translation not finite");
  if (!is_rotation(rotation_, kRotationTol)) {
    if (!is_rotation(rotation_, kRotationFixTol)) {
      throw std::invalid_argument("SE3: matrix is not a rotation");
    }
    rotation_ = orthonormalize(rotation_);
  }
}

SE3 SE3::from_axis_angle(const Vec3& aa, const Vec3& translation) {
  return SE3(rotation_exp(aa), translation);
}

SE3 SE3::inverse() const {
  return SE3(rotation_.transpose().eval(), (-(rotation_.transpose() * translation_)).eval());
}

SE3 SE3::operator*(const SE3& rhs) const {
  return SE3((rotation_ * rhs.rotation_).eval(), (rotation_ * rhs.translation_ + translation_).eval());
}

Vec3 backproject(double x, double y, double z, const CameraIntrinsics& K) {
  if (!std::isfinite(z) || z <= 0.0) throw std::invalid_argument("backproject: depth must be finite and > 0");
  return Vec3((x - K.cx) * z / K.fx, (y - K.cy) * z / K.fy, z);
}

Vec3 project_uvd(const Vec3& p, const CameraIntrinsics& K) {
  if (!(p.z() > 0.0)) throw std::invalid_argument("project_uvd: point at or behind camera");
  return Vec3(K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy, K.fx * K.baseline / p.z());
}

SE3 fit_se3(std::span<const Vec3> src, std::span<const Vec3> dst, std::span<const double> weights) {
  if (src.size() != dst.size()) throw std::invalid_argument("fit_se3: size mismatch");
  if (!weights.empty() && weights.size() != src.size())
    throw std::invalid_argument("fit_se3: weight size mismatch");

  double wsum = 0.0;
  std::size_t effective = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("fit_se3: weights must be >= 0 and finite");
    if (w > 0.0) {
      wsum += w;
      ++effective;
    }
  }
  if (effective < 3 || wsum <= 0.0)
    throw DegenerateInputError("fit_se3: needs >= 3 weighted correspondences");

  Vec3 centroid_src = Vec3::Zero();
  Vec3 centroid_dst = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    centroid_src += w * src[i];
    centroid_dst += w * dst[i];
  }
  centroid_src /= wsum;
  centroid_dst /= wsum;

  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w == 0.0) continue;
    cov += w * (src[i] - centroid_src) * (dst[i] - centroid_dst).transpose();
  }
  cov /= wsum;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // Collinear or coincident source points leave the rotation about the
  // point axis unobservable: the two smallest singular values vanish.
  if (!(sv(0) > 0.0) || sv(1) <= sv(0) * 1e-12)
    throw DegenerateInputError("fit_se3: degenerate point configuration");

  Mat3 sign = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) sign(2, 2) = -1.0;
  const Mat3 R = svd.matrixV() * sign * svd.matrixU().transpose();
  const Vec3 t = centroid_dst - R * centroid_src;
  return SE3(R, t);
}

Mat3 rotation_exp(const Vec3& aa) {
  const double angle = aa.norm();
  if (angle < 1e-12) {
    // First-order term keeps exp/log mutually inverse for tiny angles.
    Mat3 W;
    W << 0, -aa.z(), aa.y(), aa.z(), 0, -aa.x(), -aa.y(), aa.x(), 0;
    return Mat3::Identity() + W;
  }
  const Vec3 axis = aa / angle;
  Mat3 W;
  W << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Mat3::Identity() + std::sin(angle) * W + (1.0 - std::cos(angle)) * W * W;
}

Vec3 axis_angle(const Mat3& R) {
  if (!is_rotation(R, kRotationFixTol)) throw std::invalid_argument("axis_angle: not a rotation");
  const double c = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double angle = std::acos(c);

  if (angle < 1e-10) {
    return Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)) * 0.5;
  }
  if (angle < M_PI - 1e-4) {
    const double s = 0.5 / std::sin(angle);
    return Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)) * s * angle;
  }

  // Near pi the skew-symmetric formula cancels catastrophically. The
  // symmetric part (R + R^T)/2 = cos(angle) I + (1 - cos) n n^T isolates
  // the axis; extract it from the largest-diagonal column.
  const Mat3 sym = 0.5 * (R + R.transpose());
  const Mat3 nnt = (sym - c * Mat3::Identity()) / (1.0 - c);
  int k = 0;
  if (nnt(1, 1) > nnt(k, k)) k = 1;
  if (nnt(2, 2) > nnt(k, k)) k = 2;
  Vec3 axis = nnt.col(k) / std::sqrt(nnt(k, k));
  axis.normalize();
  // The sign still comes from the skew part (arbitrary at exactly pi).
  const Vec3 skew(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (skew.dot(axis) < 0.0) axis = -axis;
  return axis * angle;
}

}  // namespace sfseg
