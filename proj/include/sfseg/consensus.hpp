#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "sfseg/geometry.hpp"
#include "sfseg/preprocess.hpp"

namespace sfseg {

/// Gaussian noise scales of the motion model (pixel units) and the spatial
/// model (pixels for x/y, relative for depth). All strictly positive.
struct NoiseParams {
  double sigma_u = 1.0;
  double sigma_v = 1.0;
  double sigma_d = 1.0;
  double sigma_geo_2d = 8.0;  // 2 * default stride
  double sigma_geo_depth_rel = 0.03;

  void validate() const;
};

/// Two-tailed Gaussian inlier probability: 2 * (1 - Phi(|a - mu| / sigma)).
/// 1 at zero deviation, strictly decreasing in |a - mu|.
double gauss_inlier_prob(double a, double mu, double sigma2);

/// Gaussian density N(residual; 0, sigma2).
double gauss_density(double residual, double sigma2);

/// Spatial-model sample: pixel coordinates plus metric depth.
struct CloudPoint {
  double x = 0.0;  // px
  double y = 0.0;  // px
  double z = 0.0;  // m
};

/// Exact 2-D nearest neighbor over pixel coordinates, uniform grid hash
/// with ring search. Owns a copy of the coordinates, so it stays valid
/// when the owning object moves.
class SpatialGrid {
 public:
  SpatialGrid() = default;
  SpatialGrid(const std::vector<CloudPoint>& points, double cell_size);

  bool empty() const { return xy_.empty(); }

  /// Index of the nearest point by squared pixel distance.
  std::size_t nearest(double x, double y) const;

  /// Up to k nearest point indices (squared pixel distance, ascending).
  std::vector<std::size_t> k_nearest(double x, double y, std::size_t k) const;

 private:
  std::vector<std::pair<double, double>> xy_;
  double cell_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
  int min_cx_ = 0, max_cx_ = -1, min_cy_ = 0, max_cy_ = -1;  // occupied-cell bbox

  std::uint64_t key(int cx, int cy) const;
};

/// A rigid object: an SE(3)-motion plus, once finalized, a point cloud
/// acting as the spatial model. Proposals carry only the motion.
class RigidObject {
 public:
  explicit RigidObject(const SE3& motion) : motion_(motion) {}
  RigidObject(const SE3& motion, std::vector<CloudPoint> cloud, double index_cell_size);

  const SE3& motion() const { return motion_; }
  bool has_cloud() const { return !cloud_.empty(); }
  const std::vector<CloudPoint>& cloud() const { return cloud_; }
  const SpatialGrid& index() const { return index_; }

 private:
  SE3 motion_;
  std::vector<CloudPoint> cloud_;
  SpatialGrid index_;
};

/// Point/object agreement measures. Holds the intrinsics (for the motion
/// model's projections) and the noise parameters; evaluations are pure.
class ConsensusModel {
 public:
  ConsensusModel(const CameraIntrinsics& K, const NoiseParams& noise);

  const CameraIntrinsics& intrinsics() const { return K_; }
  const NoiseParams& noise() const { return noise_; }

  /// Grid cell size for spatial indices: max(sigma_geo_2d, stride).
  double index_cell_size(int stride) const;

  double motion_inlier_prob(const ImagePoint& D, const RigidObject& O) const;
  double spatial_inlier_prob(const ImagePoint& D, const RigidObject& O) const;
  double joint_inlier_prob(const ImagePoint& D, const RigidObject& O) const;

  double motion_likelihood(const ImagePoint& D, const RigidObject& O) const;
  double spatial_likelihood(const ImagePoint& D, const RigidObject& O) const;
  double joint_likelihood(const ImagePoint& D, const RigidObject& O) const;

  /// Point-to-point spatial inlier probability (the model underlying the
  /// connectivity split): Gaussian factors on dx, dy, dz_rel.
  double point_pair_spatial_prob(const CloudPoint& a, const CloudPoint& b) const;

 private:
  CameraIntrinsics K_;
  NoiseParams noise_;

  struct MotionResiduals {
    int factors = 0;  // 0, 2 or 3 active Gaussian factors
    bool behind = false;
    double du = 0.0, dv = 0.0, dd = 0.0;
  };
  MotionResiduals motion_residuals(const ImagePoint& D, const RigidObject& O) const;

  struct SpatialResiduals {
    int factors = 0;  // 2 or 3
    double dx = 0.0, dy = 0.0, dz_rel = 0.0;
  };
  SpatialResiduals spatial_residuals(const ImagePoint& D, const RigidObject& O) const;
};

}  // namespace sfseg
