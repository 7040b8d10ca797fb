#include "sfseg/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sfseg {

void NoiseParams::validate() const {
  if (!(sigma_u > 0.0) || !(sigma_v > 0.0) || !(sigma_d > 0.0) || !(sigma_geo_2d > 0.0) ||
      !(sigma_geo_depth_rel > 0.0)) {
    throw std::invalid_argument("noise params: all sigmas must be > 0");
  }
}

double gauss_inlier_prob(double a, double mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gauss_inlier_prob: sigma2 must be > 0");
  const double dev = std::abs(a - mu) / std::sqrt(sigma2);
  // 2 * (1 - Phi(dev)) == erfc(dev / sqrt(2))
  return std::erfc(dev * M_SQRT1_2);
}

double gauss_density(double residual, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gauss_density: sigma2 must be > 0");
  return std::exp(-0.5 * residual * residual / sigma2) / std::sqrt(2.0 * M_PI * sigma2);
}

// ---------------------------------------------------------------------------
// SpatialGrid

SpatialGrid::SpatialGrid(const std::vector<CloudPoint>& points, double cell_size)
    : cell_(cell_size) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("SpatialGrid: cell size must be > 0");
  xy_.reserve(points.size());
  cells_.reserve(points.size());
  bool first = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    xy_.emplace_back(points[i].x, points[i].y);
    const int cx = static_cast<int>(std::floor(points[i].x / cell_));
    const int cy = static_cast<int>(std::floor(points[i].y / cell_));
    cells_[key(cx, cy)].push_back(static_cast<std::uint32_t>(i));
    if (first) {
      min_cx_ = max_cx_ = cx;
      min_cy_ = max_cy_ = cy;
      first = false;
    } else {
      min_cx_ = std::min(min_cx_, cx);
      max_cx_ = std::max(max_cx_, cx);
      min_cy_ = std::min(min_cy_, cy);
      max_cy_ = std::max(max_cy_, cy);
    }
  }
}

std::uint64_t SpatialGrid::key(int cx, int cy) const {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
}

std::size_t SpatialGrid::nearest(double x, double y) const {
  auto best = k_nearest(x, y, 1);
  if (best.empty()) throw DegenerateInputError("SpatialGrid: empty index");
  return best[0];
}

std::vector<std::size_t> SpatialGrid::k_nearest(double x, double y, std::size_t k) const {
  std::vector<std::size_t> result;
  if (empty() || k == 0) return result;

  const int cx = static_cast<int>(std::floor(x / cell_));
  const int cy = static_cast<int>(std::floor(y / cell_));

  // (distance^2, index) heap of current best k.
  std::vector<std::pair<double, std::size_t>> best;
  auto consider = [&](std::uint32_t i) {
    const double dx = xy_[i].first - x;
    const double dy = xy_[i].second - y;
    const double d2 = dx * dx + dy * dy;
    if (best.size() < k) {
      best.emplace_back(d2, i);
      std::push_heap(best.begin(), best.end());
    } else if (d2 < best.front().first) {
      std::pop_heap(best.begin(), best.end());
      best.back() = {d2, i};
      std::push_heap(best.begin(), best.end());
    }
  };

  // All occupied cells lie within this Chebyshev radius of the query cell.
  const int max_ring = std::max({std::abs(min_cx_ - cx), std::abs(max_cx_ - cx),
                                 std::abs(min_cy_ - cy), std::abs(max_cy_ - cy)});
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;  // ring boundary only
        const auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const auto i : it->second) consider(i);
      }
    }
    // Points in rings > ring are at Euclidean distance >= ring * cell from
    // anywhere inside the query cell; stop once the k-th best beats that.
    if (best.size() == k) {
      const double reach = ring * cell_;
      if (best.front().first <= reach * reach) break;
    }
  }

  std::sort_heap(best.begin(), best.end());
  result.reserve(best.size());
  for (const auto& [d2, i] : best) result.push_back(i);
  return result;
}

// ---------------------------------------------------------------------------
// RigidObject

RigidObject::RigidObject(const SE3& motion, std::vector<CloudPoint> cloud, double index_cell_size)
    : motion_(motion), cloud_(std::move(cloud)) {
  if (cloud_.empty()) throw std::invalid_argument("RigidObject: finalized object needs a cloud");
  index_ = SpatialGrid(cloud_, index_cell_size);
}

// ---------------------------------------------------------------------------
// ConsensusModel

ConsensusModel::ConsensusModel(const CameraIntrinsics& K, const NoiseParams& noise)
    : K_(K), noise_(noise) {
  K_.validate();
  noise_.validate();
}

double ConsensusModel::index_cell_size(int stride) const {
  return std::max(noise_.sigma_geo_2d, static_cast<double>(stride));
}

ConsensusModel::MotionResiduals ConsensusModel::motion_residuals(const ImagePoint& D,
                                                                 const RigidObject& O) const {
  MotionResiduals r;
  if (!D.r_t1) return r;  // "else" case: no active factors
  const Vec3 fwd = O.motion().apply(D.p_t1);
  if (!(fwd.z() > 0.0)) {
    r.behind = true;
    return r;
  }
  const Vec3 uvd = project_uvd(fwd, K_);
  r.du = (D.x + D.u) - uvd.x();
  r.dv = (D.y + D.v) - uvd.y();
  if (D.r_t2) {
    r.dd = D.d - uvd.z();
    r.factors = 3;
  } else {
    r.factors = 2;
  }
  return r;
}

double ConsensusModel::motion_inlier_prob(const ImagePoint& D, const RigidObject& O) const {
  const MotionResiduals r = motion_residuals(D, O);
  if (r.behind) return 0.0;
  if (r.factors == 0) return 1.0;
  double p = gauss_inlier_prob(r.du, 0.0, noise_.sigma_u * noise_.sigma_u) *
             gauss_inlier_prob(r.dv, 0.0, noise_.sigma_v * noise_.sigma_v);
  if (r.factors == 3) p *= gauss_inlier_prob(r.dd, 0.0, noise_.sigma_d * noise_.sigma_d);
  return p;
}

double ConsensusModel::motion_likelihood(const ImagePoint& D, const RigidObject& O) const {
  const MotionResiduals r = motion_residuals(D, O);
  if (r.behind) return 0.0;
  if (r.factors == 0) return 1.0;
  double f = gauss_density(r.du, noise_.sigma_u * noise_.sigma_u) *
             gauss_density(r.dv, noise_.sigma_v * noise_.sigma_v);
  if (r.factors == 3) f *= gauss_density(r.dd, noise_.sigma_d * noise_.sigma_d);
  return f;
}

ConsensusModel::SpatialResiduals ConsensusModel::spatial_residuals(const ImagePoint& D,
                                                                   const RigidObject& O) const {
  if (!O.has_cloud()) throw DegenerateInputError("spatial model: object has no point cloud");
  SpatialResiduals r;
  const CloudPoint& nn = O.cloud()[O.index().nearest(D.x, D.y)];
  r.dx = D.x - nn.x;
  r.dy = D.y - nn.y;
  if (D.r_t1) {
    r.dz_rel = (D.z - nn.z) / (0.5 * (D.z + nn.z));
    r.factors = 3;
  } else {
    r.factors = 2;
  }
  return r;
}

double ConsensusModel::spatial_inlier_prob(const ImagePoint& D, const RigidObject& O) const {
  const SpatialResiduals r = spatial_residuals(D, O);
  double p = gauss_inlier_prob(r.dx, 0.0, noise_.sigma_geo_2d * noise_.sigma_geo_2d) *
             gauss_inlier_prob(r.dy, 0.0, noise_.sigma_geo_2d * noise_.sigma_geo_2d);
  if (r.factors == 3)
    p *= gauss_inlier_prob(r.dz_rel, 0.0, noise_.sigma_geo_depth_rel * noise_.sigma_geo_depth_rel);
  return p;
}

double ConsensusModel::spatial_likelihood(const ImagePoint& D, const RigidObject& O) const {
  const SpatialResiduals r = spatial_residuals(D, O);
  double f = gauss_density(r.dx, noise_.sigma_geo_2d * noise_.sigma_geo_2d) *
             gauss_density(r.dy, noise_.sigma_geo_2d * noise_.sigma_geo_2d);
  if (r.factors == 3)
    f *= gauss_density(r.dz_rel, noise_.sigma_geo_depth_rel * noise_.sigma_geo_depth_rel);
  return f;
}

double ConsensusModel::joint_inlier_prob(const ImagePoint& D, const RigidObject& O) const {
  return spatial_inlier_prob(D, O) * motion_inlier_prob(D, O);
}

double ConsensusModel::joint_likelihood(const ImagePoint& D, const RigidObject& O) const {
  return spatial_likelihood(D, O) * motion_likelihood(D, O);
}

double ConsensusModel::point_pair_spatial_prob(const CloudPoint& a, const CloudPoint& b) const {
  const double s2d2 = noise_.sigma_geo_2d * noise_.sigma_geo_2d;
  const double dz_rel = (a.z - b.z) / (0.5 * (a.z + b.z));
  return gauss_inlier_prob(a.x - b.x, 0.0, s2d2) * gauss_inlier_prob(a.y - b.y, 0.0, s2d2) *
         gauss_inlier_prob(dz_rel, 0.0,
                           noise_.sigma_geo_depth_rel * noise_.sigma_geo_depth_rel);
}

}  // namespace sfseg
