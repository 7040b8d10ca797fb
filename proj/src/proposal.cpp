#include "sfseg/proposal.hpp"

#include <algorithm>
#include <cmath>

namespace sfseg {

void ProposalParams::validate() const {
  if (!(delta_rigid_dev_max > 0.0)) throw std::invalid_argument("proposal: delta_rigid_dev_max must be > 0");
  if (num_clusters < 1) throw std::invalid_argument("proposal: num_clusters must be >= 1");
  if (max_cluster_size < 2) throw std::invalid_argument("proposal: max_cluster_size must be >= 2");
}

bool rigid_pair(const ImagePoint& a, const ImagePoint& b, double delta) {
  const double dist_t1 = (a.p_t1 - b.p_t1).norm();
  const double dist_t2 = (a.p_t2 - b.p_t2).norm();
  return std::abs(dist_t2 - dist_t1) < delta;
}

std::optional<RigidCluster> grow_cluster(int seed, std::span<const int> candidates,
                                         const PointSet& points, const ProposalParams& params,
                                         Rng& rng) {
  params.validate();
  const ImagePoint& seed_pt = points.points.at(seed);
  if (!seed_pt.r_t1 || !seed_pt.r_t2)
    throw std::invalid_argument("grow_cluster: seed needs reliable depth at both timestamps");

  std::vector<int> order(candidates.begin(), candidates.end());
  rng.shuffle(order);

  RigidCluster cluster;
  cluster.members.push_back(seed);
  for (const int c : order) {
    if (static_cast<int>(cluster.members.size()) >= params.max_cluster_size) break;
    if (c == seed) continue;
    const ImagePoint& cand = points.points.at(c);
    if (!cand.r_t1 || !cand.r_t2) continue;
    bool rigid = true;
    for (const int m : cluster.members) {
      if (!rigid_pair(cand, points.points[m], params.delta_rigid_dev_max)) {
        rigid = false;
        break;
      }
    }
    if (rigid) cluster.members.push_back(c);
  }

  if (cluster.members.size() < 2) return std::nullopt;
  return cluster;
}

std::vector<RigidCluster> propose_clusters(std::span<const int> uncovered, const PointSet& points,
                                           const ProposalParams& params) {
  params.validate();
  if (uncovered.empty()) throw std::invalid_argument("propose_clusters: uncovered set is empty");

  std::vector<int> seed_pool;
  seed_pool.reserve(uncovered.size());
  for (const int i : uncovered) {
    const ImagePoint& p = points.points.at(i);
    if (p.r_t1 && p.r_t2) seed_pool.push_back(i);
  }

  std::vector<RigidCluster> clusters;
  if (seed_pool.empty()) return clusters;

  for (int k = 0; k < params.num_clusters; ++k) {
    // One stream per cluster, derived from (rng_seed, k): growth for
    // distinct seeds is order-independent and parallelizable.
    Rng rng(mix_seed(params.rng_seed, static_cast<std::uint64_t>(k)));
    const int seed = seed_pool[rng.index(seed_pool.size())];
    auto cluster = grow_cluster(seed, uncovered, points, params, rng);
    if (cluster) clusters.push_back(std::move(*cluster));
  }
  return clusters;
}

std::vector<RigidObject> propose_objects(std::span<const int> uncovered, const PointSet& points,
                                         const ProposalParams& params) {
  std::vector<RigidObject> proposals;
  for (const auto& cluster : propose_clusters(uncovered, points, params)) {
    std::vector<Vec3> src, dst;
    src.reserve(cluster.members.size());
    dst.reserve(cluster.members.size());
    for (const int i : cluster.members) {
      src.push_back(points.points[i].p_t1);
      dst.push_back(points.points[i].p_t2);
    }
    try {
      proposals.emplace_back(fit_se3(src, dst));
    } catch (const DegenerateInputError&) {
      // 2-point or collinear clusters cannot pin a rotation; drop them.
    }
  }
  return proposals;
}

}  // namespace sfseg
