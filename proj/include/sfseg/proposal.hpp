#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sfseg/consensus.hpp"
#include "sfseg/preprocess.hpp"

namespace sfseg {

struct ProposalParams {
  double delta_rigid_dev_max = 0.03;  // m
  int num_clusters = 64;
  int max_cluster_size = 8;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Indices into a PointSet whose pairwise 3D distances are preserved
/// between the two timestamps within delta_rigid_dev_max. Members have
/// r_t1 = r_t2 = 1.
struct RigidCluster {
  std::vector<int> members;
};

/// Pairwise rigidity test: | |p_i2 - p_j2| - |p_i1 - p_j1| | < delta.
bool rigid_pair(const ImagePoint& a, const ImagePoint& b, double delta);

/// Grow a cluster from a seed point: visit candidates in randomized order,
/// admit a candidate iff it is rigid-consistent with every current member,
/// stop at max_cluster_size. Returns nullopt when fewer than 2 members are
/// reachable. The seed must have r_t1 = r_t2 = 1.
std::optional<RigidCluster> grow_cluster(int seed, std::span<const int> candidates,
                                         const PointSet& points, const ProposalParams& params,
                                         Rng& rng);

/// Draw num_clusters seeds uniformly from the uncovered set (points with
/// r_t1 = r_t2 = 1), grow each cluster using an independent per-seed
/// stream derived from rng_seed; deterministic regardless of evaluation
/// order. Clusters of fewer than 2 members are dropped.
std::vector<RigidCluster> propose_clusters(std::span<const int> uncovered, const PointSet& points,
                                           const ProposalParams& params);

/// Fit an SE(3)-motion (p_t1 -> p_t2, uniform weights) to each cluster;
/// clusters that fail fitting are dropped. Empty result is the
/// no-proposal signal that drives termination.
std::vector<RigidObject> propose_objects(std::span<const int> uncovered, const PointSet& points,
                                         const ProposalParams& params);

}  // namespace sfseg
