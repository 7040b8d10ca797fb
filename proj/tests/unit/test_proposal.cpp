#include <doctest.h>

#include <numeric>

#include "sfseg/proposal.hpp"
#include "test_helpers.hpp"

using namespace sfseg;

namespace {

std::vector<int> all_indices(const PointSet& set) {
  std::vector<int> idx(set.points.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

/// Two laterally separated same-depth patches; body 1 translates along x
/// so every cross-body pair violates rigidity by a wide margin.
PointSet two_body_set(Rng& rng, double shift, std::vector<int>* labels) {
  const auto K = test::unit_camera();
  PointSet set;
  set.stride = 4;
  set.source_width = K.width;
  set.source_height = K.height;
  const SE3 still;
  const SE3 moving(Mat3::Identity(), Vec3(shift, 0.0, 0.0));
  for (int i = 0; i < 40; ++i) {
    // body 0 on the left, body 1 on the right, ~0.55 m gap at z = 3.5
    const double z = 3.5;
    const double xl = rng.uniform(20.0, 45.0);
    const double yl = rng.uniform(20.0, 108.0);
    set.points.push_back(test::planted_point(K, still, xl, yl, z));
    labels->push_back(0);
    const double xr = rng.uniform(83.0, 108.0);
    const double yr = rng.uniform(20.0, 108.0);
    set.points.push_back(test::planted_point(K, moving, xr, yr, z));
    labels->push_back(1);
  }
  return set;
}

}  // namespace

TEST_SUITE("proposal") {

TEST_CASE("growth on a single rigid body reaches the cluster size cap") {
  Rng source(1);
  const auto K = test::unit_camera();
  std::vector<SE3> motions = {SE3::from_axis_angle(Vec3(0, 0, 0.02), Vec3(0.1, 0, 0))};
  const PointSet set = test::planted_point_set(K, motions, {60}, source);

  ProposalParams params;
  Rng rng(7);
  const auto cluster = grow_cluster(0, all_indices(set), set, params, rng);
  REQUIRE(cluster.has_value());
  CHECK(static_cast<int>(cluster->members.size()) == params.max_cluster_size);
  CHECK(cluster->members.front() == 0);
}

TEST_CASE("growth never crosses bodies separated beyond the rigidity bound") {
  Rng source(2);
  std::vector<int> labels;
  const PointSet set = two_body_set(source, 0.5, &labels);

  // oracle: every cross pair violates the constraint, every intra pair obeys it
  ProposalParams params;
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    for (std::size_t j = i + 1; j < set.points.size(); ++j) {
      const bool rigid = rigid_pair(set.points[i], set.points[j], params.delta_rigid_dev_max);
      CHECK(rigid == (labels[i] == labels[j]));
    }
  }

  Rng rng(11);
  const auto cluster = grow_cluster(0, all_indices(set), set, params, rng);
  REQUIRE(cluster.has_value());
  for (const int m : cluster->members) CHECK(labels[m] == labels[0]);
}

TEST_CASE("a seed with no candidates is too small a cluster") {
  Rng source(3);
  const auto K = test::unit_camera();
  const PointSet set = test::planted_point_set(K, {SE3()}, {5}, source);
  ProposalParams params;
  Rng rng(13);
  CHECK(!grow_cluster(0, {}, set, params, rng).has_value());
}

TEST_CASE("static input proposes identity motions") {
  Rng source(4);
  const auto K = test::unit_camera();
  const PointSet set = test::planted_point_set(K, {SE3()}, {80}, source);
  ProposalParams params;
  params.num_clusters = 16;
  const auto proposals = propose_objects(all_indices(set), set, params);
  CHECK(!proposals.empty());
  for (const auto& object : proposals) {
    CHECK(object.motion().translation().norm() <= 1e-9);
    CHECK((object.motion().rotation() - Mat3::Identity()).norm() <= 1e-9);
  }
}

TEST_CASE("a planted transform is recovered by some proposal") {
  Rng source(5);
  const auto K = test::unit_camera();
  const SE3 planted = SE3::from_axis_angle(Vec3(0.01, -0.02, 0.015), Vec3(0.2, -0.1, 0.05));
  const PointSet set = test::planted_point_set(K, {planted}, {80}, source);
  ProposalParams params;
  params.num_clusters = 16;
  const auto proposals = propose_objects(all_indices(set), set, params);
  bool found = false;
  for (const auto& object : proposals) {
    if ((object.motion().rotation() - planted.rotation()).norm() <= 1e-6 &&
        (object.motion().translation() - planted.translation()).norm() <= 1e-6)
      found = true;
  }
  CHECK(found);
}

TEST_CASE("all three planted motions appear across 50 seeds") {
  Rng source(6);
  const auto K = test::unit_camera();
  const std::vector<SE3> motions = {
      SE3(),
      SE3::from_axis_angle(Vec3(0, 0, 0.03), Vec3(0.25, 0, 0)),
      SE3::from_axis_angle(Vec3(0.02, 0, 0), Vec3(0, -0.2, 0.1)),
  };
  std::vector<int> labels;
  const PointSet set = test::planted_point_set(K, motions, {50, 50, 50}, source, &labels);

  ProposalParams params;
  params.num_clusters = 50;
  const auto proposals = propose_objects(all_indices(set), set, params);
  for (const auto& motion : motions) {
    bool found = false;
    for (const auto& object : proposals) {
      if ((object.motion().rotation() - motion.rotation()).norm() <= 1e-6 &&
          (object.motion().translation() - motion.translation()).norm() <= 1e-6)
        found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("emitted clusters always satisfy the pairwise rigidity invariant") {
  Rng source(8);
  const auto K = test::unit_camera();
  const std::vector<SE3> motions = {
      SE3(),
      SE3(Mat3::Identity(), Vec3(0.4, 0, 0)),
      SE3::from_axis_angle(Vec3(0, 0.05, 0), Vec3(0, 0, 0.3)),
  };
  const PointSet set = test::planted_point_set(K, motions, {40, 40, 40}, source);

  ProposalParams params;
  params.num_clusters = 64;
  const auto clusters = propose_clusters(all_indices(set), set, params);
  CHECK(!clusters.empty());
  for (const auto& cluster : clusters) {
    CHECK(cluster.members.size() >= 2);
    CHECK(static_cast<int>(cluster.members.size()) <= params.max_cluster_size);
    for (std::size_t i = 0; i < cluster.members.size(); ++i) {
      const ImagePoint& a = set.points[cluster.members[i]];
      CHECK(a.r_t1);
      CHECK(a.r_t2);
      for (std::size_t j = i + 1; j < cluster.members.size(); ++j)
        CHECK(rigid_pair(a, set.points[cluster.members[j]], params.delta_rigid_dev_max));
    }
  }
}

TEST_CASE("proposals are deterministic in the seed") {
  Rng source(9);
  const auto K = test::unit_camera();
  const PointSet set = test::planted_point_set(
      K, {SE3(), SE3(Mat3::Identity(), Vec3(0.3, 0, 0))}, {60, 60}, source);
  ProposalParams params;
  params.rng_seed = 42;

  const auto a = propose_objects(all_indices(set), set, params);
  const auto b = propose_objects(all_indices(set), set, params);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].motion().rotation() == b[i].motion().rotation());
    CHECK(a[i].motion().translation() == b[i].motion().translation());
  }

  params.rng_seed = 43;
  const auto c = propose_objects(all_indices(set), set, params);
  bool any_different = c.size() != a.size();
  for (std::size_t i = 0; !any_different && i < a.size(); ++i)
    any_different = a[i].motion().translation() != c[i].motion().translation();
  CHECK(any_different);
}

TEST_CASE("no cluster mixes bodies at 10x the rigidity margin over 64 seeds") {
  Rng source(10);
  std::vector<int> labels;
  ProposalParams params;
  const PointSet set = two_body_set(source, 10.0 * params.delta_rigid_dev_max, &labels);
  params.num_clusters = 64;
  const auto clusters = propose_clusters(all_indices(set), set, params);
  CHECK(!clusters.empty());
  for (const auto& cluster : clusters) {
    for (const int m : cluster.members) CHECK(labels[m] == labels[cluster.members[0]]);
  }
}

TEST_CASE("unreliable points are never seeded or admitted") {
  Rng source(12);
  const auto K = test::unit_camera();
  PointSet set = test::planted_point_set(K, {SE3()}, {30}, source);
  set.points[3].r_t2 = false;
  set.points[7].r_t1 = false;
  set.points[7].r_t2 = false;
  ProposalParams params;
  params.num_clusters = 32;
  const auto clusters = propose_clusters(all_indices(set), set, params);
  for (const auto& cluster : clusters) {
    for (const int m : cluster.members) {
      CHECK(m != 3);
      CHECK(m != 7);
    }
  }
}

}  // TEST_SUITE
