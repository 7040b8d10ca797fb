#include <doctest.h>

#include <numeric>

#include "sfseg/pipeline.hpp"
#include "sfseg/selection.hpp"
#include "test_helpers.hpp"

using namespace sfseg;

TEST_SUITE("selection") {

TEST_CASE("contribution over raw probabilities follows the hand-sum definition") {
  const std::vector<double> probs = {1.0, 1.0, 0.5, 0.0};
  const std::vector<double> cover = {1.0, 0.0, 0.0, 0.0};
  CHECK(contribution_from_probs(probs, cover) == 0.375);  // (0 + 1 + 0.5 + 0) / 4

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(32), c(32);
    for (auto& v : p) v = rng.uniform();
    for (auto& v : c) v = rng.uniform();
    double hand = 0.0;
    for (int i = 0; i < 32; ++i) hand += std::max(p[i] - c[i], 0.0);
    hand /= 32.0;
    CHECK(contribution_from_probs(p, c) == doctest::Approx(hand).epsilon(1e-15));
    // never exceeds the uncovered mass
    double slack = 0.0;
    for (int i = 0; i < 32; ++i) slack += 1.0 - c[i];
    CHECK(contribution_from_probs(p, c) <= slack / 32.0 + 1e-15);
  }
}

TEST_CASE("overlap over raw probabilities follows the soft-IoU definition") {
  const std::vector<double> ones = {1.0, 1.0, 1.0};
  CHECK(overlap_from_probs(ones, ones) == 1.0);

  const std::vector<double> a = {1.0, 0.0, 0.7};
  const std::vector<double> b = {0.0, 1.0, 0.0};
  CHECK(overlap_from_probs(a, b) == 0.0);

  // two points with (p1, p2) = (1, 0.5) and (0.5, 1)
  const std::vector<double> p1 = {1.0, 0.5};
  const std::vector<double> p2 = {0.5, 1.0};
  CHECK(overlap_from_probs(p1, p2) == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> u(16), v(16), hard(16);
    for (auto& x : u) x = rng.uniform();
    for (auto& x : v) x = rng.uniform();
    for (auto& x : hard) x = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const double ov = overlap_from_probs(u, v);
    CHECK(ov >= 0.0);
    CHECK(ov <= 1.0);
    CHECK(ov == doctest::Approx(overlap_from_probs(v, u)).epsilon(1e-15));
    // identical binary vectors with any support have overlap 1
    bool any = false;
    for (const double x : hard) any = any || x > 0.0;
    if (any) CHECK(overlap_from_probs(hard, hard) == 1.0);
  }

  const std::vector<double> empty_support = {0.0, 0.0};
  CHECK(overlap_from_probs(empty_support, empty_support) == 0.0);
}

TEST_CASE("object-level contribution matches the definition against the model") {
  Rng rng(7);
  const auto K = test::unit_camera();
  const ConsensusModel model(K, NoiseParams{});
  const SE3 motion(Mat3::Identity(), Vec3(0.15, 0, 0));
  std::vector<int> labels;
  const PointSet set =
      test::planted_point_set(K, {motion, SE3()}, {40, 40}, rng, &labels);
  const RigidObject proposal{motion};

  std::vector<double> cover(set.points.size());
  for (auto& c : cover) c = rng.uniform();

  double hand = 0.0;
  for (std::size_t i = 0; i < set.points.size(); ++i)
    hand += std::max(model.motion_inlier_prob(set.points[i], proposal) - cover[i], 0.0);
  hand /= static_cast<double>(set.points.size());
  CHECK(contribution_prob(set, proposal, cover, model) == doctest::Approx(hand).epsilon(1e-15));

  // with no previous coverage it is the mean motion inlier probability
  const std::vector<double> zeros(set.points.size(), 0.0);
  double mean = 0.0;
  for (const auto& p : set.points) mean += model.motion_inlier_prob(p, proposal);
  mean /= static_cast<double>(set.points.size());
  CHECK(contribution_prob(set, proposal, zeros, model) == doctest::Approx(mean).epsilon(1e-15));
}

TEST_CASE("select_object respects both constraints and maximizes contribution") {
  Rng rng(11);
  const auto K = test::unit_camera();
  const ConsensusModel model(K, NoiseParams{});

  const SE3 big(Mat3::Identity(), Vec3(0.2, 0, 0));
  const SE3 small = SE3::from_axis_angle(Vec3(0, 0, 0.04), Vec3(0, 0.15, 0));
  const PointSet set = test::planted_point_set(K, {big, small}, {60, 20}, rng);

  CoverageState state;
  state.best_cover.assign(set.points.size(), 0.0);
  SelectionParams sel;

  SUBCASE("a single qualifying proposal is selected") {
    const std::vector<RigidObject> proposals = {RigidObject{big}};
    const auto chosen = select_object(proposals, set, state, sel, model);
    REQUIRE(chosen.has_value());
    CHECK(*chosen == 0);
  }

  SUBCASE("the larger-coverage proposal wins") {
    const std::vector<RigidObject> proposals = {RigidObject{small}, RigidObject{big}};
    const auto chosen = select_object(proposals, set, state, sel, model);
    REQUIRE(chosen.has_value());
    CHECK(*chosen == 1);  // covers 60 of 80 points
  }

  SUBCASE("termination when every proposal is below the contribution floor") {
    const SE3 nowhere(Mat3::Identity(), Vec3(5.0, 5.0, 0.0));
    const std::vector<RigidObject> proposals = {RigidObject{nowhere}};
    CHECK(!select_object(proposals, set, state, sel, model).has_value());
  }
}

TEST_CASE("constrained selection matches a brute-force oracle") {
  Rng rng(13);
  const auto K = test::unit_camera();
  const ConsensusModel model(K, NoiseParams{});
  SelectionParams sel;

  for (int instance = 0; instance < 25; ++instance) {
    // random scene of 2-3 planted motions
    std::vector<SE3> motions;
    const int n_motions = 2 + static_cast<int>(rng.index(2));
    for (int m = 0; m < n_motions; ++m) {
      motions.push_back(SE3::from_axis_angle(
          Vec3(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)),
          Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1))));
    }
    std::vector<int> counts(motions.size());
    for (auto& c : counts) c = 20 + static_cast<int>(rng.index(30));
    const PointSet set = test::planted_point_set(K, motions, counts, rng);

    // one previous object from the first motion, covering its points
    CoverageState state;
    state.best_cover.assign(set.points.size(), 0.0);
    {
      std::vector<CloudPoint> cloud;
      for (int i = 0; i < counts[0]; ++i)
        cloud.push_back({set.points[i].x, set.points[i].y, set.points[i].z});
      const RigidObject prev(motions[0], cloud, 8.0);
      state.objects.push_back(prev);
      for (std::size_t i = 0; i < set.points.size(); ++i)
        state.best_cover[i] = model.joint_inlier_prob(set.points[i], prev);
    }

    // random proposals: planted motions plus perturbed junk
    std::vector<RigidObject> proposals;
    for (const auto& m : motions) proposals.emplace_back(m);
    for (int j = 0; j < 4; ++j) {
      proposals.emplace_back(SE3::from_axis_angle(
          Vec3(rng.uniform(-0.05, 0.05), 0, rng.uniform(-0.05, 0.05)),
          Vec3(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.2, 0.2))));
    }

    // brute force: independently evaluate the constrained argmax
    int expected = -1;
    double best = -1.0;
    for (std::size_t k = 0; k < proposals.size(); ++k) {
      std::vector<double> probs(set.points.size());
      for (std::size_t i = 0; i < set.points.size(); ++i)
        probs[i] = model.motion_inlier_prob(set.points[i], proposals[k]);
      double contribution = 0.0;
      for (std::size_t i = 0; i < set.points.size(); ++i)
        contribution += std::max(probs[i] - state.best_cover[i], 0.0);
      contribution /= static_cast<double>(set.points.size());
      if (contribution < sel.delta_contrib_min) continue;
      bool ok = true;
      for (const auto& prev : state.objects) {
        std::vector<double> prev_probs(set.points.size());
        for (std::size_t i = 0; i < set.points.size(); ++i)
          prev_probs[i] = model.joint_inlier_prob(set.points[i], prev);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < set.points.size(); ++i) {
          num += probs[i] * prev_probs[i];
          den += probs[i] + prev_probs[i] - probs[i] * prev_probs[i];
        }
        if (den > 0.0 && num / den > sel.delta_overlap_max) ok = false;
      }
      if (!ok) continue;
      if (contribution > best) {
        best = contribution;
        expected = static_cast<int>(k);
      }
    }

    const auto chosen = select_object(proposals, set, state, sel, model);
    if (expected < 0) {
      CHECK(!chosen.has_value());
    } else {
      REQUIRE(chosen.has_value());
      CHECK(static_cast<int>(*chosen) == expected);
    }
  }
}

TEST_CASE("inlier collection splits spatially disconnected components") {
  Rng rng(17);
  const auto K = test::unit_camera();
  const ConsensusModel model(K, NoiseParams{});
  SelectionParams sel;

  SUBCASE("one compact body forms one component") {
    PointSet set;
    set.stride = 4;
    set.source_width = K.width;
    set.source_height = K.height;
    for (int gy = 0; gy < 10; ++gy)
      for (int gx = 0; gx < 10; ++gx)
        set.points.push_back(test::planted_point(K, SE3(), 40.0 + 4 * gx, 40.0 + 4 * gy, 3.0));
    const auto components = collect_inliers_and_split(RigidObject{SE3()}, set, model, sel);
    REQUIRE(components.size() == 1);
    CHECK(components[0].cloud().size() >= 95);
  }

  SUBCASE("two distant same-motion patches split into two components") {
    PointSet set;
    set.stride = 4;
    set.source_width = K.width;
    set.source_height = K.height;
    // separation 64 px >> sigma_geo_2d * sqrt(-2 ln 0.05) ~ 19.6 px
    for (int gy = 0; gy < 5; ++gy) {
      for (int gx = 0; gx < 5; ++gx) {
        set.points.push_back(test::planted_point(K, SE3(), 8.0 + 4 * gx, 40.0 + 4 * gy, 3.0));
        set.points.push_back(test::planted_point(K, SE3(), 100.0 + 4 * gx, 40.0 + 4 * gy, 3.0));
      }
    }
    const auto components = collect_inliers_and_split(RigidObject{SE3()}, set, model, sel);
    CHECK(components.size() == 2);
  }

  SUBCASE("an unmatched motion collects nothing") {
    const PointSet set = test::planted_point_set(K, {SE3()}, {40}, rng);
    const SE3 nowhere(Mat3::Identity(), Vec3(8.0, 0, 0));
    CHECK(collect_inliers_and_split(RigidObject{nowhere}, set, model, sel).empty());
  }

  SUBCASE("small components are discarded") {
    PointSet set;
    set.stride = 4;
    set.source_width = K.width;
    set.source_height = K.height;
    for (int gy = 0; gy < 6; ++gy)
      for (int gx = 0; gx < 6; ++gx)
        set.points.push_back(test::planted_point(K, SE3(), 30.0 + 4 * gx, 30.0 + 4 * gy, 3.0));
    set.points.push_back(test::planted_point(K, SE3(), 120.0, 120.0, 3.0));  // isolated
    const auto components = collect_inliers_and_split(RigidObject{SE3()}, set, model, sel);
    REQUIRE(components.size() == 1);
    CHECK(components[0].cloud().size() == 36);
  }
}

TEST_CASE("run_pipeline on a static scene finds exactly one identity object") {
  const RenderResult r = render([] {
    SceneSpec spec = test::three_body_scene();
    spec.bodies.resize(1);  // background plane only
    spec.camera_motion = SE3();
    return spec;
  }());
  const PointSet set = build_point_set(r.input, 4, 1.5);
  const ConsensusModel model(r.input.K, NoiseParams{});
  const CoverageState state = run_pipeline(set, model, ProposalParams{}, SelectionParams{});
  REQUIRE(state.objects.size() == 1);
  CHECK(state.objects[0].motion().translation().norm() <= 1e-6);
  CHECK((state.objects[0].motion().rotation() - Mat3::Identity()).norm() <= 1e-6);
}

TEST_CASE("run_pipeline recovers all four bodies of the standard scene") {
  const SceneSpec spec = test::three_body_scene();
  const RenderResult r = render(spec);
  const PointSet set = build_point_set(r.input, 4, 1.5);
  const ConsensusModel model(r.input.K, NoiseParams{});
  PipelineTrace trace;
  const CoverageState state =
      run_pipeline(set, model, ProposalParams{}, SelectionParams{}, &trace);

  CHECK(state.objects.size() == 4);
  CHECK(trace.iterations.size() <= static_cast<std::size_t>(SelectionParams{}.max_objects));

  // every planted (observed) motion is matched by some recovered object
  for (const auto& planted : r.gt.body_motions) {
    bool found = false;
    for (const auto& object : state.objects) {
      if ((object.motion().rotation() - planted.rotation()).norm() <= 1e-4 &&
          (object.motion().translation() - planted.translation()).norm() <= 1e-4)
        found = true;
    }
    CHECK(found);
  }

  // coverage is a probability vector
  for (const double c : state.best_cover) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("run_pipeline rejects an empty point set") {
  PointSet empty;
  empty.stride = 4;
  const ConsensusModel model(test::unit_camera(), NoiseParams{});
  CHECK_THROWS_AS(run_pipeline(empty, model, ProposalParams{}, SelectionParams{}),
                  DegenerateInputError);
}

}  // TEST_SUITE
