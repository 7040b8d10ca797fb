#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sfseg/consensus.hpp"
#include "sfseg/proposal.hpp"

namespace sfseg {

struct SelectionParams {
  double delta_contrib_min = 0.02;
  double delta_overlap_max = 0.5;
  int max_objects = 20;
  double connectivity_prob_min = 0.05;
  int min_component_size = 4;
  double uncovered_max_cover = 0.5;   // seeding threshold on best_cover
  double motion_inlier_min = 0.05;    // cloud-collection threshold
  int connectivity_neighbors = 8;     // k nearest pixel-grid neighbors
  bool refit_motion = false;          // re-fit each split component's motion

  void validate() const;
};

/// Running coverage: per-point max joint inlier probability over the
/// accepted objects, non-decreasing across iterations.
struct CoverageState {
  std::vector<double> best_cover;
  std::vector<RigidObject> objects;
};

/// Contribution over raw probability vectors:
/// (1/n) * sum_i max(p_i - cover_i, 0).
double contribution_from_probs(std::span<const double> probs, std::span<const double> cover);

/// Soft IoU over raw probability vectors:
/// sum p1*p2 / sum (p1 + p2 - p1*p2); 0 when the denominator vanishes.
double overlap_from_probs(std::span<const double> p1, std::span<const double> p2);

/// Per-point inlier probability vector for an object: joint model when the
/// object carries a cloud, motion-only otherwise (proposals).
std::vector<double> inlier_prob_vector(const PointSet& points, const RigidObject& O,
                                       const ConsensusModel& model);

double contribution_prob(const PointSet& points, const RigidObject& proposal,
                         std::span<const double> best_cover, const ConsensusModel& model);

double overlap_prob(const PointSet& points, const RigidObject& O1, const RigidObject& O2,
                    const ConsensusModel& model);

/// Constrained argmax of the contribution probability; nullopt is the
/// termination signal (no proposal meets both constraints).
std::optional<std::size_t> select_object(const std::vector<RigidObject>& proposals,
                                         const PointSet& points, const CoverageState& state,
                                         const SelectionParams& sel, const ConsensusModel& model);

/// Collect motion-model inliers of the selected proposal and split them
/// into spatially connected components; each surviving component becomes a
/// finalized object (shared motion, or per-component re-fit when enabled).
/// When a coverage vector is given, points already covered beyond the
/// uncovered threshold stay with their earlier objects instead of being
/// re-absorbed into the new cloud.
std::vector<RigidObject> collect_inliers_and_split(const RigidObject& selected,
                                                   const PointSet& points,
                                                   const ConsensusModel& model,
                                                   const SelectionParams& sel,
                                                   std::span<const double> best_cover = {});

/// Per-iteration record for debugging dumps and halting checks.
struct PipelineTrace {
  struct Iteration {
    std::size_t uncovered = 0;
    std::size_t proposals = 0;
    int selected = -1;              // index into the proposal list, -1 = none
    double contribution = 0.0;
    std::size_t components = 0;
    std::size_t objects_total = 0;
  };
  std::vector<Iteration> iterations;
};

/// The outer estimation loop: propose, select, split, update coverage,
/// until termination, no-proposal, or the object cap. Deterministic given
/// the proposal rng_seed.
CoverageState run_pipeline(const PointSet& points, const ConsensusModel& model,
                           const ProposalParams& prop, const SelectionParams& sel,
                           PipelineTrace* trace = nullptr);

}  // namespace sfseg
