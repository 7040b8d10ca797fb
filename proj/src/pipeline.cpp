#include "sfseg/pipeline.hpp"

namespace sfseg {

SceneResult process_frame_pair(const FramePairInput& input, const RunConfig& config,
                               PipelineTrace* trace, PointSet* points_out) {
  const ConsensusModel model(input.K, config.noise);

  const PointSet points = build_point_set(input, config.stride, config.occlusion_limit_px);
  if (points_out) *points_out = points;

  CoverageState state = run_pipeline(points, model, config.proposal, config.selection, trace);
  if (state.objects.empty())
    throw DegenerateInputError("pipeline: no object satisfied the selection constraints");

  SceneResult result;
  result.objects = std::move(state.objects);
  result.background_idx = select_background(result.objects, points, model);
  result.odometry = derive_odometry(result.objects, result.background_idx);

  // Full-resolution assignment reuses the downsampled objects' clouds.
  const PointSet full = build_point_set(input, 1, config.occlusion_limit_px);
  result.labels = assign_pixels(result.objects, full, model);
  result.scene_flow = derive_scene_flow(result.labels, result.objects, input.depth1, input.K);
  return result;
}

}  // namespace sfseg
