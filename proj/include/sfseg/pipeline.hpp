#pragma once

#include "sfseg/config.hpp"
#include "sfseg/deduction.hpp"
#include "sfseg/preprocess.hpp"

namespace sfseg {

/// Full single-frame-pair run: point set assembly, iterative object
/// estimation, background/odometry/segmentation/scene-flow deduction.
/// Throws DegenerateInputError when no object survives.
SceneResult process_frame_pair(const FramePairInput& input, const RunConfig& config,
                               PipelineTrace* trace = nullptr, PointSet* points_out = nullptr);

}  // namespace sfseg
