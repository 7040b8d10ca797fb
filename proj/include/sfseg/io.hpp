#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sfseg/deduction.hpp"
#include "sfseg/image.hpp"
#include "sfseg/selection.hpp"

namespace sfseg {

/// Middlebury .flo: float magic 202021.25, int32 width/height, then
/// row-major interleaved (u, v) float32, all little-endian. Components
/// with magnitude >= 1e9 are invalid and read back as NaN.
FlowMap read_flow_flo(const std::filesystem::path& path);
void write_flow_flo(const std::filesystem::path& path, const FlowMap& flow);

/// Grayscale PFM ("Pf"): width height, scale whose sign is the endianness,
/// float32 rows bottom-to-top. Non-positive and non-finite values map to
/// NaN on read. Color headers ("PF") are rejected here.
DepthMap read_depth_pfm(const std::filesystem::path& path);
void write_depth_pfm(const std::filesystem::path& path, const DepthMap& depth);

/// 3-channel PFM ("PF") used for scene flow.
Image<Eigen::Vector3f> read_vec3_pfm(const std::filesystem::path& path);
void write_vec3_pfm(const std::filesystem::path& path, const Image<Eigen::Vector3f>& img);

/// 16-bit binary PGM ("P5", maxval 65535, big-endian samples); 65535 is
/// the unassigned sentinel.
LabelMap read_labels_pgm(const std::filesystem::path& path);
void write_labels_pgm(const std::filesystem::path& path, const LabelMap& labels);

struct ObjectRecord {
  SE3 motion;
  long point_count = 0;
  bool is_background = false;
};

/// One object per line: index, row-major R, t, point count, background
/// flag; space-separated, 17 significant digits.
std::vector<ObjectRecord> read_objects_txt(const std::filesystem::path& path);
void write_objects_txt(const std::filesystem::path& path, const std::vector<ObjectRecord>& objects);

struct TrajectoryEntry {
  double timestamp = 0.0;
  SE3 pose;
};

/// TUM trajectory line: "timestamp tx ty tz qx qy qz qw", unit quaternion
/// with qw >= 0. append creates the file on first use.
std::vector<TrajectoryEntry> read_trajectory_tum(const std::filesystem::path& path);
void append_trajectory_tum(const std::filesystem::path& path, const TrajectoryEntry& entry);

/// Full per-frame output set: labels.pgm, sceneflow.pfm, objects.txt in
/// `dir`, plus the odometry pose appended to `dir`/trajectory.txt.
void write_scene_result(const SceneResult& result, const std::filesystem::path& dir,
                        double timestamp, const SE3& accumulated_pose);

/// Debug dumps behind --dump-intermediate.
void write_point_set_txt(const std::filesystem::path& path, const PointSet& points);
void write_trace_txt(const std::filesystem::path& path, const PipelineTrace& trace,
                     const std::vector<RigidObject>& objects);

}  // namespace sfseg
