#pragma once

#include <map>
#include <string>

#include "sfseg/consensus.hpp"
#include "sfseg/proposal.hpp"
#include "sfseg/selection.hpp"
#include "sfseg/synthetic.hpp"

namespace sfseg {

/// Flat "key = value" text with [section] headers, '#' comments. No
/// nesting; multi-number values are space-separated inside one value.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config(const std::string& text);
std::string serialize_config(const ConfigMap& config);
ConfigMap load_config_file(const std::string& path);

double config_double(const ConfigMap& c, const std::string& section, const std::string& key,
                     double fallback);
int config_int(const ConfigMap& c, const std::string& section, const std::string& key, int fallback);
bool config_bool(const ConfigMap& c, const std::string& section, const std::string& key,
                 bool fallback);
Vec3 config_vec3(const ConfigMap& c, const std::string& section, const std::string& key,
                 const Vec3& fallback);
/// SE3 encoded as "<prefix>axis_angle" and "<prefix>translation" keys.
SE3 config_se3(const ConfigMap& c, const std::string& section, const std::string& prefix);

/// Everything one `run` invocation needs besides the input files.
struct RunConfig {
  int stride = 4;
  double occlusion_limit_px = 1.5;
  NoiseParams noise;
  ProposalParams proposal;
  SelectionParams selection;
  double fuse_delta_transl = 0.01;  // m/s
  double fuse_delta_rot = 0.1;      // deg/s
  int jobs = 1;
  bool dump_intermediate = false;

  bool operator==(const RunConfig&) const = default;
};

RunConfig run_config_from(const ConfigMap& config);
ConfigMap run_config_to(const RunConfig& config);

CameraIntrinsics intrinsics_from(const ConfigMap& config);
ConfigMap intrinsics_to(const CameraIntrinsics& K);

/// Scene description for the synthetic renderer; bodies live in sections
/// named "body ..." and are ordered by section name.
SceneSpec scene_spec_from(const ConfigMap& config);
ConfigMap scene_spec_to(const SceneSpec& spec);

}  // namespace sfseg
