#include "sfseg/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sfseg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_vec3(const Vec3& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

}  // namespace

ConfigMap parse_config(const std::string& text) {
  ConfigMap config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw FormatError("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      config[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw FormatError("config line " + std::to_string(line_no) + ": empty key");
    config[section][key] = value;
  }
  return config;
}

std::string serialize_config(const ConfigMap& config) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, entries] : config) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
  }
  return out.str();
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

const std::string* find_value(const ConfigMap& c, const std::string& section,
                              const std::string& key) {
  const auto s = c.find(section);
  if (s == c.end()) return nullptr;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  return &k->second;
}

}  // namespace

double config_double(const ConfigMap& c, const std::string& section, const std::string& key,
                     double fallback) {
  const std::string* v = find_value(c, section, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double parsed = std::stod(*v, &used);
    if (trim(v->substr(used)).empty()) return parsed;
  } catch (const std::exception&) {
  }
  throw FormatError("config [" + section + "] " + key + ": not a number: " + *v);
}

int config_int(const ConfigMap& c, const std::string& section, const std::string& key,
               int fallback) {
  const std::string* v = find_value(c, section, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long parsed = std::stol(*v, &used);
    if (trim(v->substr(used)).empty()) return static_cast<int>(parsed);
  } catch (const std::exception&) {
  }
  throw FormatError("config [" + section + "] " + key + ": not an integer: " + *v);
}

bool config_bool(const ConfigMap& c, const std::string& section, const std::string& key,
                 bool fallback) {
  const std::string* v = find_value(c, section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw FormatError("config [" + section + "] " + key + ": not a boolean: " + *v);
}

Vec3 config_vec3(const ConfigMap& c, const std::string& section, const std::string& key,
                 const Vec3& fallback) {
  const std::string* v = find_value(c, section, key);
  if (!v) return fallback;
  std::istringstream in(*v);
  Vec3 result;
  if (!(in >> result.x() >> result.y() >> result.z()))
    throw FormatError("config [" + section + "] " + key + ": expected three numbers: " + *v);
  return result;
}

SE3 config_se3(const ConfigMap& c, const std::string& section, const std::string& prefix) {
  const Vec3 aa = config_vec3(c, section, prefix + "axis_angle", Vec3::Zero());
  const Vec3 t = config_vec3(c, section, prefix + "translation", Vec3::Zero());
  return SE3::from_axis_angle(aa, t);
}

RunConfig run_config_from(const ConfigMap& c) {
  RunConfig r;
  r.stride = config_int(c, "preprocess", "stride", r.stride);
  r.occlusion_limit_px = config_double(c, "preprocess", "occlusion_limit_px", r.occlusion_limit_px);

  r.noise.sigma_u = config_double(c, "noise", "sigma_u", r.noise.sigma_u);
  r.noise.sigma_v = config_double(c, "noise", "sigma_v", r.noise.sigma_v);
  r.noise.sigma_d = config_double(c, "noise", "sigma_d", r.noise.sigma_d);
  r.noise.sigma_geo_2d = config_double(c, "noise", "sigma_geo_2d", r.noise.sigma_geo_2d);
  r.noise.sigma_geo_depth_rel =
      config_double(c, "noise", "sigma_geo_depth_rel", r.noise.sigma_geo_depth_rel);

  r.proposal.delta_rigid_dev_max =
      config_double(c, "proposal", "delta_rigid_dev_max", r.proposal.delta_rigid_dev_max);
  r.proposal.num_clusters = config_int(c, "proposal", "num_clusters", r.proposal.num_clusters);
  r.proposal.max_cluster_size =
      config_int(c, "proposal", "max_cluster_size", r.proposal.max_cluster_size);
  r.proposal.rng_seed = static_cast<std::uint64_t>(
      config_int(c, "run", "rng_seed", static_cast<int>(r.proposal.rng_seed)));

  r.selection.delta_contrib_min =
      config_double(c, "selection", "delta_contrib_min", r.selection.delta_contrib_min);
  r.selection.delta_overlap_max =
      config_double(c, "selection", "delta_overlap_max", r.selection.delta_overlap_max);
  r.selection.max_objects = config_int(c, "selection", "max_objects", r.selection.max_objects);
  r.selection.connectivity_prob_min =
      config_double(c, "selection", "connectivity_prob_min", r.selection.connectivity_prob_min);
  r.selection.min_component_size =
      config_int(c, "selection", "min_component_size", r.selection.min_component_size);
  r.selection.uncovered_max_cover =
      config_double(c, "selection", "uncovered_max_cover", r.selection.uncovered_max_cover);
  r.selection.motion_inlier_min =
      config_double(c, "selection", "motion_inlier_min", r.selection.motion_inlier_min);
  r.selection.connectivity_neighbors =
      config_int(c, "selection", "connectivity_neighbors", r.selection.connectivity_neighbors);
  r.selection.refit_motion = config_bool(c, "selection", "refit_motion", r.selection.refit_motion);

  r.fuse_delta_transl = config_double(c, "metrics", "fuse_delta_transl", r.fuse_delta_transl);
  r.fuse_delta_rot = config_double(c, "metrics", "fuse_delta_rot", r.fuse_delta_rot);

  r.jobs = config_int(c, "run", "jobs", r.jobs);
  r.dump_intermediate = config_bool(c, "run", "dump_intermediate", r.dump_intermediate);
  return r;
}

ConfigMap run_config_to(const RunConfig& r) {
  ConfigMap c;
  c["preprocess"]["stride"] = std::to_string(r.stride);
  c["preprocess"]["occlusion_limit_px"] = format_double(r.occlusion_limit_px);
  c["noise"]["sigma_u"] = format_double(r.noise.sigma_u);
  c["noise"]["sigma_v"] = format_double(r.noise.sigma_v);
  c["noise"]["sigma_d"] = format_double(r.noise.sigma_d);
  c["noise"]["sigma_geo_2d"] = format_double(r.noise.sigma_geo_2d);
  c["noise"]["sigma_geo_depth_rel"] = format_double(r.noise.sigma_geo_depth_rel);
  c["proposal"]["delta_rigid_dev_max"] = format_double(r.proposal.delta_rigid_dev_max);
  c["proposal"]["num_clusters"] = std::to_string(r.proposal.num_clusters);
  c["proposal"]["max_cluster_size"] = std::to_string(r.proposal.max_cluster_size);
  c["selection"]["delta_contrib_min"] = format_double(r.selection.delta_contrib_min);
  c["selection"]["delta_overlap_max"] = format_double(r.selection.delta_overlap_max);
  c["selection"]["max_objects"] = std::to_string(r.selection.max_objects);
  c["selection"]["connectivity_prob_min"] = format_double(r.selection.connectivity_prob_min);
  c["selection"]["min_component_size"] = std::to_string(r.selection.min_component_size);
  c["selection"]["uncovered_max_cover"] = format_double(r.selection.uncovered_max_cover);
  c["selection"]["motion_inlier_min"] = format_double(r.selection.motion_inlier_min);
  c["selection"]["connectivity_neighbors"] = std::to_string(r.selection.connectivity_neighbors);
  c["selection"]["refit_motion"] = r.selection.refit_motion ? "true" : "false";
  c["metrics"]["fuse_delta_transl"] = format_double(r.fuse_delta_transl);
  c["metrics"]["fuse_delta_rot"] = format_double(r.fuse_delta_rot);
  c["run"]["rng_seed"] = std::to_string(r.proposal.rng_seed);
  c["run"]["jobs"] = std::to_string(r.jobs);
  c["run"]["dump_intermediate"] = r.dump_intermediate ? "true" : "false";
  return c;
}

CameraIntrinsics intrinsics_from(const ConfigMap& c) {
  CameraIntrinsics K;
  K.fx = config_double(c, "camera", "fx", 0.0);
  K.fy = config_double(c, "camera", "fy", 0.0);
  K.cx = config_double(c, "camera", "cx", 0.0);
  K.cy = config_double(c, "camera", "cy", 0.0);
  K.baseline = config_double(c, "camera", "baseline", 0.1);
  K.width = config_int(c, "camera", "width", 0);
  K.height = config_int(c, "camera", "height", 0);
  K.validate();
  return K;
}

ConfigMap intrinsics_to(const CameraIntrinsics& K) {
  ConfigMap c;
  c["camera"]["fx"] = format_double(K.fx);
  c["camera"]["fy"] = format_double(K.fy);
  c["camera"]["cx"] = format_double(K.cx);
  c["camera"]["cy"] = format_double(K.cy);
  c["camera"]["baseline"] = format_double(K.baseline);
  c["camera"]["width"] = std::to_string(K.width);
  c["camera"]["height"] = std::to_string(K.height);
  return c;
}

SceneSpec scene_spec_from(const ConfigMap& c) {
  SceneSpec spec;
  spec.K = intrinsics_from(c);
  spec.camera_motion = config_se3(c, "camera_motion", "");
  spec.noise.flow_sigma_px = config_double(c, "noise", "flow_sigma_px", 0.0);
  spec.noise.depth_rel_sigma = config_double(c, "noise", "depth_rel_sigma", 0.0);
  spec.noise.outlier_frac = config_double(c, "noise", "outlier_frac", 0.0);
  spec.rng_seed = static_cast<std::uint64_t>(config_int(c, "scene", "rng_seed", 0));

  for (const auto& [section, entries] : c) {
    if (section.rfind("body", 0) != 0) continue;
    BodySpec body;
    const std::string* shape = nullptr;
    if (const auto it = entries.find("shape"); it != entries.end()) shape = &it->second;
    if (!shape) throw FormatError("scene config [" + section + "]: missing shape");
    if (*shape == "box") {
      body.shape = BodySpec::Shape::Box;
    } else if (*shape == "sphere") {
      body.shape = BodySpec::Shape::Sphere;
    } else if (*shape == "plane") {
      body.shape = BodySpec::Shape::Plane;
    } else {
      throw FormatError("scene config [" + section + "]: unknown shape " + *shape);
    }
    body.extent = config_vec3(c, section, "extent", Vec3(1.0, 1.0, 1.0));
    body.pose = config_se3(c, section, "pose_");
    body.motion = config_se3(c, section, "motion_");
    spec.bodies.push_back(body);
  }
  return spec;
}

ConfigMap scene_spec_to(const SceneSpec& spec) {
  ConfigMap c = intrinsics_to(spec.K);
  c["camera_motion"]["axis_angle"] = format_vec3(axis_angle(spec.camera_motion.rotation()));
  c["camera_motion"]["translation"] = format_vec3(spec.camera_motion.translation());
  c["noise"]["flow_sigma_px"] = format_double(spec.noise.flow_sigma_px);
  c["noise"]["depth_rel_sigma"] = format_double(spec.noise.depth_rel_sigma);
  c["noise"]["outlier_frac"] = format_double(spec.noise.outlier_frac);
  c["scene"]["rng_seed"] = std::to_string(spec.rng_seed);
  for (std::size_t i = 0; i < spec.bodies.size(); ++i) {
    const BodySpec& body = spec.bodies[i];
    char name[32];
    std::snprintf(name, sizeof(name), "body %03zu", i);
    auto& section = c[name];
    switch (body.shape) {
      case BodySpec::Shape::Box: section["shape"] = "box"; break;
      case BodySpec::Shape::Sphere: section["shape"] = "sphere"; break;
      case BodySpec::Shape::Plane: section["shape"] = "plane"; break;
    }
    section["extent"] = format_vec3(body.extent);
    section["pose_axis_angle"] = format_vec3(axis_angle(body.pose.rotation()));
    section["pose_translation"] = format_vec3(body.pose.translation());
    section["motion_axis_angle"] = format_vec3(axis_angle(body.motion.rotation()));
    section["motion_translation"] = format_vec3(body.motion.translation());
  }
  return c;
}

}  // namespace sfseg
