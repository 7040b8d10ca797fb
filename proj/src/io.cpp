#include "sfseg/io.hpp"

#include <Eigen/Geometry>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sfseg {

namespace {

constexpr float kFloMagic = 202021.25f;
constexpr float kFloInvalid = 1e9f;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char* bytes = reinterpret_cast<char*>(&v);
  std::reverse(bytes, bytes + sizeof(T));
  return v;
}

template <typename T>
T to_little(T v) {
  return std::endian::native == std::endian::little ? v : byteswap(v);
}

template <typename T>
T from_little(T v) {
  return to_little(v);
}

std::ifstream open_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open for reading: " + path.string());
  return in;
}

std::ofstream open_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

template <typename T>
void read_exact(std::istream& in, T* data, std::size_t count, const char* what) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T))
    throw FormatError(std::string("truncated ") + what);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// .flo

FlowMap read_flow_flo(const std::filesystem::path& path) {
  auto in = open_read(path);
  float magic = 0.0f;
  std::int32_t w = 0, h = 0;
  read_exact(in, &magic, 1, "flo header");
  read_exact(in, &w, 1, "flo header");
  read_exact(in, &h, 1, "flo header");
  magic = from_little(magic);
  w = from_little(w);
  h = from_little(h);
  if (magic != kFloMagic) throw FormatError("flo: bad magic in " + path.string());
  if (w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16)
    throw FormatError("flo: implausible size in " + path.string());

  FlowMap flow(w, h);
  std::vector<float> row(static_cast<std::size_t>(w) * 2);
  for (int y = 0; y < h; ++y) {
    read_exact(in, row.data(), row.size(), "flo payload");
    for (int x = 0; x < w; ++x) {
      float u = from_little(row[2 * x]);
      float v = from_little(row[2 * x + 1]);
      if (!std::isfinite(u) || !std::isfinite(v) || std::abs(u) >= kFloInvalid ||
          std::abs(v) >= kFloInvalid) {
        u = kNaNf;
        v = kNaNf;
      }
      flow(x, y) = Eigen::Vector2f(u, v);
    }
  }
  return flow;
}

void write_flow_flo(const std::filesystem::path& path, const FlowMap& flow) {
  auto out = open_write(path);
  const float magic = to_little(kFloMagic);
  const std::int32_t w = to_little(static_cast<std::int32_t>(flow.width));
  const std::int32_t h = to_little(static_cast<std::int32_t>(flow.height));
  out.write(reinterpret_cast<const char*>(&magic), sizeof(magic));
  out.write(reinterpret_cast<const char*>(&w), sizeof(w));
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  std::vector<float> row(static_cast<std::size_t>(flow.width) * 2);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const Eigen::Vector2f f = flow(x, y);
      row[2 * x] = to_little(std::isfinite(f.x()) ? f.x() : kFloInvalid);
      row[2 * x + 1] = to_little(std::isfinite(f.y()) ? f.y() : kFloInvalid);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("flo: write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// PFM

namespace {

struct PfmHeader {
  bool color = false;
  int width = 0;
  int height = 0;
  bool little_endian = true;
};

PfmHeader read_pfm_header(std::istream& in, const std::string& name) {
  std::string magic;
  in >> magic;
  PfmHeader header;
  if (magic == "PF") {
    header.color = true;
  } else if (magic == "Pf") {
    header.color = false;
  } else {
    throw FormatError("pfm: bad magic in " + name);
  }
  double scale = 0.0;
  if (!(in >> header.width >> header.height >> scale))
    throw FormatError("pfm: bad header in " + name);
  if (header.width <= 0 || header.height <= 0) throw FormatError("pfm: implausible size in " + name);
  if (scale == 0.0) throw FormatError("pfm: zero scale in " + name);
  header.little_endian = scale < 0.0;
  in.get();  // single whitespace byte before the raster
  return header;
}

void write_pfm_header(std::ostream& out, bool color, int width, int height) {
  out << (color ? "PF" : "Pf") << "\n" << width << " " << height << "\n-1.0\n";
}

float pfm_from_file(float v, bool file_little) {
  if (std::endian::native == std::endian::little) return file_little ? v : byteswap(v);
  return file_little ? byteswap(v) : v;
}

}  // namespace

DepthMap read_depth_pfm(const std::filesystem::path& path) {
  auto in = open_read(path);
  const PfmHeader header = read_pfm_header(in, path.string());
  if (header.color)
    throw FormatError("pfm: expected grayscale (Pf), got color (PF): " + path.string());

  DepthMap depth(header.width, header.height);
  std::vector<float> row(static_cast<std::size_t>(header.width));
  // PFM stores rows bottom-to-top.
  for (int y = header.height - 1; y >= 0; --y) {
    read_exact(in, row.data(), row.size(), "pfm payload");
    for (int x = 0; x < header.width; ++x) {
      const float v = pfm_from_file(row[x], header.little_endian);
      depth(x, y) = (std::isfinite(v) && v > 0.0f) ? v : kNaNf;
    }
  }
  return depth;
}

void write_depth_pfm(const std::filesystem::path& path, const DepthMap& depth) {
  auto out = open_write(path);
  write_pfm_header(out, false, depth.width, depth.height);
  std::vector<float> row(static_cast<std::size_t>(depth.width));
  for (int y = depth.height - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width; ++x) row[x] = pfm_from_file(depth(x, y), true);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("pfm: write failed: " + path.string());
}

Image<Eigen::Vector3f> read_vec3_pfm(const std::filesystem::path& path) {
  auto in = open_read(path);
  const PfmHeader header = read_pfm_header(in, path.string());
  if (!header.color) throw FormatError("pfm: expected color (PF), got grayscale: " + path.string());

  Image<Eigen::Vector3f> img(header.width, header.height);
  std::vector<float> row(static_cast<std::size_t>(header.width) * 3);
  for (int y = header.height - 1; y >= 0; --y) {
    read_exact(in, row.data(), row.size(), "pfm payload");
    for (int x = 0; x < header.width; ++x) {
      img(x, y) = Eigen::Vector3f(pfm_from_file(row[3 * x], header.little_endian),
                                  pfm_from_file(row[3 * x + 1], header.little_endian),
                                  pfm_from_file(row[3 * x + 2], header.little_endian));
    }
  }
  return img;
}

void write_vec3_pfm(const std::filesystem::path& path, const Image<Eigen::Vector3f>& img) {
  auto out = open_write(path);
  write_pfm_header(out, true, img.width, img.height);
  std::vector<float> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = img.height - 1; y >= 0; --y) {
    for (int x = 0; x < img.width; ++x) {
      row[3 * x] = pfm_from_file(img(x, y).x(), true);
      row[3 * x + 1] = pfm_from_file(img(x, y).y(), true);
      row[3 * x + 2] = pfm_from_file(img(x, y).z(), true);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("pfm: write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// 16-bit PGM labels

namespace {
constexpr std::uint16_t kLabelSentinel = 65535;
}

LabelMap read_labels_pgm(const std::filesystem::path& path) {
  auto in = open_read(path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5") throw FormatError("pgm: bad magic in " + path.string());
  if (w <= 0 || h <= 0) throw FormatError("pgm: implausible size in " + path.string());
  if (maxval != 65535) throw FormatError("pgm: expected maxval 65535 in " + path.string());
  in.get();

  LabelMap labels(w, h);
  std::vector<std::uint16_t> row(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    read_exact(in, row.data(), row.size(), "pgm payload");
    for (int x = 0; x < w; ++x) {
      std::uint16_t v = row[x];
      if (std::endian::native == std::endian::little) v = byteswap(v);  // samples are big-endian
      labels(x, y) = (v == kLabelSentinel) ? kUnassignedLabel : static_cast<std::int32_t>(v);
    }
  }
  return labels;
}

void write_labels_pgm(const std::filesystem::path& path, const LabelMap& labels) {
  auto out = open_write(path);
  out << "P5\n" << labels.width << " " << labels.height << "\n65535\n";
  std::vector<std::uint16_t> row(static_cast<std::size_t>(labels.width));
  for (int y = 0; y < labels.height; ++y) {
    for (int x = 0; x < labels.width; ++x) {
      const std::int32_t label = labels(x, y);
      if (label != kUnassignedLabel && (label < 0 || label >= kLabelSentinel))
        throw std::invalid_argument("pgm: label out of range");
      std::uint16_t v = (label == kUnassignedLabel) ? kLabelSentinel
                                                    : static_cast<std::uint16_t>(label);
      if (std::endian::native == std::endian::little) v = byteswap(v);
      row[x] = v;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(std::uint16_t)));
  }
  if (!out) throw std::runtime_error("pgm: write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// objects.txt

std::vector<ObjectRecord> read_objects_txt(const std::filesystem::path& path) {
  auto in = open_read(path);
  std::vector<ObjectRecord> objects;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int index = 0;
    Mat3 R;
    Vec3 t;
    long count = 0;
    int background = 0;
    if (!(ls >> index >> R(0, 0) >> R(0, 1) >> R(0, 2) >> R(1, 0) >> R(1, 1) >> R(1, 2) >>
          R(2, 0) >> R(2, 1) >> R(2, 2) >> t.x() >> t.y() >> t.z() >> count >> background)) {
      throw FormatError("objects: malformed line in " + path.string());
    }
    ObjectRecord rec;
    rec.motion = SE3(R, t);
    rec.point_count = count;
    rec.is_background = background != 0;
    objects.push_back(rec);
  }
  return objects;
}

void write_objects_txt(const std::filesystem::path& path, const std::vector<ObjectRecord>& objects) {
  auto out = open_write(path);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const ObjectRecord& rec = objects[i];
    const Mat3& R = rec.motion.rotation();
    const Vec3& t = rec.motion.translation();
    out << i;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << " " << format_double(R(r, c));
    for (int j = 0; j < 3; ++j) out << " " << format_double(t(j));
    out << " " << rec.point_count << " " << (rec.is_background ? 1 : 0) << "\n";
  }
  if (!out) throw std::runtime_error("objects: write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// TUM trajectory

std::vector<TrajectoryEntry> read_trajectory_tum(const std::filesystem::path& path) {
  auto in = open_read(path);
  std::vector<TrajectoryEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    TrajectoryEntry entry;
    double tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> entry.timestamp >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
      throw FormatError("trajectory: malformed line in " + path.string());
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (std::abs(q.norm() - 1.0) > 1e-6)
      throw FormatError("trajectory: quaternion not unit in " + path.string());
    q.normalize();
    entry.pose = SE3(q.toRotationMatrix(), Vec3(tx, ty, tz));
    entries.push_back(entry);
  }
  return entries;
}

void append_trajectory_tum(const std::filesystem::path& path, const TrajectoryEntry& entry) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("trajectory: cannot open " + path.string());
  Eigen::Quaterniond q(entry.pose.rotation());
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3& t = entry.pose.translation();
  out << format_double(entry.timestamp) << " " << format_double(t.x()) << " "
      << format_double(t.y()) << " " << format_double(t.z()) << " " << format_double(q.x()) << " "
      << format_double(q.y()) << " " << format_double(q.z()) << " " << format_double(q.w()) << "\n";
  if (!out) throw std::runtime_error("trajectory: write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Scene result + debug dumps

void write_scene_result(const SceneResult& result, const std::filesystem::path& dir,
                        double timestamp, const SE3& accumulated_pose) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + dir.string());

  write_labels_pgm(dir / "labels.pgm", result.labels);
  write_vec3_pfm(dir / "sceneflow.pfm", result.scene_flow);

  std::vector<ObjectRecord> records;
  records.reserve(result.objects.size());
  for (std::size_t i = 0; i < result.objects.size(); ++i) {
    ObjectRecord rec;
    rec.motion = result.objects[i].motion();
    rec.point_count = static_cast<long>(result.objects[i].cloud().size());
    rec.is_background = static_cast<int>(i) == result.background_idx;
    records.push_back(rec);
  }
  write_objects_txt(dir / "objects.txt", records);

  const auto trajectory = dir / "trajectory.txt";
  if (!std::filesystem::exists(trajectory))
    append_trajectory_tum(trajectory, {0.0, SE3()});
  append_trajectory_tum(trajectory, {timestamp, accumulated_pose});
}

void write_point_set_txt(const std::filesystem::path& path, const PointSet& points) {
  auto out = open_write(path);
  out << "# stride " << points.stride << " source " << points.source_width << "x"
      << points.source_height << "\n";
  out << "# x y z u v d r_t1 r_t2\n";
  for (const ImagePoint& p : points.points) {
    out << format_double(p.x) << " " << format_double(p.y) << " " << format_double(p.z) << " "
        << format_double(p.u) << " " << format_double(p.v) << " " << format_double(p.d) << " "
        << (p.r_t1 ? 1 : 0) << " " << (p.r_t2 ? 1 : 0) << "\n";
  }
}

void write_trace_txt(const std::filesystem::path& path, const PipelineTrace& trace,
                     const std::vector<RigidObject>& objects) {
  auto out = open_write(path);
  out << "# iteration uncovered proposals selected contribution components objects_total\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& it = trace.iterations[i];
    out << i << " " << it.uncovered << " " << it.proposals << " " << it.selected << " "
        << format_double(it.contribution) << " " << it.components << " " << it.objects_total
        << "\n";
  }
  out << "# object rotation_row_major translation cloud_size\n";
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Mat3& R = objects[i].motion().rotation();
    const Vec3& t = objects[i].motion().translation();
    out << i;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << " " << format_double(R(r, c));
    for (int j = 0; j < 3; ++j) out << " " << format_double(t(j));
    out << " " << objects[i].cloud().size() << "\n";
  }
}

}  // namespace sfseg
