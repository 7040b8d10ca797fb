#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sfseg/common.hpp"

namespace sfseg {

/// Dense row-major raster. (x, y) indexing with x the column.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
    if (w < 0 || h < 0) throw std::invalid_argument("Image: negative size");
  }

  bool empty() const { return data.empty(); }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  T& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  bool same_size(int w, int h) const { return width == w && height == h; }
};

using DepthMap = Image<float>;
using FlowMap = Image<Eigen::Vector2f>;
using Mask = Image<std::uint8_t>;
using LabelMap = Image<std::int32_t>;

inline constexpr std::int32_t kUnassignedLabel = -1;

inline bool finite_depth(float z) { return std::isfinite(z) && z > 0.0f; }

namespace detail {

/// Tap coordinates and weights for a bilinear sample. Integer coordinates
/// collapse to a single tap along that axis, so edge pixels stay sampleable.
struct BilinearTaps {
  int x0, x1, y0, y1;
  double fx, fy;
  bool in_bounds;
};

inline BilinearTaps bilinear_taps(double x, double y, int width, int height) {
  BilinearTaps t{};
  t.x0 = static_cast<int>(std::floor(x));
  t.y0 = static_cast<int>(std::floor(y));
  t.fx = x - t.x0;
  t.fy = y - t.y0;
  t.x1 = t.fx == 0.0 ? t.x0 : t.x0 + 1;
  t.y1 = t.fy == 0.0 ? t.y0 : t.y0 + 1;
  t.in_bounds = t.x0 >= 0 && t.y0 >= 0 && t.x1 < width && t.y1 < height;
  return t;
}

}  // namespace detail

/// Bilinear sample of a scalar map at (x, y). All contributing taps must be
/// in bounds and valid (finite and, when a mask is given, mask != 0);
/// averaging across invalid samples would fabricate surfaces.
inline std::optional<double> sample_bilinear(const DepthMap& img, double x, double y,
                                             const Mask* valid = nullptr) {
  const auto t = detail::bilinear_taps(x, y, img.width, img.height);
  if (!t.in_bounds) return std::nullopt;
  const float v00 = img(t.x0, t.y0), v10 = img(t.x1, t.y0), v01 = img(t.x0, t.y1),
              v11 = img(t.x1, t.y1);
  if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v01) || !std::isfinite(v11))
    return std::nullopt;
  if (valid) {
    if (!(*valid)(t.x0, t.y0) || !(*valid)(t.x1, t.y0) || !(*valid)(t.x0, t.y1) ||
        !(*valid)(t.x1, t.y1))
      return std::nullopt;
  }
  const double top = v00 * (1.0 - t.fx) + v10 * t.fx;
  const double bot = v01 * (1.0 - t.fx) + v11 * t.fx;
  return top * (1.0 - t.fy) + bot * t.fy;
}

/// Bilinear sample of a flow map; same validity rules, NaN taps invalid.
inline std::optional<Eigen::Vector2d> sample_bilinear(const FlowMap& img, double x, double y) {
  const auto t = detail::bilinear_taps(x, y, img.width, img.height);
  if (!t.in_bounds) return std::nullopt;
  const Eigen::Vector2f taps[4] = {img(t.x0, t.y0), img(t.x1, t.y0), img(t.x0, t.y1),
                                   img(t.x1, t.y1)};
  for (const auto& tap : taps) {
    if (!std::isfinite(tap.x()) || !std::isfinite(tap.y())) return std::nullopt;
  }
  const Eigen::Vector2d top = taps[0].cast<double>() * (1.0 - t.fx) + taps[1].cast<double>() * t.fx;
  const Eigen::Vector2d bot = taps[2].cast<double>() * (1.0 - t.fx) + taps[3].cast<double>() * t.fx;
  return top * (1.0 - t.fy) + bot * t.fy;
}

}  // namespace sfseg
