#ifndef WISENSE_ESTIMATOR_HEATMAP_HPP
#define WISENSE_ESTIMATOR_HEATMAP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wisense/common.hpp"

namespace wisense {
namespace estimator {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// World-coordinate mapping of a regular grid; cell (r, c) is centered at
// origin + (c + 0.5, r + 0.5) * cell_size.
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  int height = 2;
  int width = 2;

  int cells() const { return height * width; }
  double cell_x(int c) const { return origin_x + (c + 0.5) * cell_size; }
  double cell_y(int r) const { return origin_y + (r + 0.5) * cell_size; }
  bool contains(const Point2& p) const {
    return p.x >= origin_x && p.x <= origin_x + width * cell_size &&
           p.y >= origin_y && p.y <= origin_y + height * cell_size;
  }

  void validate() const {
    if (height < 2 || width < 2)
      throw std::invalid_argument("GridSpec: grid dims must be >= 2x2");
    if (!(cell_size > 0.0))
      throw std::invalid_argument("GridSpec: cell_size must be > 0");
  }

  bool operator==(const GridSpec& o) const {
    return origin_x == o.origin_x && origin_y == o.origin_y &&
           cell_size == o.cell_size && height == o.height && width == o.width;
  }
};

struct Heatmap {
  GridSpec grid;
  std::vector<double> values;  // row-major height x width

  explicit Heatmap(const GridSpec& g = GridSpec{})
      : grid(g), values(static_cast<std::size_t>(g.cells()), 0.0) {}

  double& at(int r, int c) {
    return values[static_cast<std::size_t>(r) * grid.width + c];
  }
  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * grid.width + c];
  }
};

// Isotropic Gaussian bump, peak value 1 at `point`.
inline Heatmap heatmap_from_point(const Point2& point, const GridSpec& grid,
                                  double sigma) {
  grid.validate();
  if (!grid.contains(point))
    throw std::invalid_argument("heatmap_from_point: point outside grid");
  if (!(sigma > 0.0))
    throw std::invalid_argument("heatmap_from_point: sigma must be > 0");
  Heatmap hm(grid);
  double d2_min = std::numeric_limits<double>::infinity();
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) {
      const double dx = grid.cell_x(c) - point.x;
      const double dy = grid.cell_y(r) - point.y;
      hm.at(r, c) = dx * dx + dy * dy;
      d2_min = std::min(d2_min, hm.at(r, c));
    }
  // normalized so the nearest cell is exactly 1 (underflow-safe for tiny
  // sigma, where the bump degenerates to a one-hot)
  for (double& v : hm.values)
    v = std::exp(-(v - d2_min) / (2.0 * sigma * sigma));
  return hm;
}

enum class PeakMode { Hard, Soft };

// Softmax sharpening applied to standardized heatmap values (z-scores across
// the grid) before the soft expectation. Standardizing makes the surrogate
// invariant to the scale and offset of the raw values, so only the shape of
// the map moves the soft peak; the gain then sets how close the surrogate
// sits to the argmax. A Gaussian-bump map peaks around three standard
// deviations, which at gain 3 dominates the softmax.
inline constexpr double kSoftPeakGain = 3.0;
inline constexpr double kSoftPeakEps = 1e-12;

namespace detail {

// Standardization statistics shared by the soft peak and its jacobian.
struct SoftPeakStats {
  double mean = 0.0;
  double sd_raw = 0.0;                  // uncorrected standard deviation
  double sd = kSoftPeakEps;             // sd_raw + eps, the divisor
  std::vector<double> w;                // softmax weights over the grid
  Point2 p;                             // soft peak
};

inline SoftPeakStats soft_peak_stats(const Heatmap& hm) {
  const GridSpec& g = hm.grid;
  const std::size_t n = hm.values.size();
  SoftPeakStats st;
  double sq = 0.0;
  for (const double v : hm.values) {
    st.mean += v;
    sq += v * v;
  }
  st.mean /= static_cast<double>(n);
  st.sd_raw = std::sqrt(std::max(0.0, sq / static_cast<double>(n) -
                                          st.mean * st.mean));
  st.sd = st.sd_raw + kSoftPeakEps;

  double amax = -std::numeric_limits<double>::infinity();
  st.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    st.w[i] = kSoftPeakGain * (hm.values[i] - st.mean) / st.sd;
    amax = std::max(amax, st.w[i]);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    st.w[i] = std::exp(st.w[i] - amax);
    z += st.w[i];
  }
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * g.width + c;
      st.w[i] /= z;
      st.p.x += st.w[i] * g.cell_x(c);
      st.p.y += st.w[i] * g.cell_y(r);
    }
  return st;
}

}  // namespace detail

inline Point2 peak_coords(const Heatmap& hm, PeakMode mode) {
  const GridSpec& g = hm.grid;
  if (mode == PeakMode::Hard) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < hm.values.size(); ++i)
      if (hm.values[i] > hm.values[best]) best = i;
    const int r = static_cast<int>(best) / g.width;
    const int c = static_cast<int>(best) % g.width;
    return {g.cell_x(c), g.cell_y(r)};
  }
  return detail::soft_peak_stats(hm).p;
}

}  // namespace estimator
}  // namespace wisense

#endif  // WISENSE_ESTIMATOR_HEATMAP_HPP
