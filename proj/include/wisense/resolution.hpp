#ifndef WISENSE_RESOLUTION_HPP
#define WISENSE_RESOLUTION_HPP

#include <cmath>
#include <complex>
#include <stdexcept>

#include "wisense/common.hpp"

// Closed-form bistatic resolution analysis for a single Wi-Fi transceiver
// pair: array factor, angular resolution, sum-path (ToF) resolution and the
// receiver-range resolution obtained by combining the two on the ToF ellipse.

namespace wisense {

struct ArrayGeometry {
  int n_tx = 3;            // transmit antenna count
  int n_rx = 3;            // receive antenna count
  double d_tx = 0.0;       // tx element spacing [m]
  double d_rx = 0.0;       // rx element spacing [m]
  double wavelength = 0.0; // [m]
  double bandwidth = 0.0;  // [Hz]
  double d_rt = 0.0;       // transmitter-receiver separation [m]

  void validate() const {
    if (n_tx < 1 || n_rx < 1)
      throw std::invalid_argument("ArrayGeometry: antenna counts must be >= 1");
    if (d_tx <= 0.0 || d_rx <= 0.0 || wavelength <= 0.0 || bandwidth <= 0.0 ||
        d_rt <= 0.0)
      throw std::invalid_argument("ArrayGeometry: all dimensions must be > 0");
  }

  static ArrayGeometry from_carrier(int n_tx, int n_rx, double carrier_hz,
                                    double bandwidth_hz, double d_rt,
                                    double spacing_in_wavelengths = 0.5) {
    ArrayGeometry g;
    g.n_tx = n_tx;
    g.n_rx = n_rx;
    g.wavelength = kSpeedOfLight / carrier_hz;
    g.d_tx = spacing_in_wavelengths * g.wavelength;
    g.d_rx = spacing_in_wavelengths * g.wavelength;
    g.bandwidth = bandwidth_hz;
    g.d_rt = d_rt;
    return g;
  }
};

namespace resolution {

inline constexpr double kCosSingularityTol = 1e-9;

// Phase lead of the (m, n) antenna pair relative to pair (0, 0).
inline double phase_difference(const ArrayGeometry& geom, int m, int n,
                               double theta_t, double theta_r) {
  if (m < 0 || m >= geom.n_tx)
    throw std::invalid_argument("phase_difference: tx index out of range");
  if (n < 0 || n >= geom.n_rx)
    throw std::invalid_argument("phase_difference: rx index out of range");
  return (2.0 * kPi / geom.wavelength) *
         (m * geom.d_tx * std::sin(theta_t) + n * geom.d_rx * std::sin(theta_r));
}

// Array factor: sum of unit phasors over all antenna pairs.
inline cplx steering_sum(const ArrayGeometry& geom, double theta_t,
                         double theta_r) {
  cplx acc{0.0, 0.0};
  for (int m = 0; m < geom.n_tx; ++m)
    for (int n = 0; n < geom.n_rx; ++n)
      acc += std::exp(cplx{0.0, phase_difference(geom, m, n, theta_t, theta_r)});
  return acc;
}

// lambda / (N_r d_r |cos theta_r|); diverges toward endfire.
inline double angular_resolution(const ArrayGeometry& geom, double theta_r) {
  const double c = std::fabs(std::cos(theta_r));
  if (c < kCosSingularityTol)
    throw singularity_error("angular_resolution: theta_r at endfire singularity");
  return geom.wavelength / (geom.n_rx * geom.d_rx * c);
}

// Resolution of the summed path length L = l_t + l_r, c/B.
inline double sum_path_resolution(const ArrayGeometry& geom) {
  return kSpeedOfLight / geom.bandwidth;
}

// Range resolution toward the receiver on the constant-theta_r ray,
// obtained from the ToF ellipse with foci at tx and rx.
inline double range_resolution(const ArrayGeometry& geom, double L,
                               double theta_r) {
  if (L <= geom.d_rt)
    throw std::domain_error("range_resolution: requires L > d_rt");
  const double d = geom.d_rt;
  const double num = d * d + L * L - 2.0 * d * L * std::cos(theta_r);
  const double den = L - d * std::cos(theta_r);
  return num / (2.0 * den * den) * kSpeedOfLight / geom.bandwidth;
}

// dl_t/dl_r along the constant-theta_r ray at fixed L budget.
inline double ellipse_range_sensitivity(const ArrayGeometry& geom, double L,
                                        double theta_r) {
  if (L <= geom.d_rt)
    throw std::domain_error("ellipse_range_sensitivity: requires L > d_rt");
  const double d = geom.d_rt;
  const double s = std::sin(theta_r);
  const double den = d * d + L * L - 2.0 * d * L * std::cos(theta_r);
  if (den < 1e-12)
    throw std::domain_error("ellipse_range_sensitivity: degenerate geometry");
  return 1.0 - 2.0 * d * d * s * s / den;
}

// Combined range + cross-range cell size at target range l_r.
inline double total_spatial_resolution(const ArrayGeometry& geom, double L,
                                       double theta_r, double l_r) {
  const double dlr = range_resolution(geom, L, theta_r);
  const double dth = angular_resolution(geom, theta_r);
  const double cross = 2.0 * l_r * std::tan(dth / 2.0);
  return std::sqrt(dlr * dlr + cross * cross);
}

}  // namespace resolution
}  // namespace wisense

#endif  // WISENSE_RESOLUTION_HPP
