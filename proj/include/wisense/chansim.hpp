#ifndef WISENSE_CHANSIM_HPP
#define WISENSE_CHANSIM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wisense/common.hpp"
#include "wisense/resolution.hpp"
#include "wisense/rng.hpp"

// Synthetic CSI generation at the channel-response level: a scene of static
// and dynamic scatterers produces h(f, t) per antenna pair and subcarrier,
// with the static/dynamic split, per-packet phase distortion and noise all
// recorded as ground truth.

namespace wisense {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

enum class ScattererKind { Static, Dynamic };

struct Scatterer {
  ScattererKind kind = ScattererKind::Static;
  double amplitude = 1.0;         // |alpha| (at 1 m for dynamic 1/d scaling)
  double reflection_phase = 0.0;  // arg(alpha), radians
  // Static paths: fixed total path length [m]. Ignored for dynamic paths.
  double fixed_path_length = 0.0;
  // Dynamic paths: position as a function of time [s] -> [m].
  std::function<Vec3(double)> trajectory;
  // Dynamic paths: scale amplitude by 1/d(t) when true.
  bool attenuate_with_distance = true;

  cplx base_attenuation() const {
    return std::polar(amplitude, reflection_phase);
  }
};

enum class PhaseDistortionModel {
  None,              // phi(f, t) = 0
  PerPacketUniform,  // phi ~ U[0, 2pi) per packet, constant over f and pairs
  LinearInFreq       // phi = 2 pi f * offset, random offset per packet
};

struct Scene {
  ArrayGeometry geom;
  Vec3 tx_position;
  Vec3 rx_position;
  Vec3 array_axis{0.0, 1.0, 0.0};  // element axis for both ULAs
  std::vector<Scatterer> scatterers;
  std::vector<double> subcarrier_freqs;  // Hz, strictly increasing
  double sample_rate = 1000.0;           // Hz
  PhaseDistortionModel phase_model = PhaseDistortionModel::PerPacketUniform;
  double timing_offset_std = 1e-9;  // [s], LinearInFreq model only
  double noise_std = 0.0;           // per real component
  std::uint64_t seed = 0;

  int n_sub() const { return static_cast<int>(subcarrier_freqs.size()); }

  void validate() const {
    geom.validate();
    if (subcarrier_freqs.empty())
      throw std::invalid_argument("Scene: subcarrier list empty");
    for (std::size_t i = 1; i < subcarrier_freqs.size(); ++i)
      if (subcarrier_freqs[i] <= subcarrier_freqs[i - 1])
        throw std::invalid_argument("Scene: subcarriers must be strictly increasing");
    if (sample_rate <= 0.0)
      throw std::invalid_argument("Scene: sample_rate must be > 0");
  }

  Vec3 tx_element(int m) const {
    return tx_position + array_axis * ((m - 0.5 * (geom.n_tx - 1)) * geom.d_tx);
  }
  Vec3 rx_element(int n) const {
    return rx_position + array_axis * ((n - 0.5 * (geom.n_rx - 1)) * geom.d_rx);
  }

  // Default configuration mirroring a commodity 3x3 setup: 30 subcarriers
  // around 5.32 GHz spanning 10 MHz, 7 m separation, 1 kHz packet rate.
  static Scene default_scene() {
    Scene s;
    s.geom = ArrayGeometry::from_carrier(3, 3, 5.32e9, 10e6, 7.0);
    s.tx_position = {0.0, 0.0, 0.0};
    s.rx_position = {7.0, 0.0, 0.0};
    const double f0 = 5.32e9 - 5e6;
    for (int k = 0; k < 30; ++k)
      s.subcarrier_freqs.push_back(f0 + (k + 0.5) * (10e6 / 30.0));
    s.sample_rate = 1000.0;
    return s;
  }
};

// Complex tensor of shape N_r x N_t x N_sub, row-major in (n, m, k).
struct CsiFrame {
  int n_rx = 0, n_tx = 0, n_sub = 0;
  double timestamp = 0.0;
  std::vector<cplx> values;

  CsiFrame() = default;
  CsiFrame(int nr, int nt, int ns, double ts = 0.0)
      : n_rx(nr), n_tx(nt), n_sub(ns), timestamp(ts),
        values(static_cast<std::size_t>(nr) * nt * ns) {}

  cplx& at(int n, int m, int k) {
    return values[(static_cast<std::size_t>(n) * n_tx + m) * n_sub + k];
  }
  const cplx& at(int n, int m, int k) const {
    return values[(static_cast<std::size_t>(n) * n_tx + m) * n_sub + k];
  }
};

struct FrameGroundTruth {
  CsiFrame h_static;               // h_s contribution per entry
  CsiFrame h_dynamic;              // h_d contribution per entry
  CsiFrame noise;                  // additive noise actually drawn
  std::vector<double> phi;         // phase distortion per subcarrier
  std::vector<Vec3> dynamic_positions;  // one per dynamic scatterer
};

struct CsiSequence {
  double sample_rate = 0.0;
  std::vector<CsiFrame> frames;
  std::vector<FrameGroundTruth> ground_truth;  // empty or parallel to frames

  bool has_ground_truth() const { return ground_truth.size() == frames.size(); }
};

namespace chansim {

// Total propagation delay of one path for one antenna pair.
inline double path_delay(const Scene& scene, const Scatterer& sc, int m, int n,
                         double t) {
  if (sc.kind == ScattererKind::Static) return sc.fixed_path_length / kSpeedOfLight;
  const Vec3 p = sc.trajectory(t);
  const double d = (p - scene.tx_element(m)).norm() + (p - scene.rx_element(n)).norm();
  return d / kSpeedOfLight;
}

inline double path_length(const Scene& scene, const Scatterer& sc, int m, int n,
                          double t) {
  return path_delay(scene, sc, m, n, t) * kSpeedOfLight;
}

inline cplx path_attenuation(const Scene& scene, const Scatterer& sc, int m,
                             int n, double t) {
  cplx a = sc.base_attenuation();
  if (sc.kind == ScattererKind::Dynamic && sc.attenuate_with_distance)
    a /= path_length(scene, sc, m, n, t);
  return a;
}

namespace detail {

inline std::vector<double> draw_phase_distortion(const Scene& scene,
                                                 std::uint64_t frame_index) {
  std::vector<double> phi(scene.subcarrier_freqs.size(), 0.0);
  if (scene.phase_model == PhaseDistortionModel::None) return phi;
  Rng rng(substream_seed(scene.seed ^ 0x70686173ULL, frame_index));
  if (scene.phase_model == PhaseDistortionModel::PerPacketUniform) {
    const double p = rng.uniform(0.0, 2.0 * kPi);
    for (auto& v : phi) v = p;
  } else {  // LinearInFreq
    const double off = rng.gaussian() * scene.timing_offset_std;
    for (std::size_t k = 0; k < phi.size(); ++k)
      phi[k] = 2.0 * kPi * scene.subcarrier_freqs[k] * off;
  }
  return phi;
}

}  // namespace detail

// Synthesize one frame at time t. Ground truth (h_s, h_d, noise, phi) is
// recorded so the decomposition identity can be checked exactly.
inline std::pair<CsiFrame, FrameGroundTruth> synthesize_frame_with_truth(
    const Scene& scene, double t, std::uint64_t frame_index = 0) {
  scene.validate();
  const int nr = scene.geom.n_rx, nt = scene.geom.n_tx, ns = scene.n_sub();
  FrameGroundTruth gt;
  gt.h_static = CsiFrame(nr, nt, ns, t);
  gt.h_dynamic = CsiFrame(nr, nt, ns, t);
  gt.noise = CsiFrame(nr, nt, ns, t);
  gt.phi = detail::draw_phase_distortion(scene, frame_index);

  for (const auto& sc : scene.scatterers)
    if (sc.kind == ScattererKind::Dynamic)
      gt.dynamic_positions.push_back(sc.trajectory(t));

  CsiFrame frame(nr, nt, ns, t);
  Rng noise_rng(substream_seed(scene.seed ^ 0x6e6f697365ULL, frame_index));
  for (int n = 0; n < nr; ++n) {
    for (int m = 0; m < nt; ++m) {
      for (int k = 0; k < ns; ++k) {
        const double f = scene.subcarrier_freqs[k];
        cplx hs{0.0, 0.0}, hd{0.0, 0.0};
        for (const auto& sc : scene.scatterers) {
          const double tau = path_delay(scene, sc, m, n, t);
          const cplx term = path_attenuation(scene, sc, m, n, t) *
                            std::exp(cplx{0.0, -2.0 * kPi * f * tau});
          (sc.kind == ScattererKind::Static ? hs : hd) += term;
        }
        gt.h_static.at(n, m, k) = hs;
        gt.h_dynamic.at(n, m, k) = hd;
        cplx noise{0.0, 0.0};
        if (scene.noise_std > 0.0)
          noise = noise_rng.complex_gaussian(scene.noise_std);
        gt.noise.at(n, m, k) = noise;
        frame.at(n, m, k) =
            (hs + hd) * std::exp(cplx{0.0, -gt.phi[k]}) + noise;
      }
    }
  }
  return {std::move(frame), std::move(gt)};
}

inline CsiFrame synthesize_frame(const Scene& scene, double t,
                                 std::uint64_t frame_index = 0) {
  return synthesize_frame_with_truth(scene, t, frame_index).first;
}

// Uniformly sampled sequence over [0, duration). Deterministic per seed:
// each frame's noise/phi substream depends only on (seed, frame index).
inline CsiSequence synthesize_sequence(const Scene& scene, double duration,
                                       bool record_ground_truth = true) {
  if (duration <= 0.0)
    throw std::invalid_argument("synthesize_sequence: duration must be > 0");
  scene.validate();
  const auto n_frames =
      static_cast<std::size_t>(std::floor(duration * scene.sample_rate + 0.5));
  if (n_frames < 1)
    throw std::invalid_argument("synthesize_sequence: duration*sample_rate < 1");
  CsiSequence seq;
  seq.sample_rate = scene.sample_rate;
  seq.frames.reserve(n_frames);
  if (record_ground_truth) seq.ground_truth.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double t = static_cast<double>(i) / scene.sample_rate;
    auto [frame, gt] = synthesize_frame_with_truth(scene, t, i);
    seq.frames.push_back(std::move(frame));
    if (record_ground_truth) seq.ground_truth.push_back(std::move(gt));
  }
  return seq;
}

struct PowerPrediction {
  double three_term = 0.0;  // full expansion
  double two_term = 0.0;    // dynamic-dynamic cross term dropped
};

// CSI-Speed power expansion of |h(f, t)|^2 for one antenna pair: static
// power, static-dynamic beat terms, and the dynamic-dynamic cross terms.
inline PowerPrediction predicted_power(const Scene& scene, double f, double t,
                                       int n, int m) {
  cplx hs{0.0, 0.0};
  std::vector<cplx> dyn_alpha;
  std::vector<double> dyn_len;
  for (const auto& sc : scene.scatterers) {
    if (sc.kind == ScattererKind::Static) {
      hs += sc.base_attenuation() *
            std::exp(cplx{0.0, -2.0 * kPi * f * sc.fixed_path_length / kSpeedOfLight});
    } else {
      dyn_alpha.push_back(path_attenuation(scene, sc, m, n, t));
      dyn_len.push_back(path_length(scene, sc, m, n, t));
    }
  }
  const double hs_mag = std::abs(hs);
  const double hs_arg = std::arg(hs);
  double beat = 0.0;
  for (std::size_t l = 0; l < dyn_alpha.size(); ++l) {
    // phi_sl = arg h_s - arg alpha_l; d_l(t) = d_l(0) + integral of v_l
    const double phi_sl = hs_arg - std::arg(dyn_alpha[l]);
    beat += 2.0 * hs_mag * std::abs(dyn_alpha[l]) *
            std::cos(2.0 * kPi * dyn_len[l] * f / kSpeedOfLight + phi_sl);
  }
  double cross = 0.0;
  for (std::size_t k = 0; k < dyn_alpha.size(); ++k) {
    for (std::size_t l = 0; l < dyn_alpha.size(); ++l) {
      const double phi_kl = std::arg(dyn_alpha[l]) - std::arg(dyn_alpha[k]);
      cross += std::abs(dyn_alpha[k]) * std::abs(dyn_alpha[l]) *
               std::cos(2.0 * kPi * (dyn_len[k] - dyn_len[l]) * f / kSpeedOfLight +
                        phi_kl);
    }
  }
  PowerPrediction p;
  p.two_term = hs_mag * hs_mag + beat;
  p.three_term = p.two_term + cross;
  return p;
}

}  // namespace chansim
}  // namespace wisense

#endif  // WISENSE_CHANSIM_HPP
