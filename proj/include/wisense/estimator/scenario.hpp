#ifndef WISENSE_ESTIMATOR_SCENARIO_HPP
#define WISENSE_ESTIMATOR_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "wisense/chansim.hpp"
#include "wisense/estimator/dataset.hpp"
#include "wisense/rng.hpp"

// Seeded synthetic scenario for the estimator: a cluster of dynamic
// scatterers ("keypoints") around a smoothly wandering centroid, on top of a
// strong static background. The centroid path is a deterministic sum of
// seeded sinusoids, so ground truth is available in closed form at any time.

namespace wisense {
namespace estimator {

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double duration = 6.0;     // seconds of CSI
  double truth_rate = 30.0;  // truth instants per second
  int n_keypoints = kDefaultKeypoints;
  double target_amp = 0.05;     // per-scatterer reflectivity (1 m reference)
  double noise_std = 0.01;      // CSI noise per real component
  double cluster_radius = 0.3;  // keypoint ring radius, meters
  double wander = 0.8;          // centroid excursion bound, meters
  Vec3 center{3.5, 2.2, 0.0};
};

namespace detail {

struct Wobble {
  double a[3], w[3], p[3];

  double at(double t) const {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) v += a[i] * std::sin(w[i] * t + p[i]);
    return v;
  }
};

inline Wobble draw_wobble(Rng& rng, double amplitude) {
  Wobble wb;
  double norm = 0.0;
  for (int i = 0; i < 3; ++i) {
    wb.a[i] = rng.uniform(0.4, 1.0);
    norm += wb.a[i];
    wb.w[i] = 2.0 * kPi * rng.uniform(0.15, 0.6);
    wb.p[i] = rng.uniform(0.0, 2.0 * kPi);
  }
  for (int i = 0; i < 3; ++i) wb.a[i] *= amplitude / norm;
  return wb;
}

}  // namespace detail

struct Scenario {
  ScenarioConfig cfg;
  Scene scene;
  detail::Wobble wx, wy;
  double spin_rate = 0.0, spin_phase = 0.0;

  Point2 centroid(double t) const {
    return {cfg.center.x + wx.at(t), cfg.center.y + wy.at(t)};
  }

  Point2 keypoint_offset(int k, double t) const {
    const double base =
        2.0 * kPi * static_cast<double>(k) / cfg.n_keypoints;
    const double th = base + spin_phase + spin_rate * t;
    const double r = cfg.cluster_radius * (k % 2 == 0 ? 1.0 : 0.7);
    return {r * std::cos(th), r * std::sin(th)};
  }

  double depth(double t) const {
    const Point2 c = centroid(t);
    const double dx = c.x - scene.rx_position.x;
    const double dy = c.y - scene.rx_position.y;
    return std::hypot(dx, dy);
  }

  std::vector<TruthRecord> truth_records() const {
    std::vector<TruthRecord> out;
    for (int i = 0;; ++i) {
      const double t = static_cast<double>(i) / cfg.truth_rate;
      if (t > cfg.duration) break;
      TruthRecord tr;
      tr.timestamp = t;
      tr.location = centroid(t);
      tr.depth = depth(t);
      for (int k = 0; k < cfg.n_keypoints; ++k)
        tr.keypoints.push_back(keypoint_offset(k, t));
      out.push_back(std::move(tr));
    }
    return out;
  }
};

inline Scenario make_scenario(const ScenarioConfig& cfg) {
  Scenario sc;
  sc.cfg = cfg;
  Rng rng(substream_seed(cfg.seed, 0x7363656e65ULL));
  sc.wx = detail::draw_wobble(rng, cfg.wander);
  sc.wy = detail::draw_wobble(rng, cfg.wander);
  sc.spin_rate = rng.uniform(0.3, 0.8) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  sc.spin_phase = rng.uniform(0.0, 2.0 * kPi);

  Scene& s = sc.scene;
  s = Scene::default_scene();
  s.seed = cfg.seed;
  s.noise_std = cfg.noise_std;
  s.phase_model = PhaseDistortionModel::PerPacketUniform;

  Scatterer wall;
  wall.kind = ScattererKind::Static;
  wall.fixed_path_length = 9.0;
  wall.amplitude = 1.0;
  wall.reflection_phase = 0.3;
  s.scatterers.push_back(wall);
  wall.fixed_path_length = 13.0;
  wall.amplitude = 0.6;
  wall.reflection_phase = -0.9;
  s.scatterers.push_back(wall);

  for (int k = 0; k < cfg.n_keypoints; ++k) {
    Scatterer sck;
    sck.kind = ScattererKind::Dynamic;
    sck.amplitude = cfg.target_amp;
    // reflectivity is a property of the target, not of the recording: keyed
    // by keypoint index only, so differently-seeded scenarios share it
    Rng prng(substream_seed(0x7265666c65637453ULL, k));
    sck.reflection_phase = prng.uniform(0.0, 2.0 * kPi);
    sck.attenuate_with_distance = true;
    // capture by value: trajectory closes over the wobble parameters
    const detail::Wobble wx = sc.wx, wy = sc.wy;
    const double spin_rate = sc.spin_rate, spin_phase = sc.spin_phase;
    const ScenarioConfig cc = cfg;
    sck.trajectory = [wx, wy, spin_rate, spin_phase, cc, k](double t) {
      const double cx = cc.center.x + wx.at(t);
      const double cy = cc.center.y + wy.at(t);
      const double base = 2.0 * kPi * static_cast<double>(k) / cc.n_keypoints;
      const double th = base + spin_phase + spin_rate * t;
      const double r = cc.cluster_radius * (k % 2 == 0 ? 1.0 : 0.7);
      return Vec3{cx + r * std::cos(th), cy + r * std::sin(th), 0.0};
    };
    s.scatterers.push_back(std::move(sck));
  }
  return sc;
}

}  // namespace estimator
}  // namespace wisense

#endif  // WISENSE_ESTIMATOR_SCENARIO_HPP
