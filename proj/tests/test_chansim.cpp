#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "wisense/chansim.hpp"

using namespace wisense;
using namespace wisense::chansim;

namespace {

Scene base_scene() {
  Scene s = Scene::default_scene();
  s.phase_model = PhaseDistortionModel::None;
  s.noise_std = 0.0;
  s.seed = 42;
  return s;
}

Scatterer static_path(double length, double amplitude = 1.0, double phase = 0.0) {
  Scatterer sc;
  sc.kind = ScattererKind::Static;
  sc.fixed_path_length = length;
  sc.amplitude = amplitude;
  sc.reflection_phase = phase;
  return sc;
}

Scatterer moving_along_baseline(double x0, double speed, double amplitude = 1.0) {
  Scatterer sc;
  sc.kind = ScattererKind::Dynamic;
  sc.amplitude = amplitude;
  sc.attenuate_with_distance = false;
  sc.trajectory = [x0, speed](double t) { return Vec3{x0 + speed * t, 0.0, 0.0}; };
  return sc;
}

// Test-side magnitude DFT of a real series, bins 1..N/2, mean removed.
int dominant_bin(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= n;
  int best = 1;
  double best_mag = -1.0;
  for (int k = 1; k <= n / 2; ++k) {
    cplx acc{0.0, 0.0};
    for (int t = 0; t < n; ++t)
      acc += (x[t] - mean) * std::exp(cplx{0.0, -2.0 * kPi * k * t / n});
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("path delay") {
  Scene s = base_scene();

  SUBCASE("degenerate collocated target") {
    Scene degenerate = s;
    degenerate.rx_position = degenerate.tx_position;
    Scatterer sc;
    sc.kind = ScattererKind::Dynamic;
    sc.trajectory = [&](double) { return degenerate.tx_position; };
    // single-element arrays so the scatterer sits exactly on both antennas
    degenerate.geom.n_tx = 1;
    degenerate.geom.n_rx = 1;
    CHECK(path_delay(degenerate, sc, 0, 0, 0.0) == doctest::Approx(0.0));
  }

  SUBCASE("static path of one light-microsecond") {
    const Scatterer sc = static_path(299.792458);
    CHECK(path_delay(s, sc, 0, 0, 0.0) == doctest::Approx(1e-6));
  }

  SUBCASE("radial motion doubles the delay rate") {
    // co-located tx/rx, target receding radially at v
    Scene mono = s;
    mono.rx_position = mono.tx_position;
    mono.geom.n_tx = 1;
    mono.geom.n_rx = 1;
    const double v = 1.7;
    Scatterer sc;
    sc.kind = ScattererKind::Dynamic;
    sc.trajectory = [v](double t) { return Vec3{10.0 + v * t, 0.0, 0.0}; };
    const double h = 1e-4;
    const double rate =
        (path_delay(mono, sc, 0, 0, 1.0 + h) - path_delay(mono, sc, 0, 0, 1.0 - h)) /
        (2.0 * h);
    CHECK(rate == doctest::Approx(2.0 * v / kSpeedOfLight).epsilon(1e-6));
  }
}

TEST_CASE("synthesize frame") {
  Scene s = base_scene();

  SUBCASE("no scatterers, no noise -> zero") {
    const CsiFrame f = synthesize_frame(s, 0.0);
    for (const auto& v : f.values) CHECK(std::abs(v) == 0.0);
  }

  SUBCASE("single static path, zero delay -> all ones") {
    s.scatterers.push_back(static_path(0.0));
    const CsiFrame f = synthesize_frame(s, 0.0);
    for (const auto& v : f.values) {
      CHECK(v.real() == doctest::Approx(1.0));
      CHECK(v.imag() == doctest::Approx(0.0));
    }
  }

  SUBCASE("half-period delay flips sign") {
    Scene one = s;
    one.subcarrier_freqs = {5.32e9};
    one.scatterers.push_back(static_path(kSpeedOfLight / (2.0 * 5.32e9)));
    const CsiFrame f = synthesize_frame(one, 0.0);
    CHECK(f.at(0, 0, 0).real() == doctest::Approx(-1.0));
    CHECK(f.at(0, 0, 0).imag() == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("synthesize sequence") {
  Scene s = base_scene();
  s.scatterers.push_back(static_path(9.0));
  s.scatterers.push_back(moving_along_baseline(9.0, 0.3, 0.02));
  s.phase_model = PhaseDistortionModel::PerPacketUniform;
  s.noise_std = 1e-3;

  SUBCASE("frame count and timestamps") {
    const CsiSequence seq = synthesize_sequence(s, 1.0);
    CHECK(seq.frames.size() == 1000);
    CHECK(seq.frames[10].timestamp == doctest::Approx(0.010));
    CHECK_THROWS_AS(synthesize_sequence(s, 0.0), std::invalid_argument);
  }

  SUBCASE("same seed is bit-identical") {
    const CsiSequence a = synthesize_sequence(s, 0.25);
    const CsiSequence b = synthesize_sequence(s, 0.25);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i)
      for (std::size_t j = 0; j < a.frames[i].values.size(); ++j)
        CHECK(a.frames[i].values[j] == b.frames[i].values[j]);
  }

  SUBCASE("different seed differs") {
    Scene s2 = s;
    s2.seed = 43;
    const CsiSequence a = synthesize_sequence(s, 0.05);
    const CsiSequence b = synthesize_sequence(s2, 0.05);
    bool any_diff = false;
    for (std::size_t j = 0; j < a.frames[0].values.size(); ++j)
      any_diff |= a.frames[0].values[j] != b.frames[0].values[j];
    CHECK(any_diff);
  }

  SUBCASE("ground-truth recomposition") {
    const CsiSequence seq = synthesize_sequence(s, 0.1);
    REQUIRE(seq.has_ground_truth());
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
      const auto& gt = seq.ground_truth[i];
      for (int n = 0; n < 3; ++n)
        for (int m = 0; m < 3; ++m)
          for (int k = 0; k < 30; ++k) {
            const cplx recomposed =
                (gt.h_static.at(n, m, k) + gt.h_dynamic.at(n, m, k)) *
                    std::exp(cplx{0.0, -gt.phi[k]}) +
                gt.noise.at(n, m, k);
            const cplx v = seq.frames[i].at(n, m, k);
            CHECK(std::abs(recomposed - v) <= 1e-12 * (std::abs(v) + 1.0));
          }
    }
  }
}

TEST_CASE("csi-speed power model") {
  Scene s = base_scene();
  s.scatterers.push_back(static_path(9.0, 1.0, 0.4));
  s.scatterers.push_back(static_path(14.0, 0.5, -1.1));

  SUBCASE("no dynamic paths -> constant static power") {
    const double p0 = predicted_power(s, s.subcarrier_freqs[0], 0.0, 0, 0).three_term;
    for (double t : {0.1, 0.5, 2.0})
      CHECK(predicted_power(s, s.subcarrier_freqs[0], t, 0, 0).three_term ==
            doctest::Approx(p0));
    const CsiFrame f = synthesize_frame(s, 0.3);
    CHECK(std::norm(f.at(0, 0, 0)) == doctest::Approx(p0));
  }

  SUBCASE("three-term expansion matches simulated |h|^2 exactly") {
    s.scatterers.push_back(moving_along_baseline(9.0, 0.4, 0.05));
    s.scatterers.push_back(moving_along_baseline(11.0, -0.25, 0.03));
    for (double t : {0.0, 0.37, 1.9}) {
      const CsiFrame f = synthesize_frame(s, t);
      for (int n = 0; n < 3; ++n)
        for (int k = 0; k < 30; k += 7) {
          const double sim = std::norm(f.at(n, 1, k));
          const double pred =
              predicted_power(s, s.subcarrier_freqs[k], t, n, 1).three_term;
          CHECK(sim == doctest::Approx(pred).epsilon(1e-9));
        }
    }
  }

  SUBCASE("strong static: two-term approximation within 1%") {
    s.scatterers.push_back(moving_along_baseline(9.0, 0.4, 0.015));
    // ||h_s|| / ||alpha|| = 100 at this configuration
    const auto p = predicted_power(s, s.subcarrier_freqs[3], 0.5, 1, 1);
    CHECK(std::fabs(p.three_term - p.two_term) / p.three_term < 0.01);
  }

  SUBCASE("single constant-velocity path: dominant tone at f v / c") {
    const double speed = 0.25;      // target speed along the baseline
    const double v_path = 2.0 * speed;  // path-length change rate
    Scene fft_scene = base_scene();
    fft_scene.scatterers.push_back(static_path(9.0, 1.0, 0.0));
    fft_scene.scatterers.push_back(moving_along_baseline(9.0, speed, 0.05));
    const double duration = 4.0;
    const CsiSequence seq = synthesize_sequence(fft_scene, duration, false);
    std::vector<double> power;
    power.reserve(seq.frames.size());
    for (const auto& f : seq.frames) power.push_back(std::norm(f.at(1, 1, 15)));
    const int bin = dominant_bin(power);
    const double f_c = fft_scene.subcarrier_freqs[15];
    const double expected_hz = f_c * v_path / kSpeedOfLight;
    const int expected_bin = static_cast<int>(std::lround(expected_hz * duration));
    CHECK(std::abs(bin - expected_bin) <= 1);
  }
}

TEST_CASE("phase distortion leaves |h| unchanged") {
  Scene a = base_scene();
  a.scatterers.push_back(static_path(9.0));
  a.scatterers.push_back(moving_along_baseline(9.0, 0.3, 0.05));
  Scene b = a;
  b.phase_model = PhaseDistortionModel::PerPacketUniform;
  const CsiFrame fa = synthesize_frame(a, 0.7, 7);
  const CsiFrame fb = synthesize_frame(b, 0.7, 7);
  for (std::size_t j = 0; j < fa.values.size(); ++j)
    CHECK(std::abs(fa.values[j]) == doctest::Approx(std::abs(fb.values[j])));
}
