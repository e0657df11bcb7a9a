#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "wisense/preprocess.hpp"

using namespace wisense;
using namespace wisense::preprocess;

namespace {

Scatterer static_path(double length, double amplitude, double phase = 0.0) {
  Scatterer sc;
  sc.kind = ScattererKind::Static;
  sc.fixed_path_length = length;
  sc.amplitude = amplitude;
  sc.reflection_phase = phase;
  return sc;
}

Scatterer orbiting_target(Vec3 center, double radius, double omega,
                          double amplitude) {
  Scatterer sc;
  sc.kind = ScattererKind::Dynamic;
  sc.amplitude = amplitude;
  sc.attenuate_with_distance = false;
  sc.trajectory = [=](double t) {
    return Vec3{center.x + radius * std::cos(omega * t),
                center.y + radius * std::sin(omega * t), center.z};
  };
  return sc;
}

// Strong static background plus one moving target; h_s / h_d ratio is set
// by the amplitudes.
Scene test_scene(std::uint64_t seed, double dynamic_amp = 0.02) {
  Scene s = Scene::default_scene();
  s.seed = seed;
  s.phase_model = PhaseDistortionModel::PerPacketUniform;
  s.scatterers.push_back(static_path(9.0, 1.0, 0.3));
  s.scatterers.push_back(static_path(13.0, 0.6, -0.9));
  // small-displacement target: path-length excursion well below a
  // wavelength keeps the reference phase wiggle coherent with h_d
  s.scatterers.push_back(
      orbiting_target({3.5, 2.0, 0.0}, 0.002, 2.0 * kPi * 3.0, dynamic_amp));
  return s;
}

// |Pearson correlation| between two complex series.
double complex_correlation(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx ma{0, 0}, mb{0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  cplx cov{0, 0};
  double va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * std::conj(b[i] - mb);
    va += std::norm(a[i] - ma);
    vb += std::norm(b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return std::abs(cov) / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("vectorize") {
  CsiFrame f(2, 2, 1);
  f.at(0, 0, 0) = {1, 0};
  f.at(0, 1, 0) = {2, 0};
  f.at(1, 0, 0) = {3, 0};
  f.at(1, 1, 0) = {4, 0};
  const CsiVector v = vectorize(f, 0);
  CHECK(v == CsiVector{{1, 0}, {2, 0}, {3, 0}, {4, 0}});

  CsiFrame big(3, 3, 30);
  const auto vs = vectorize(big);
  CHECK(vs.size() == 30);
  CHECK(vs.front().size() == 9);

  // round trip
  Scene s = test_scene(1);
  const CsiFrame frame = chansim::synthesize_frame(s, 0.1);
  const CsiFrame back = unvectorize(vectorize(frame), 3, 3);
  for (std::size_t j = 0; j < frame.values.size(); ++j)
    CHECK(back.values[j] == frame.values[j]);
}

TEST_CASE("select reference") {
  Scene s = Scene::default_scene();
  s.phase_model = PhaseDistortionModel::None;
  CsiSequence seq;
  seq.sample_rate = 1000.0;
  for (int i = 0; i < 10; ++i) {
    CsiFrame f(3, 3, 2);
    for (auto& v : f.values) v = {1.0, 0.0};
    f.at(1, 2, 0) = {10.0, 0.0};  // element index 5 dominates
    f.at(1, 2, 1) = {10.0, 0.0};
    seq.frames.push_back(f);
  }
  CHECK(select_reference(seq, 1) == std::vector<int>{5});

  SUBCASE("exact tie broken toward lowest index") {
    for (auto& f : seq.frames) {
      f.at(1, 2, 0) = {1.0, 0.0};
      f.at(1, 2, 1) = {1.0, 0.0};
      f.at(0, 2, 0) = {7.0, 0.0};  // index 2
      f.at(0, 2, 1) = {7.0, 0.0};
      f.at(2, 1, 0) = {7.0, 0.0};  // index 7
      f.at(2, 1, 1) = {7.0, 0.0};
    }
    CHECK(select_reference(seq, 1) == std::vector<int>{2});
  }

  SUBCASE("errors") {
    CsiSequence empty;
    CHECK_THROWS_AS(select_reference(empty, 1), std::invalid_argument);
    CHECK_THROWS_AS(select_reference(seq, 0), std::invalid_argument);
    CHECK_THROWS_AS(select_reference(seq, 9), std::invalid_argument);
  }
}

TEST_CASE("conjugate product") {
  SUBCASE("unit vector") {
    CsiVector e3(5, cplx{0, 0});
    e3[3] = {1, 0};
    const ConjProduct p = conjugate_product(e3);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c)
        CHECK(p.at(r, c) == (r == 3 && c == 3 ? cplx{1, 0} : cplx{0, 0}));
  }

  SUBCASE("hand evaluation [1+j, 2]") {
    const ConjProduct p = conjugate_product({{1, 1}, {2, 0}});
    CHECK(p.at(0, 0) == cplx{2, 0});
    CHECK(p.at(0, 1) == cplx{2, 2});
    CHECK(p.at(1, 0) == cplx{2, -2});
    CHECK(p.at(1, 1) == cplx{4, 0});
  }

  SUBCASE("hermitian with real non-negative diagonal") {
    const CsiVector v = {{0.3, -1.2}, {2.0, 0.7}, {-0.5, 0.1}};
    const ConjProduct p = conjugate_product(v);
    for (int r = 0; r < 3; ++r) {
      CHECK(p.at(r, r).imag() == 0.0);
      CHECK(p.at(r, r).real() >= 0.0);
      for (int c = 0; c < 3; ++c)
        CHECK(p.at(r, c) == std::conj(p.at(c, r)));
    }
  }
}

TEST_CASE("high pass filter") {
  FilterConfig cfg;

  SUBCASE("constant series -> zero") {
    std::vector<ConjProduct> series(1500, conjugate_product({{1, 2}, {3, -1}}));
    const auto out = high_pass(series, cfg, 1000.0);
    for (const auto& p : out)
      for (const auto& v : p.m) CHECK(std::abs(v) < 1e-12);
  }

  SUBCASE("series shorter than window rejected") {
    std::vector<ConjProduct> series(10, conjugate_product({{1, 0}}));
    CHECK_THROWS_AS(high_pass(series, cfg, 1000.0), std::invalid_argument);
  }

  SUBCASE("DC + 10 Hz sinusoid recovered within 5%") {
    for (const FilterMode mode : {FilterMode::SlidingMean, FilterMode::SinglePole}) {
      FilterConfig fc;
      fc.mode = mode;
      const double fs = 1000.0, f0 = 10.0, amp = 0.7;
      const int n = 3000;
      std::vector<ConjProduct> series;
      series.reserve(n);
      for (int t = 0; t < n; ++t) {
        ConjProduct p(1);
        p.at(0, 0) = {5.0 + amp * std::sin(2.0 * kPi * f0 * t / fs), 0.0};
        series.push_back(p);
      }
      const auto out = high_pass(series, fc, fs);
      // RMS amplitude over the steady-state middle section
      double sq = 0.0;
      int count = 0;
      for (int t = n / 4; t < 3 * n / 4; ++t) {
        sq += std::norm(out[t].at(0, 0));
        ++count;
      }
      const double est_amp = std::sqrt(2.0 * sq / count);
      CHECK(est_amp == doctest::Approx(amp).epsilon(0.05));
    }
  }

  SUBCASE("pure static scene passes nothing") {
    Scene s = test_scene(3);
    s.scatterers.pop_back();  // drop the dynamic target
    const CsiSequence seq = chansim::synthesize_sequence(s, 1.5, false);
    std::vector<ConjProduct> prods;
    for (const auto& f : seq.frames)
      prods.push_back(conjugate_product(vectorize(f, 0)));
    const auto out = high_pass(prods, cfg, seq.sample_rate);
    double in_mag = 0.0, out_mag = 0.0;
    for (std::size_t t = 0; t < prods.size(); ++t)
      for (std::size_t j = 0; j < prods[t].m.size(); ++j) {
        in_mag = std::max(in_mag, std::abs(prods[t].m[j]));
        out_mag = std::max(out_mag, std::abs(out[t].m[j]));
      }
    CHECK(out_mag < 1e-9 * in_mag);
  }
}

TEST_CASE("beta augmented product") {
  Scene s = test_scene(7);
  const CsiSequence seq = chansim::synthesize_sequence(s, 1.5, false);
  const int ref = select_reference(seq, 1).front();
  FilterConfig fc;

  SUBCASE("hermitian at every step") {
    const auto dprime = beta_augmented_product(seq, 4, ref, 100.0, fc);
    for (std::size_t t = 0; t < dprime.size(); t += 211)
      for (int r = 0; r < dprime[t].dim; ++r)
        for (int c = 0; c < dprime[t].dim; ++c)
          CHECK(std::abs(dprime[t].at(r, c) - std::conj(dprime[t].at(c, r))) < 1e-9);
  }

  SUBCASE("zero dynamic scene -> ~0") {
    Scene stat = s;
    stat.scatterers.pop_back();
    const CsiSequence sseq = chansim::synthesize_sequence(stat, 1.5, false);
    const auto dprime = beta_augmented_product(sseq, 0, ref, 100.0, fc);
    // static power scale, including the beta-amplified reference entry
    double static_power = 0.0;
    for (const auto& f : sseq.frames)
      static_power = std::max(static_power, std::norm(vectorize(f, 0)[ref]));
    static_power *= 101.0 * 101.0;
    for (const auto& p : dprime)
      for (const auto& v : p.m) CHECK(std::abs(v) < 1e-6 * static_power);
  }
}

TEST_CASE("extract dynamic") {
  Scene s = test_scene(11);
  const CsiSequence seq = chansim::synthesize_sequence(s, 2.0);
  PreprocessConfig cfg;
  int ref = -1;
  const DynamicColumns cols = run_pipeline(seq, cfg, &ref);

  SUBCASE("default output shape is 2 x 9 x 30 per packet") {
    const auto tensors = to_dynamic_tensors(cols);
    CHECK(tensors.channels == 2);
    CHECK(tensors.rows == 9);
    CHECK(tensors.n_sub == 30);
    CHECK(tensors.n_packets() == seq.frames.size());
    for (std::size_t t = 0; t < tensors.n_packets(); t += 501)
      for (int r = 0; r < 9; ++r)
        for (int k = 0; k < 30; ++k) {
          CHECK(tensors.at(t, 0, r, k) >= 0.0f);           // amplitude
          CHECK(tensors.at(t, 1, r, k) <= float(kPi));     // phase
          CHECK(tensors.at(t, 1, r, k) >= float(-kPi));
        }
  }

  SUBCASE("extracted column tracks ground-truth h_d") {
    // discard filter edges
    const std::size_t lo = 500, hi = seq.frames.size() - 500;
    for (int k = 0; k < 30; k += 9) {
      for (int r = 0; r < 9; ++r) {
        if (r == ref) continue;
        std::vector<cplx> extracted, truth;
        for (std::size_t t = lo; t < hi; ++t) {
          extracted.push_back(cols.at(t, r, k));
          const auto& hd = seq.ground_truth[t].h_dynamic;
          truth.push_back(hd.values[static_cast<std::size_t>(r) * 30 + k]);
        }
        CHECK(complex_correlation(extracted, truth) >= 0.99);
      }
    }
  }

  SUBCASE("zero dynamic scene -> amplitude plane ~ 0") {
    Scene stat = s;
    stat.scatterers.pop_back();
    const CsiSequence sseq = chansim::synthesize_sequence(stat, 1.5, false);
    const DynamicColumns c2 = run_pipeline(sseq, cfg);
    double max_mag = 0.0;
    for (const auto& v : c2.values) max_mag = std::max(max_mag, std::abs(v));
    double static_scale = 0.0;
    for (const auto& f : sseq.frames)
      for (const auto& v : f.values)
        static_scale = std::max(static_scale, std::norm(v) * cfg.kappa * cfg.kappa);
    CHECK(max_mag < 1e-6 * static_scale);
  }
}

TEST_CASE("phase distortion immunity") {
  PreprocessConfig cfg;
  Scene a = test_scene(13);
  a.phase_model = PhaseDistortionModel::None;
  Scene b = test_scene(13);
  b.phase_model = PhaseDistortionModel::PerPacketUniform;
  const DynamicColumns ca = run_pipeline(chansim::synthesize_sequence(a, 1.2, false), cfg);
  const DynamicColumns cb = run_pipeline(chansim::synthesize_sequence(b, 1.2, false), cfg);
  REQUIRE(ca.values.size() == cb.values.size());
  // rounding scale is set by the beta-augmented products, ~ (kappa |h|)^2
  double scale = 0.0;
  for (const auto& f : chansim::synthesize_sequence(a, 1.2, false).frames)
    for (const auto& v : f.values)
      scale = std::max(scale, std::norm(v) * cfg.kappa * cfg.kappa);
  for (std::size_t i = 0; i < ca.values.size(); ++i)
    CHECK(std::abs(ca.values[i] - cb.values[i]) <= 1e-12 * scale);
}

TEST_CASE("static dominance inequality") {
  // on a strong-static scene the dropped h_d h_d^T term is < 1% of the
  // retained cross terms
  Scene s = test_scene(17, 0.02);
  const CsiSequence seq = chansim::synthesize_sequence(s, 0.2);
  REQUIRE(seq.has_ground_truth());
  double max_ratio = 0.0;
  for (std::size_t t = 0; t < seq.frames.size(); t += 37) {
    const auto& gt = seq.ground_truth[t];
    for (int k = 0; k < 30; k += 11) {
      CsiVector hs(9), hd(9);
      for (int j = 0; j < 9; ++j) {
        hs[j] = gt.h_static.values[static_cast<std::size_t>(j) * 30 + k];
        hd[j] = gt.h_dynamic.values[static_cast<std::size_t>(j) * 30 + k];
      }
      for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) {
          const double dropped = std::abs(hd[r] * std::conj(hd[c]));
          const double kept = std::abs(hs[r] * std::conj(hd[c])) +
                              std::abs(hd[r] * std::conj(hs[c]));
          if (kept > 0.0) max_ratio = std::max(max_ratio, dropped / kept);
        }
    }
  }
  CHECK(max_ratio < 0.01);
}
