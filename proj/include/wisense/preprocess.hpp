#ifndef WISENSE_PREPROCESS_HPP
#define WISENSE_PREPROCESS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wisense/chansim.hpp"
#include "wisense/csi_io.hpp"
#include "wisense/common.hpp"

// Recovery of the dynamic CSI component: flatten each frame to a column
// vector per subcarrier, amplify one reference element with a phase-tracking
// constant, form the conjugate outer product, high-pass over time, and read
// off the reference column, which is approximately linear in h_d.

namespace wisense {
namespace preprocess {

// Complex column of length N_t*N_r for one subcarrier, receive-antenna-major:
// [h(1,1) ... h(1,Nt), h(2,1) ... h(Nr,Nt)].
using CsiVector = std::vector<cplx>;

// Hermitian (N_t*N_r) x (N_t*N_r) matrix, row-major.
struct ConjProduct {
  int dim = 0;
  std::vector<cplx> m;

  ConjProduct() = default;
  explicit ConjProduct(int d) : dim(d), m(static_cast<std::size_t>(d) * d) {}

  cplx& at(int r, int c) { return m[static_cast<std::size_t>(r) * dim + c]; }
  const cplx& at(int r, int c) const {
    return m[static_cast<std::size_t>(r) * dim + c];
  }
};

inline CsiVector vectorize(const CsiFrame& frame, int subcarrier) {
  CsiVector v(static_cast<std::size_t>(frame.n_rx) * frame.n_tx);
  for (int n = 0; n < frame.n_rx; ++n)
    for (int m = 0; m < frame.n_tx; ++m)
      v[static_cast<std::size_t>(n) * frame.n_tx + m] = frame.at(n, m, subcarrier);
  return v;
}

// All subcarriers of one frame.
inline std::vector<CsiVector> vectorize(const CsiFrame& frame) {
  std::vector<CsiVector> out;
  out.reserve(frame.n_sub);
  for (int k = 0; k < frame.n_sub; ++k) out.push_back(vectorize(frame, k));
  return out;
}

inline CsiFrame unvectorize(const std::vector<CsiVector>& vs, int n_rx, int n_tx) {
  CsiFrame frame(n_rx, n_tx, static_cast<int>(vs.size()));
  for (int k = 0; k < frame.n_sub; ++k)
    for (int n = 0; n < n_rx; ++n)
      for (int m = 0; m < n_tx; ++m)
        frame.at(n, m, k) = vs[k][static_cast<std::size_t>(n) * n_tx + m];
  return frame;
}

// Indices of the n_ref elements with the largest time-and-subcarrier
// averaged modulus; ties broken toward the lowest index.
inline std::vector<int> select_reference(const CsiSequence& seq, int n_ref) {
  if (seq.frames.empty())
    throw std::invalid_argument("select_reference: empty sequence");
  const auto& f0 = seq.frames.front();
  const int dim = f0.n_rx * f0.n_tx;
  if (n_ref < 1 || n_ref >= dim)
    throw std::invalid_argument("select_reference: need 1 <= n_ref < Nt*Nr");
  std::vector<double> avg(dim, 0.0);
  for (const auto& frame : seq.frames)
    for (int n = 0; n < frame.n_rx; ++n)
      for (int m = 0; m < frame.n_tx; ++m)
        for (int k = 0; k < frame.n_sub; ++k)
          avg[n * frame.n_tx + m] += std::abs(frame.at(n, m, k));
  std::vector<int> idx(dim);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return avg[a] > avg[b]; });
  idx.resize(n_ref);
  return idx;
}

inline ConjProduct conjugate_product(const CsiVector& vec) {
  ConjProduct p(static_cast<int>(vec.size()));
  for (int r = 0; r < p.dim; ++r)
    for (int c = 0; c < p.dim; ++c)
      p.at(r, c) = vec[r] * std::conj(vec[c]);
  return p;
}

enum class FilterMode { SlidingMean, SinglePole };

struct FilterConfig {
  FilterMode mode = FilterMode::SlidingMean;
  double window_seconds = 1.0;  // SlidingMean
  double cutoff_hz = 2.0;       // SinglePole
};

namespace detail {

// Centered sliding-mean subtraction over a complex time series.
inline void sliding_mean_subtract(std::vector<cplx>& x, int window) {
  const int n = static_cast<int>(x.size());
  const int half = window / 2;
  std::vector<cplx> prefix(n + 1, cplx{0.0, 0.0});
  for (int t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + x[t];
  std::vector<cplx> out(n);
  for (int t = 0; t < n; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(n - 1, t + half);
    const cplx mean = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    out[t] = x[t] - mean;
  }
  x.swap(out);
}

inline void single_pole_highpass(std::vector<cplx>& x, double cutoff_hz,
                                 double sample_rate) {
  const double a = 1.0 / (1.0 + 2.0 * kPi * cutoff_hz / sample_rate);
  cplx prev_x = x.empty() ? cplx{0.0, 0.0} : x[0];
  cplx prev_y{0.0, 0.0};
  for (auto& v : x) {
    const cplx y = a * (prev_y + v - prev_x);
    prev_x = v;
    prev_y = y;
    v = y;
  }
}

}  // namespace detail

// Removes the quasi-static (DC-like) term from a product time series.
inline std::vector<ConjProduct> high_pass(const std::vector<ConjProduct>& series,
                                          const FilterConfig& cfg,
                                          double sample_rate) {
  if (series.empty())
    throw std::invalid_argument("high_pass: empty series");
  const int dim = series.front().dim;
  int window = 1;
  if (cfg.mode == FilterMode::SlidingMean) {
    window = std::max(1, static_cast<int>(cfg.window_seconds * sample_rate + 0.5));
    if (static_cast<int>(series.size()) < window)
      throw std::invalid_argument("high_pass: series shorter than filter window");
  }
  std::vector<ConjProduct> out(series.size(), ConjProduct(dim));
  std::vector<cplx> ts(series.size());
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      for (std::size_t t = 0; t < series.size(); ++t) ts[t] = series[t].at(r, c);
      if (cfg.mode == FilterMode::SlidingMean)
        detail::sliding_mean_subtract(ts, window);
      else
        detail::single_pole_highpass(ts, cfg.cutoff_hz, sample_rate);
      for (std::size_t t = 0; t < series.size(); ++t) out[t].at(r, c) = ts[t];
    }
  }
  return out;
}

struct PreprocessConfig {
  int n_ref = 1;
  double kappa = 100.0;  // |beta| relative to the reference element peak
  FilterConfig filter;
};

// D'(f, t) for one subcarrier: outer product of the beta-augmented vector,
// high-passed over time. |beta| = kappa * max_t |h'_ref|, arg beta tracks
// the measured reference phase instant by instant.
inline std::vector<ConjProduct> beta_augmented_product(
    const CsiSequence& seq, int subcarrier, int ref, double kappa,
    const FilterConfig& filter_cfg) {
  if (seq.frames.empty())
    throw std::invalid_argument("beta_augmented_product: empty sequence");
  if (kappa <= 1.0)
    std::cerr << "warning: kappa <= 1 violates |beta| >> |h_s|\n";
  const int dim = seq.frames.front().n_rx * seq.frames.front().n_tx;
  if (ref < 0 || ref >= dim)
    throw std::invalid_argument("beta_augmented_product: ref out of range");

  double peak = 0.0;
  for (const auto& frame : seq.frames)
    peak = std::max(peak, std::abs(vectorize(frame, subcarrier)[ref]));
  const double beta_mag = kappa * peak;

  std::vector<ConjProduct> prods;
  prods.reserve(seq.frames.size());
  for (const auto& frame : seq.frames) {
    CsiVector v = vectorize(frame, subcarrier);
    const double phase = std::arg(v[ref]);
    v[ref] += std::polar(beta_mag, phase);
    prods.push_back(conjugate_product(v));
  }
  return high_pass(prods, filter_cfg, seq.sample_rate);
}

// Complex reference column of D' over time, all subcarriers: entry
// (t, row, subcarrier) ~ h'_s(ref)^* h_d(row).
struct DynamicColumns {
  int rows = 0;
  int n_sub = 0;
  double sample_rate = 0.0;
  std::vector<cplx> values;  // T * rows * n_sub

  std::size_t n_packets() const {
    const std::size_t stride = static_cast<std::size_t>(rows) * n_sub;
    return stride == 0 ? 0 : values.size() / stride;
  }
  cplx& at(std::size_t t, int r, int k) {
    return values[(t * rows + r) * n_sub + k];
  }
  const cplx& at(std::size_t t, int r, int k) const {
    return values[(t * rows + r) * n_sub + k];
  }
};

inline DynamicColumns extract_dynamic_columns(
    const std::vector<std::vector<ConjProduct>>& dprime_per_subcarrier,
    int ref) {
  if (dprime_per_subcarrier.empty() || dprime_per_subcarrier.front().empty())
    throw std::invalid_argument("extract_dynamic_columns: empty input");
  DynamicColumns out;
  out.n_sub = static_cast<int>(dprime_per_subcarrier.size());
  out.rows = dprime_per_subcarrier.front().front().dim;
  const std::size_t T = dprime_per_subcarrier.front().size();
  out.values.resize(T * out.rows * out.n_sub);
  for (int k = 0; k < out.n_sub; ++k)
    for (std::size_t t = 0; t < T; ++t)
      for (int r = 0; r < out.rows; ++r)
        out.at(t, r, k) = dprime_per_subcarrier[k][t].at(r, ref);
  return out;
}

// Amplitude/phase planes (2 x rows x n_sub per packet). The reference row is
// retained; its entry is the filtered |h'_ref + beta|^2 self term and carries
// no dynamic information.
inline io::DynamicTensorSeries to_dynamic_tensors(const DynamicColumns& cols) {
  io::DynamicTensorSeries s;
  s.channels = 2;
  s.rows = cols.rows;
  s.n_sub = cols.n_sub;
  s.sample_rate = cols.sample_rate;
  const std::size_t T = cols.n_packets();
  s.values.resize(T * s.packet_stride());
  for (std::size_t t = 0; t < T; ++t) {
    for (int r = 0; r < cols.rows; ++r) {
      for (int k = 0; k < cols.n_sub; ++k) {
        const cplx v = cols.at(t, r, k);
        s.at(t, 0, r, k) = static_cast<float>(std::abs(v));
        s.at(t, 1, r, k) = static_cast<float>(std::arg(v));
      }
    }
  }
  return s;
}

// Full pipeline: reference selection, beta augmentation, high-pass, column
// extraction. Subcarriers are processed independently.
inline DynamicColumns run_pipeline(const CsiSequence& seq,
                                   const PreprocessConfig& cfg,
                                   int* ref_out = nullptr) {
  const int ref = select_reference(seq, cfg.n_ref).front();
  if (ref_out) *ref_out = ref;
  const int n_sub = seq.frames.front().n_sub;
  std::vector<std::vector<ConjProduct>> dprime(n_sub);
  for (int k = 0; k < n_sub; ++k)
    dprime[k] = beta_augmented_product(seq, k, ref, cfg.kappa, cfg.filter);
  DynamicColumns cols = extract_dynamic_columns(dprime, ref);
  cols.sample_rate = seq.sample_rate;
  return cols;
}

inline io::DynamicTensorSeries run_pipeline_tensors(const CsiSequence& seq,
                                                    const PreprocessConfig& cfg,
                                                    int* ref_out = nullptr) {
  return to_dynamic_tensors(run_pipeline(seq, cfg, ref_out));
}

}  // namespace preprocess
}  // namespace wisense

#endif  // WISENSE_PREPROCESS_HPP
