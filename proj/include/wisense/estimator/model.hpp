#ifndef WISENSE_ESTIMATOR_MODEL_HPP
#define WISENSE_ESTIMATOR_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wisense/csi_io.hpp"
#include "wisense/estimator/dataset.hpp"
#include "wisense/estimator/heatmap.hpp"
#include "wisense/rng.hpp"

// Minimal heatmap estimator: dense trunk -> single gated recurrent cell ->
// three linear heatmap heads (location, per-keypoint pose offsets, depth).
// Heads read the concatenated [trunk; state] vector, so memoryless configs
// keep full access to the instantaneous features and the recurrent state adds
// temporal context on top. Gradients are computed by hand so training stays
// dependency-free and bit-deterministic.

namespace wisense {
namespace estimator {

class sequence_integrity_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ModelConfig {
  int rows = 9;
  int n_sub = 30;
  int trunk_dim = 24;
  int hidden_dim = 16;
  int n_keypoints = kDefaultKeypoints;
  GridSpec loc_grid{2.0, 0.7, 0.25, 12, 12};
  GridSpec pose_grid{-0.5, -0.5, 0.125, 8, 8};
  GridSpec depth_grid{2.0, 0.0, 0.5, 2, 8};  // x axis encodes depth
  bool temporal = false;
  int max_seq_len = kDefaultBlockLen;

  int feature_dim() const { return rows * n_sub * 5 + 1; }
  double depth_axis_y() const {
    return depth_grid.origin_y + depth_grid.height * depth_grid.cell_size / 2.0;
  }

  void validate() const {
    if (rows < 1 || n_sub < 1 || trunk_dim < 1 || hidden_dim < 1 ||
        n_keypoints < 1)
      throw std::invalid_argument("ModelConfig: bad dimensions");
    if (max_seq_len < 1)
      throw std::invalid_argument("ModelConfig: max_seq_len must be >= 1");
    loc_grid.validate();
    pose_grid.validate();
    depth_grid.validate();
  }
};

// Window features per (row, subcarrier): the window mean of the amplitude
// plane (RMS-normalized per sample), and window means of cos/sin of two
// relative phases — across subcarriers (phase slope, a delay observable) and
// across rows (an angle observable). The relative phases cancel the common
// per-packet rotation, so they stay stable inside a window and vary smoothly
// with target position. The log amplitude RMS is appended so the absolute
// scale (range attenuation) survives the normalization.
inline std::vector<double> sample_features(const ToySample& s) {
  const int rows = s.rows, n_sub = s.n_sub;
  const std::size_t plane = static_cast<std::size_t>(rows) * n_sub;
  std::vector<double> f(plane * 5 + 1, 0.0);
  const double inv_w = 1.0 / static_cast<double>(kWindowLen);
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < n_sub; ++k) {
      double amp = 0.0, cs_sub = 0.0, sn_sub = 0.0, cs_row = 0.0, sn_row = 0.0;
      for (int w = 0; w < kWindowLen; ++w) {
        amp += s.window_at(w, 0, r, k);
        const double ph = s.window_at(w, 1, r, k);
        const double d_sub = ph - s.window_at(w, 1, r, 0);
        const double d_row = ph - s.window_at(w, 1, 0, k);
        cs_sub += std::cos(d_sub);
        sn_sub += std::sin(d_sub);
        cs_row += std::cos(d_row);
        sn_row += std::sin(d_row);
      }
      const std::size_t i = static_cast<std::size_t>(r) * n_sub + k;
      f[i] = amp * inv_w;
      f[plane + i] = cs_sub * inv_w;
      f[2 * plane + i] = sn_sub * inv_w;
      f[3 * plane + i] = cs_row * inv_w;
      f[4 * plane + i] = sn_row * inv_w;
    }
  double rms = 0.0;
  for (std::size_t i = 0; i < plane; ++i) rms += f[i] * f[i];
  rms = std::sqrt(rms / static_cast<double>(plane)) + 1e-12;
  for (std::size_t i = 0; i < plane; ++i) f[i] /= rms;
  f.back() = std::log(rms);
  return f;
}

struct Model {
  ModelConfig cfg;
  std::vector<double> params;

  // flat parameter layout offsets
  std::size_t w1 = 0, b1 = 0;
  std::size_t wz = 0, bz = 0, wr = 0, br = 0, wh = 0, bh = 0;
  std::size_t wloc = 0, bloc = 0, wpose = 0, bpose = 0, wdep = 0, bdep = 0;
  std::size_t total = 0;

  explicit Model(const ModelConfig& c = ModelConfig{}) : cfg(c) {
    cfg.validate();
    const std::size_t F = cfg.feature_dim(), T = cfg.trunk_dim,
                      H = cfg.hidden_dim, U = T + H;
    const std::size_t L = cfg.loc_grid.cells(),
                      P = static_cast<std::size_t>(cfg.n_keypoints) *
                          cfg.pose_grid.cells(),
                      D = cfg.depth_grid.cells();
    std::size_t off = 0;
    auto take = [&off](std::size_t n) {
      const std::size_t o = off;
      off += n;
      return o;
    };
    w1 = take(T * F);
    b1 = take(T);
    wz = take(H * U);
    bz = take(H);
    wr = take(H * U);
    br = take(H);
    wh = take(H * U);
    bh = take(H);
    wloc = take(L * U);
    bloc = take(L);
    wpose = take(P * U);
    bpose = take(P);
    wdep = take(D * U);
    bdep = take(D);
    total = off;
    params.assign(total, 0.0);
  }

  void init_weights(std::uint64_t seed) {
    Rng rng(substream_seed(seed, 0x77656967687473ULL));
    const double F = cfg.feature_dim(), T = cfg.trunk_dim, H = cfg.hidden_dim;
    auto fill = [&rng](double* p, std::size_t n, double scale) {
      for (std::size_t i = 0; i < n; ++i) p[i] = scale * rng.gaussian();
    };
    fill(&params[w1], b1 - w1, 1.0 / std::sqrt(F));
    fill(&params[wz], bz - wz, 1.0 / std::sqrt(T + H));
    fill(&params[wr], br - wr, 1.0 / std::sqrt(T + H));
    fill(&params[wh], bh - wh, 1.0 / std::sqrt(T + H));
    fill(&params[wloc], bloc - wloc, 1.0 / std::sqrt(T + H));
    fill(&params[wpose], bpose - wpose, 1.0 / std::sqrt(T + H));
    fill(&params[wdep], bdep - wdep, 1.0 / std::sqrt(T + H));
  }
};

struct RecurrentState {
  std::vector<double> h;
  int block_tag = -1;
  int steps = 0;  // steps since last truncation reset
};

struct HeadOutputs {
  Heatmap location;
  std::vector<Heatmap> pose;
  Heatmap depth;
  HeadOutputs() = default;
};

namespace detail {

inline void matvec(const double* w, const double* x, const double* b, int out,
                   int in, double* y) {
  for (int i = 0; i < out; ++i) {
    double acc = b ? b[i] : 0.0;
    const double* row = w + static_cast<std::size_t>(i) * in;
    for (int j = 0; j < in; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Per-step activations kept for backpropagation.
struct StepCache {
  std::vector<double> x;       // features
  std::vector<double> t1;      // trunk tanh output
  std::vector<double> h_prev;  // state entering the cell (after any reset)
  bool fresh_state = false;    // h_prev was a truncation/block reset
  std::vector<double> z, r, g, h_new;
  std::vector<double> ctx;  // [t1; h_new], the head input
  HeadOutputs heads;
};

inline StepCache forward_step(const Model& m, const ToySample& sample,
                              const std::vector<double>& h_prev,
                              bool fresh_state) {
  const ModelConfig& c = m.cfg;
  const int F = c.feature_dim(), T = c.trunk_dim, H = c.hidden_dim, U = T + H;
  StepCache sc;
  sc.x = sample_features(sample);
  sc.fresh_state = fresh_state;
  sc.h_prev = h_prev;

  sc.t1.resize(T);
  matvec(&m.params[m.w1], sc.x.data(), &m.params[m.b1], T, F, sc.t1.data());
  for (double& v : sc.t1) v = std::tanh(v);

  std::vector<double> u(U);
  std::copy(sc.t1.begin(), sc.t1.end(), u.begin());
  std::copy(sc.h_prev.begin(), sc.h_prev.end(), u.begin() + T);

  sc.z.resize(H);
  sc.r.resize(H);
  matvec(&m.params[m.wz], u.data(), &m.params[m.bz], H, U, sc.z.data());
  matvec(&m.params[m.wr], u.data(), &m.params[m.br], H, U, sc.r.data());
  for (double& v : sc.z) v = sigmoid(v);
  for (double& v : sc.r) v = sigmoid(v);

  std::vector<double> u2(U);
  std::copy(sc.t1.begin(), sc.t1.end(), u2.begin());
  for (int i = 0; i < H; ++i) u2[T + i] = sc.r[i] * sc.h_prev[i];
  sc.g.resize(H);
  matvec(&m.params[m.wh], u2.data(), &m.params[m.bh], H, U, sc.g.data());
  for (double& v : sc.g) v = std::tanh(v);

  sc.h_new.resize(H);
  for (int i = 0; i < H; ++i)
    sc.h_new[i] = (1.0 - sc.z[i]) * sc.h_prev[i] + sc.z[i] * sc.g[i];

  // heads read [t1; h_new]
  sc.ctx.resize(U);
  std::copy(sc.t1.begin(), sc.t1.end(), sc.ctx.begin());
  std::copy(sc.h_new.begin(), sc.h_new.end(), sc.ctx.begin() + T);
  sc.heads.location = Heatmap(c.loc_grid);
  matvec(&m.params[m.wloc], sc.ctx.data(), &m.params[m.bloc],
         c.loc_grid.cells(), U, sc.heads.location.values.data());
  sc.heads.pose.assign(c.n_keypoints, Heatmap(c.pose_grid));
  const int P = c.pose_grid.cells();
  for (int k = 0; k < c.n_keypoints; ++k)
    matvec(&m.params[m.wpose] + static_cast<std::size_t>(k) * P * U,
           sc.ctx.data(),
           &m.params[m.bpose] + static_cast<std::size_t>(k) * P, P, U,
           sc.heads.pose[k].values.data());
  sc.heads.depth = Heatmap(c.depth_grid);
  matvec(&m.params[m.wdep], sc.ctx.data(), &m.params[m.bdep],
         c.depth_grid.cells(), U, sc.heads.depth.values.data());
  return sc;
}

}  // namespace detail

// Single inference step. Memoryless configs ignore and do not advance the
// state; temporal configs thread it, resetting every max_seq_len steps.
// A state tagged for a different block is rejected.
inline HeadOutputs forward(const Model& m, const ToySample& sample,
                           RecurrentState& state, int block_tag) {
  const int H = m.cfg.hidden_dim;
  if (state.block_tag != -1 && state.block_tag != block_tag)
    throw sequence_integrity_error("forward: state belongs to another block");
  state.block_tag = block_tag;
  if (static_cast<int>(state.h.size()) != H) state.h.assign(H, 0.0);

  bool fresh = false;
  if (!m.cfg.temporal || state.steps >= m.cfg.max_seq_len) {
    std::fill(state.h.begin(), state.h.end(), 0.0);
    state.steps = 0;
    fresh = true;
  }
  const detail::StepCache sc = detail::forward_step(m, sample, state.h, fresh);
  if (m.cfg.temporal) {
    state.h = sc.h_new;
    ++state.steps;
  }
  return sc.heads;
}

// ---- weights file ("TOYW") ----

inline void save_weights(const std::string& path, const Model& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_weights: cannot open " + path);
  os.write("TOYW", 4);
  io::detail::write_u32(os, io::kFormatVersion);
  io::detail::write_u32(os, m.cfg.temporal ? 1 : 0);
  io::detail::write_u32(os, static_cast<std::uint32_t>(m.cfg.max_seq_len));
  io::detail::write_u32(os, static_cast<std::uint32_t>(m.cfg.rows));
  io::detail::write_u32(os, static_cast<std::uint32_t>(m.cfg.n_sub));
  io::detail::write_u32(os, static_cast<std::uint32_t>(m.cfg.trunk_dim));
  io::detail::write_u32(os, static_cast<std::uint32_t>(m.cfg.hidden_dim));
  io::detail::write_u32(os, static_cast<std::uint32_t>(m.cfg.n_keypoints));
  io::detail::write_u32(os, static_cast<std::uint32_t>(m.params.size()));
  for (const double v : m.params) io::detail::write_f64(os, v);
  if (!os) throw std::runtime_error("save_weights: write failed " + path);
}

inline Model load_weights(const std::string& path,
                          const ModelConfig& base = ModelConfig{}) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_weights: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "TOYW")
    throw std::runtime_error("load_weights: bad magic in " + path);
  if (io::detail::read_u32(is) != io::kFormatVersion)
    throw std::runtime_error("load_weights: unsupported version in " + path);
  ModelConfig cfg = base;
  cfg.temporal = io::detail::read_u32(is) != 0;
  cfg.max_seq_len = static_cast<int>(io::detail::read_u32(is));
  cfg.rows = static_cast<int>(io::detail::read_u32(is));
  cfg.n_sub = static_cast<int>(io::detail::read_u32(is));
  cfg.trunk_dim = static_cast<int>(io::detail::read_u32(is));
  cfg.hidden_dim = static_cast<int>(io::detail::read_u32(is));
  cfg.n_keypoints = static_cast<int>(io::detail::read_u32(is));
  Model m(cfg);
  const std::uint32_t n = io::detail::read_u32(is);
  if (n != m.params.size())
    throw std::runtime_error("load_weights: parameter count mismatch " + path);
  for (auto& v : m.params) v = io::detail::read_f64(is);
  if (!is) throw std::runtime_error("load_weights: truncated file " + path);
  return m;
}

}  // namespace estimator
}  // namespace wisense

#endif  // WISENSE_ESTIMATOR_MODEL_HPP
