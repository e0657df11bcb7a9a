#ifndef WISENSE_ESTIMATOR_TRAIN_HPP
#define WISENSE_ESTIMATOR_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "wisense/estimator/losses.hpp"
#include "wisense/estimator/model.hpp"
#include "wisense/rng.hpp"

namespace wisense {
namespace estimator {

// Truth heatmaps use a bump of one and a half cells standard deviation.
inline constexpr double kTruthSigmaCells = 1.5;

struct TrainConfig {
  double a = 0.5;  // Eq-40-style weights
  double b = 0.5;
  double c_start = 0.1;  // peak-vs-pixel schedule, low -> high
  double c_end = 0.9;
  double learning_rate = 0.005;
  int epochs = 30;
  int batch_blocks = 16;
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch = 0;
  double c = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

namespace detail {

inline Heatmap truth_loc_heatmap(const ModelConfig& cfg, const ToySample& s) {
  return heatmap_from_point(s.truth_location, cfg.loc_grid,
                            kTruthSigmaCells * cfg.loc_grid.cell_size);
}

inline Heatmap truth_pose_heatmap(const ModelConfig& cfg, const ToySample& s,
                                  int k) {
  return heatmap_from_point(s.truth_pose[k], cfg.pose_grid,
                            kTruthSigmaCells * cfg.pose_grid.cell_size);
}

inline Heatmap truth_depth_heatmap(const ModelConfig& cfg, const ToySample& s) {
  return heatmap_from_point({s.truth_depth, cfg.depth_axis_y()},
                            cfg.depth_grid,
                            kTruthSigmaCells * cfg.depth_grid.cell_size);
}

// Forward a whole block, reproducing the truncation schedule of forward().
inline std::vector<StepCache> forward_block(const Model& m, const Block& blk) {
  const int H = m.cfg.hidden_dim;
  std::vector<StepCache> caches;
  caches.reserve(blk.samples.size());
  std::vector<double> h(H, 0.0);
  int steps = 0;
  for (const ToySample& s : blk.samples) {
    bool fresh = caches.empty();
    if (!m.cfg.temporal || steps >= m.cfg.max_seq_len) {
      std::fill(h.begin(), h.end(), 0.0);
      steps = 0;
      fresh = true;
    }
    caches.push_back(forward_step(m, s, h, fresh));
    if (m.cfg.temporal) {
      h = caches.back().h_new;
      ++steps;
    }
  }
  return caches;
}

inline void outer_acc(double* w, const double* dy, const double* x, int out,
                      int in) {
  for (int i = 0; i < out; ++i) {
    double* row = w + static_cast<std::size_t>(i) * in;
    for (int j = 0; j < in; ++j) row[j] += dy[i] * x[j];
  }
}

}  // namespace detail

// Total loss (soft peak mode) over a set of blocks, with the gradient w.r.t.
// every model parameter accumulated into `grad` when non-null.
inline double batch_loss(const Model& m, const std::vector<Block>& blocks,
                         double c, double a, double b,
                         std::vector<double>* grad) {
  if (blocks.empty()) throw std::invalid_argument("batch_loss: empty batch");
  const ModelConfig& cfg = m.cfg;
  const int T = cfg.trunk_dim, H = cfg.hidden_dim, U = T + H;
  const int F = cfg.feature_dim();
  const int L = cfg.loc_grid.cells(), P = cfg.pose_grid.cells(),
            D = cfg.depth_grid.cells();
  const int K = cfg.n_keypoints;

  std::vector<std::vector<detail::StepCache>> caches;
  caches.reserve(blocks.size());
  std::vector<Heatmap> loc_p, loc_t, pose_p, pose_t, dep_p, dep_t;
  for (const Block& blk : blocks) {
    caches.push_back(detail::forward_block(m, blk));
    for (std::size_t si = 0; si < blk.samples.size(); ++si) {
      const ToySample& s = blk.samples[si];
      loc_p.push_back(caches.back()[si].heads.location);
      loc_t.push_back(detail::truth_loc_heatmap(cfg, s));
      for (int k = 0; k < K; ++k) {
        pose_p.push_back(caches.back()[si].heads.pose[k]);
        pose_t.push_back(detail::truth_pose_heatmap(cfg, s, k));
      }
      dep_p.push_back(caches.back()[si].heads.depth);
      dep_t.push_back(detail::truth_depth_heatmap(cfg, s));
    }
  }

  std::vector<std::vector<double>> gl, gp, gd;
  double l_loc, l_hpe, l_dep;
  if (grad) {
    l_loc = head_loss_grad(loc_p, loc_t, c, gl);
    l_hpe = head_loss_grad(pose_p, pose_t, c, gp);
    l_dep = head_loss_grad(dep_p, dep_t, c, gd);
  } else {
    l_loc = head_loss(loc_p, loc_t, c, PeakMode::Soft);
    l_hpe = head_loss(pose_p, pose_t, c, PeakMode::Soft);
    l_dep = head_loss(dep_p, dep_t, c, PeakMode::Soft);
  }
  const double loss = total_loss(l_dep, l_hpe, l_loc, a, b);
  if (!grad) return loss;

  grad->assign(m.params.size(), 0.0);
  const double s_loc = 1.0 - a, s_hpe = a * (1.0 - b), s_dep = a * b;

  std::size_t flat = 0;  // running (block, step) index into gl / gd
  std::size_t flat_pose = 0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& bc = caches[bi];
    std::vector<double> dh_carry(H, 0.0);
    std::vector<std::vector<double>> dh_store(bc.size(),
                                              std::vector<double>(H, 0.0));
    std::vector<std::vector<double>> dt1_store(bc.size(),
                                               std::vector<double>(T, 0.0));
    // head backprop first: every step's dctx is independent of time order;
    // the first T entries go straight to the trunk, the rest to the state
    for (std::size_t si = 0; si < bc.size(); ++si) {
      const detail::StepCache& sc = bc[si];
      std::vector<double>& dh = dh_store[si];
      std::vector<double>& dt1 = dt1_store[si];
      const std::size_t fi = flat + si;
      const std::size_t pi = flat_pose + si * K;
      auto head_row = [&](std::size_t woff, std::size_t boff, std::size_t row,
                          double dv) {
        (*grad)[boff + row] += dv;
        double* wrow = &(*grad)[woff + row * U];
        const double* wsrc = &m.params[woff + row * U];
        for (int j = 0; j < T; ++j) {
          wrow[j] += dv * sc.ctx[j];
          dt1[j] += dv * wsrc[j];
        }
        for (int j = 0; j < H; ++j) {
          wrow[T + j] += dv * sc.ctx[T + j];
          dh[j] += dv * wsrc[T + j];
        }
      };
      for (int i = 0; i < L; ++i) head_row(m.wloc, m.bloc, i, s_loc * gl[fi][i]);
      for (int k = 0; k < K; ++k)
        for (int i = 0; i < P; ++i)
          head_row(m.wpose, m.bpose, static_cast<std::size_t>(k) * P + i,
                   s_hpe * gp[pi + k][i]);
      for (int i = 0; i < D; ++i) head_row(m.wdep, m.bdep, i, s_dep * gd[fi][i]);
    }

    // backwards through time
    for (std::size_t si = bc.size(); si-- > 0;) {
      const detail::StepCache& sc = bc[si];
      std::vector<double> dh(H);
      for (int i = 0; i < H; ++i) dh[i] = dh_store[si][i] + dh_carry[i];

      std::vector<double> dz(H), dg(H), dhp(H);
      for (int i = 0; i < H; ++i) {
        dz[i] = dh[i] * (sc.g[i] - sc.h_prev[i]);
        dg[i] = dh[i] * sc.z[i];
        dhp[i] = dh[i] * (1.0 - sc.z[i]);
      }

      std::vector<double> u(U), u2(U);
      std::copy(sc.t1.begin(), sc.t1.end(), u.begin());
      std::copy(sc.h_prev.begin(), sc.h_prev.end(), u.begin() + T);
      std::copy(sc.t1.begin(), sc.t1.end(), u2.begin());
      for (int i = 0; i < H; ++i) u2[T + i] = sc.r[i] * sc.h_prev[i];

      std::vector<double> dx1 = dt1_store[si];  // direct head-to-trunk path
      // candidate gate
      std::vector<double> dah(H);
      for (int i = 0; i < H; ++i) dah[i] = dg[i] * (1.0 - sc.g[i] * sc.g[i]);
      detail::outer_acc(&(*grad)[m.wh], dah.data(), u2.data(), H, U);
      for (int i = 0; i < H; ++i) (*grad)[m.bh + i] += dah[i];
      std::vector<double> dr(H, 0.0);
      for (int i = 0; i < H; ++i) {
        const double* row = &m.params[m.wh + static_cast<std::size_t>(i) * U];
        for (int j = 0; j < T; ++j) dx1[j] += row[j] * dah[i];
        for (int j = 0; j < H; ++j) {
          const double du2 = row[T + j] * dah[i];
          dr[j] += du2 * sc.h_prev[j];
          dhp[j] += du2 * sc.r[j];
        }
      }
      // reset gate
      std::vector<double> dar(H);
      for (int i = 0; i < H; ++i) dar[i] = dr[i] * sc.r[i] * (1.0 - sc.r[i]);
      detail::outer_acc(&(*grad)[m.wr], dar.data(), u.data(), H, U);
      for (int i = 0; i < H; ++i) (*grad)[m.br + i] += dar[i];
      for (int i = 0; i < H; ++i) {
        const double* row = &m.params[m.wr + static_cast<std::size_t>(i) * U];
        for (int j = 0; j < T; ++j) dx1[j] += row[j] * dar[i];
        for (int j = 0; j < H; ++j) dhp[j] += row[T + j] * dar[i];
      }
      // update gate
      std::vector<double> daz(H);
      for (int i = 0; i < H; ++i) daz[i] = dz[i] * sc.z[i] * (1.0 - sc.z[i]);
      detail::outer_acc(&(*grad)[m.wz], daz.data(), u.data(), H, U);
      for (int i = 0; i < H; ++i) (*grad)[m.bz + i] += daz[i];
      for (int i = 0; i < H; ++i) {
        const double* row = &m.params[m.wz + static_cast<std::size_t>(i) * U];
        for (int j = 0; j < T; ++j) dx1[j] += row[j] * daz[i];
        for (int j = 0; j < H; ++j) dhp[j] += row[T + j] * daz[i];
      }
      // trunk
      std::vector<double> da1(T);
      for (int j = 0; j < T; ++j) da1[j] = dx1[j] * (1.0 - sc.t1[j] * sc.t1[j]);
      detail::outer_acc(&(*grad)[m.w1], da1.data(), sc.x.data(), T, F);
      for (int j = 0; j < T; ++j) (*grad)[m.b1 + j] += da1[j];

      // propagate into the previous step unless the state was reset here
      if (sc.fresh_state)
        std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
      else
        dh_carry = dhp;
    }

    flat += bc.size();
    flat_pose += bc.size() * K;
  }
  return loss;
}

// Gradient descent with classical momentum. Per-parameter adaptive scalings
// misbehave here: the soft-peak term produces small, structured gradients
// whose rescaled steps overwhelm the pixel anchor and let the heatmap drift
// into shapes whose expectation is right but whose argmax is not.
struct Momentum {
  double lr = 0.005, beta = 0.9;
  std::vector<double> vel;

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    if (vel.size() != params.size()) vel.assign(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
      vel[i] = beta * vel[i] + grad[i];
      params[i] -= lr * vel[i];
    }
  }
};

// Gradient-descent training of the composite loss, soft peak mode, with the
// linear low -> high c schedule. Deterministic per seed.
inline std::vector<EpochStats> train(Model& m,
                                     const std::vector<Block>& train_blocks,
                                     const std::vector<Block>& val_blocks,
                                     const TrainConfig& cfg) {
  if (train_blocks.empty())
    throw std::invalid_argument("train: empty training set");
  Momentum opt;
  opt.lr = cfg.learning_rate;
  std::vector<EpochStats> history;
  std::vector<std::size_t> order(train_blocks.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double frac =
        cfg.epochs > 1 ? static_cast<double>(epoch) / (cfg.epochs - 1) : 1.0;
    const double c = cfg.c_start + (cfg.c_end - cfg.c_start) * frac;

    Rng rng(substream_seed(cfg.seed, 0x65706f6368ULL + epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_index(i)]);

    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    std::vector<double> grad;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_blocks) {
      std::vector<Block> batch;
      for (std::size_t i = start;
           i < std::min(order.size(), start + cfg.batch_blocks); ++i)
        batch.push_back(train_blocks[order[i]]);
      double loss;
      try {
        loss = batch_loss(m, batch, c, cfg.a, cfg.b, &grad);
      } catch (const degenerate_batch_error&) {
        continue;  // every truth peak in one cell: no usable NMSE, skip
      }
      if (!std::isfinite(loss))
        throw std::runtime_error("train: loss diverged at epoch " +
                                 std::to_string(epoch));
      opt.step(m.params, grad);
      epoch_loss += loss;
      ++n_batches;
    }

    if (n_batches == 0)
      throw std::runtime_error("train: every batch degenerate at epoch " +
                               std::to_string(epoch));
    EpochStats st;
    st.epoch = epoch;
    st.c = c;
    st.train_loss = epoch_loss / static_cast<double>(n_batches);
    st.val_loss = st.train_loss;
    if (!val_blocks.empty()) {
      try {
        st.val_loss = batch_loss(m, val_blocks, c, cfg.a, cfg.b, nullptr);
      } catch (const degenerate_batch_error&) {
        // validation truth collapsed to one cell; keep the train-loss proxy
      }
    }
    history.push_back(st);
  }
  return history;
}

// Stage 1 trains a memoryless model; stage 2 reloads its weights with
// temporal=true and finetunes.
inline std::vector<EpochStats> two_stage_train(
    Model& m, const std::vector<Block>& train_blocks,
    const std::vector<Block>& val_blocks, TrainConfig stage1,
    TrainConfig stage2) {
  m.cfg.temporal = false;
  std::vector<EpochStats> hist = train(m, train_blocks, val_blocks, stage1);
  m.cfg.temporal = true;
  // The state is zero throughout stage 1, so the state columns of the head
  // matrices never receive gradient and are still at random init. Zero them
  // so the finetune starts functionally identical to the pretrained
  // memoryless model; the recurrent pathway then grows only as the gradient
  // asks for context.
  {
    const int T = m.cfg.trunk_dim, H = m.cfg.hidden_dim, U = T + H;
    for (const std::size_t base : {m.wloc, m.wpose, m.wdep}) {
      std::size_t rows = (base == m.wloc   ? m.bloc - m.wloc
                          : base == m.wpose ? m.bpose - m.wpose
                                            : m.bdep - m.wdep) /
                         static_cast<std::size_t>(U);
      for (std::size_t r = 0; r < rows; ++r)
        for (int j = T; j < U; ++j)
          m.params[base + r * static_cast<std::size_t>(U) +
                   static_cast<std::size_t>(j)] = 0.0;
    }
  }
  const std::vector<EpochStats> h2 =
      train(m, train_blocks, val_blocks, stage2);
  hist.insert(hist.end(), h2.begin(), h2.end());
  return hist;
}

struct EvalRow {
  int timestamp_index = 0;
  double mean_loc_err = 0.0;
  double mean_pose_err = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // indexed by step position within a block
  double overall_loc_err = 0.0;
  double overall_pose_err = 0.0;
};

// Hard-peak evaluation; errors in meters per timestamp index within a block.
inline EvalReport evaluate(const Model& m, const std::vector<Block>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("evaluate: empty test set");
  EvalReport rep;
  double loc_sum = 0.0, pose_sum = 0.0;
  std::size_t total = 0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    RecurrentState state;
    for (std::size_t si = 0; si < blocks[bi].samples.size(); ++si) {
      const ToySample& s = blocks[bi].samples[si];
      const HeadOutputs out = forward(m, s, state, static_cast<int>(bi));
      const Point2 p = peak_coords(out.location, PeakMode::Hard);
      const double loc_err = std::hypot(p.x - s.truth_location.x,
                                        p.y - s.truth_location.y);
      double pose_err = 0.0;
      for (int k = 0; k < m.cfg.n_keypoints; ++k) {
        const Point2 q = peak_coords(out.pose[k], PeakMode::Hard);
        pose_err += std::hypot(q.x - s.truth_pose[k].x,
                               q.y - s.truth_pose[k].y);
      }
      pose_err /= static_cast<double>(m.cfg.n_keypoints);

      if (rep.rows.size() <= si) rep.rows.resize(si + 1);
      EvalRow& row = rep.rows[si];
      row.timestamp_index = static_cast<int>(si);
      row.mean_loc_err += loc_err;
      row.mean_pose_err += pose_err;
      ++row.count;
      loc_sum += loc_err;
      pose_sum += pose_err;
      ++total;
    }
  }
  for (EvalRow& row : rep.rows) {
    row.mean_loc_err /= static_cast<double>(row.count);
    row.mean_pose_err /= static_cast<double>(row.count);
  }
  rep.overall_loc_err = loc_sum / static_cast<double>(total);
  rep.overall_pose_err = pose_sum / static_cast<double>(total);
  return rep;
}

}  // namespace estimator
}  // namespace wisense

#endif  // WISENSE_ESTIMATOR_TRAIN_HPP
