#ifndef WISENSE_ESTIMATOR_LOSSES_HPP
#define WISENSE_ESTIMATOR_LOSSES_HPP

#include <stdexcept>
#include <vector>

#include "wisense/estimator/heatmap.hpp"

namespace wisense {
namespace estimator {

class degenerate_batch_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct HeadLossTerms {
  double peak_mse = 0.0;
  double peak_var = 0.0;
  double pixel_mse = 0.0;
  double pixel_var = 0.0;
};

inline HeadLossTerms head_loss_terms(const std::vector<Heatmap>& preds,
                                     const std::vector<Heatmap>& truths,
                                     PeakMode mode) {
  if (preds.empty() || preds.size() != truths.size())
    throw std::invalid_argument("head_loss: batch size mismatch");
  const std::size_t n = preds.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!(preds[i].grid == truths[i].grid))
      throw std::invalid_argument("head_loss: grid mismatch");

  HeadLossTerms t;
  // peak coordinates, MSE pooled over batch and both coordinates; the
  // normalizing variance centers each axis separately so that predicting the
  // batch-mean peak scores exactly 1
  double sum_x = 0.0, sum_y = 0.0, sq_x = 0.0, sq_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = peak_coords(preds[i], mode);
    const Point2 q = peak_coords(truths[i], PeakMode::Hard);
    const double dx = p.x - q.x, dy = p.y - q.y;
    t.peak_mse += dx * dx + dy * dy;
    sum_x += q.x;
    sum_y += q.y;
    sq_x += q.x * q.x;
    sq_y += q.y * q.y;
  }
  const double nd = static_cast<double>(n);
  t.peak_mse /= 2.0 * nd;
  const double mx = sum_x / nd, my = sum_y / nd;
  t.peak_var = (sq_x / nd - mx * mx + sq_y / nd - my * my) / 2.0;

  // pixel MSE pooled over batch and grid
  double px_sum = 0.0, px_sq = 0.0;
  std::size_t px_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < preds[i].values.size(); ++j) {
      const double d = preds[i].values[j] - truths[i].values[j];
      t.pixel_mse += d * d;
      const double tv = truths[i].values[j];
      px_sum += tv;
      px_sq += tv * tv;
      ++px_count;
    }
  }
  t.pixel_mse /= static_cast<double>(px_count);
  const double px_mean = px_sum / static_cast<double>(px_count);
  t.pixel_var = px_sq / static_cast<double>(px_count) - px_mean * px_mean;

  if (t.peak_var <= 0.0 || t.pixel_var <= 0.0)
    throw degenerate_batch_error("head_loss: zero truth variance in batch");
  return t;
}

}  // namespace detail

// NMSE head loss pooled over a batch of heatmaps:
//   c * MSE(peaks) / var(truth peaks) + (1 - c) * MSE(pixels) / var(pixels)
inline double head_loss(const std::vector<Heatmap>& preds,
                        const std::vector<Heatmap>& truths, double c,
                        PeakMode mode = PeakMode::Soft) {
  if (c < 0.0 || c > 1.0)
    throw std::invalid_argument("head_loss: c must lie in [0, 1]");
  const auto t = detail::head_loss_terms(preds, truths, mode);
  return c * t.peak_mse / t.peak_var + (1.0 - c) * t.pixel_mse / t.pixel_var;
}

// head_loss with its gradient w.r.t. every predicted pixel (soft peak mode).
// grads is resized to match preds.
inline double head_loss_grad(const std::vector<Heatmap>& preds,
                             const std::vector<Heatmap>& truths, double c,
                             std::vector<std::vector<double>>& grads) {
  if (c < 0.0 || c > 1.0)
    throw std::invalid_argument("head_loss: c must lie in [0, 1]");
  const auto t = detail::head_loss_terms(preds, truths, PeakMode::Soft);
  const std::size_t n = preds.size();
  const double nd = static_cast<double>(n);
  const double px_count =
      static_cast<double>(n) * static_cast<double>(preds[0].values.size());

  grads.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const Heatmap& hm = preds[i];
    const GridSpec& g = hm.grid;
    const std::size_t cells = hm.values.size();
    grads[i].assign(cells, 0.0);

    // soft-peak jacobian through the standardized softmax:
    //   dp/dv_k = (gain/sd) w_k (cell_k - p) - (gain/sd^2) S dsd/dv_k
    // with S = sum_j w_j (cell_j - p)(v_j - mean)
    const detail::SoftPeakStats st = detail::soft_peak_stats(hm);
    const Point2 q = peak_coords(truths[i], PeakMode::Hard);
    const double ex = st.p.x - q.x, ey = st.p.y - q.y;

    double sx = 0.0, sy = 0.0;
    for (int r = 0; r < g.height; ++r)
      for (int c2 = 0; c2 < g.width; ++c2) {
        const std::size_t j = static_cast<std::size_t>(r) * g.width + c2;
        const double dv = st.w[j] * (hm.values[j] - st.mean);
        sx += dv * (g.cell_x(c2) - st.p.x);
        sy += dv * (g.cell_y(r) - st.p.y);
      }

    const double gain_sd = kSoftPeakGain / st.sd;
    // dsd/dv_k = (v_k - mean) / (cells * sd_raw); a flat map has S = 0, so
    // the sd term drops out and the divisor never matters
    const double sd_term =
        st.sd_raw > 0.0
            ? kSoftPeakGain / (st.sd * st.sd * static_cast<double>(cells) *
                               st.sd_raw)
            : 0.0;
    for (int r = 0; r < g.height; ++r)
      for (int c2 = 0; c2 < g.width; ++c2) {
        const std::size_t j = static_cast<std::size_t>(r) * g.width + c2;
        const double vm = hm.values[j] - st.mean;
        const double dpx =
            gain_sd * st.w[j] * (g.cell_x(c2) - st.p.x) - sd_term * vm * sx;
        const double dpy =
            gain_sd * st.w[j] * (g.cell_y(r) - st.p.y) - sd_term * vm * sy;
        grads[i][j] += c / t.peak_var * (ex * dpx + ey * dpy) / nd;
        grads[i][j] += (1.0 - c) / t.pixel_var * 2.0 *
                       (hm.values[j] - truths[i].values[j]) / px_count;
      }
  }
  return c * t.peak_mse / t.peak_var + (1.0 - c) * t.pixel_mse / t.pixel_var;
}

// a [b L_Depth + (1 - b) L_HPE] + (1 - a) L_Location
inline double total_loss(double depth_l, double hpe_l, double loc_l, double a,
                         double b) {
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
    throw std::invalid_argument("total_loss: weights must lie in [0, 1]");
  return a * (b * depth_l + (1.0 - b) * hpe_l) + (1.0 - a) * loc_l;
}

}  // namespace estimator
}  // namespace wisense

#endif  // WISENSE_ESTIMATOR_LOSSES_HPP
