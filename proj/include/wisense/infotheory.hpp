#ifndef WISENSE_INFOTHEORY_HPP
#define WISENSE_INFOTHEORY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wisense/common.hpp"
#include "wisense/rng.hpp"

// Numerical verification of the distortion-typical-set machinery on small
// discrete sources: typicality tests, exhaustive lemma checks, the two
// distortion upper bounds, and the random-coding construction, with the
// estimate history modeled as a finite hidden state.

namespace wisense {
namespace infotheory {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr std::size_t kEnumerationBudget = 10'000'000;

// All logs base 2.
inline double entropy(const std::vector<double>& pmf) {
  double h = 0.0;
  for (const double p : pmf)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

// Finite-state stand-in for the estimate history: a state with known
// distribution and a per-state reproduction distribution p(mhat | state).
struct HistoryModel {
  std::vector<double> p_state;                    // [n_states]
  std::vector<std::vector<double>> p_mhat_given;  // [n_states][mhat]

  int n_states() const { return static_cast<int>(p_state.size()); }

  // marginal over states
  std::vector<double> mhat_marginal() const {
    std::vector<double> m(p_mhat_given.front().size(), 0.0);
    for (int s = 0; s < n_states(); ++s)
      for (std::size_t j = 0; j < m.size(); ++j)
        m[j] += p_state[s] * p_mhat_given[s][j];
    return m;
  }

  // H(Mhat | state)
  double conditional_entropy() const {
    double h = 0.0;
    for (int s = 0; s < n_states(); ++s)
      h += p_state[s] * entropy(p_mhat_given[s]);
    return h;
  }
};

struct JointSource {
  int m_size = 0;
  int mhat_size = 0;
  std::vector<double> joint;  // p(m, mhat), m-major
  bool has_history = false;
  HistoryModel history;

  double p(int m, int mhat) const {
    return joint[static_cast<std::size_t>(m) * mhat_size + mhat];
  }

  std::vector<double> marginal_m() const {
    std::vector<double> r(m_size, 0.0);
    for (int m = 0; m < m_size; ++m)
      for (int h = 0; h < mhat_size; ++h) r[m] += p(m, h);
    return r;
  }

  std::vector<double> marginal_mhat() const {
    std::vector<double> r(mhat_size, 0.0);
    for (int m = 0; m < m_size; ++m)
      for (int h = 0; h < mhat_size; ++h) r[h] += p(m, h);
    return r;
  }

  double entropy_m() const { return entropy(marginal_m()); }
  double entropy_mhat() const { return entropy(marginal_mhat()); }
  double entropy_joint() const { return entropy(joint); }

  // I(Mhat; M) = H(M) + H(Mhat) - H(M, Mhat)
  double mutual_information() const {
    return entropy_m() + entropy_mhat() - entropy_joint();
  }

  // I(Mhat; history state); requires marginal consistency for >= 0.
  double history_information() const {
    if (!has_history)
      throw std::logic_error("history_information: no history model");
    return entropy_mhat() - history.conditional_entropy();
  }

  void validate() const {
    if (m_size < 1 || mhat_size < 1 ||
        joint.size() != static_cast<std::size_t>(m_size) * mhat_size)
      throw std::invalid_argument("JointSource: bad dimensions");
    double sum = 0.0;
    for (const double v : joint) {
      if (v < 0.0) throw std::invalid_argument("JointSource: negative pmf entry");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("JointSource: pmf does not sum to 1");
    if (has_history) {
      double ssum = 0.0;
      for (const double v : history.p_state) ssum += v;
      if (std::fabs(ssum - 1.0) > 1e-12)
        throw std::invalid_argument("JointSource: state pmf does not sum to 1");
      for (const auto& row : history.p_mhat_given) {
        if (row.size() != static_cast<std::size_t>(mhat_size))
          throw std::invalid_argument("JointSource: conditional row size");
        double rsum = 0.0;
        for (const double v : row) rsum += v;
        if (std::fabs(rsum - 1.0) > 1e-12)
          throw std::invalid_argument("JointSource: conditional row not stochastic");
      }
    }
  }
};

struct TypicalParams {
  int n = 1;
  double epsilon = 0.1;
  std::vector<double> distortion;  // d(m, mhat), m-major, >= 0

  double d(int m, int mhat, int mhat_size) const {
    return distortion[static_cast<std::size_t>(m) * mhat_size + mhat];
  }
  double d_max() const {
    return *std::max_element(distortion.begin(), distortion.end());
  }

  void validate(const JointSource& src) const {
    if (n < 1) throw std::invalid_argument("TypicalParams: n must be >= 1");
    if (epsilon <= 0.0) throw std::invalid_argument("TypicalParams: epsilon <= 0");
    if (distortion.size() !=
        static_cast<std::size_t>(src.m_size) * src.mhat_size)
      throw std::invalid_argument("TypicalParams: distortion table size");
    for (const double v : distortion)
      if (v < 0.0) throw std::invalid_argument("TypicalParams: negative distortion");
  }
};

// E[d(M, Mhat)] under the joint pmf.
inline double expected_distortion(const JointSource& src,
                                  const TypicalParams& params) {
  double e = 0.0;
  for (int m = 0; m < src.m_size; ++m)
    for (int h = 0; h < src.mhat_size; ++h)
      e += src.p(m, h) * params.d(m, h, src.mhat_size);
  return e;
}

namespace detail {

inline double log2_prob_seq(const std::vector<int>& seq,
                            const std::vector<double>& pmf) {
  double lp = 0.0;
  for (const int s : seq) {
    if (pmf[s] <= 0.0) return kNegInf;
    lp += std::log2(pmf[s]);
  }
  return lp;
}

inline double log2_prob_pair(const std::vector<int>& m_seq,
                             const std::vector<int>& mhat_seq,
                             const JointSource& src) {
  double lp = 0.0;
  for (std::size_t j = 0; j < m_seq.size(); ++j) {
    const double p = src.p(m_seq[j], mhat_seq[j]);
    if (p <= 0.0) return kNegInf;
    lp += std::log2(p);
  }
  return lp;
}

inline double avg_distortion(const std::vector<int>& m_seq,
                             const std::vector<int>& mhat_seq,
                             const JointSource& src,
                             const TypicalParams& params) {
  double d = 0.0;
  for (std::size_t j = 0; j < m_seq.size(); ++j)
    d += params.d(m_seq[j], mhat_seq[j], src.mhat_size);
  return d / static_cast<double>(m_seq.size());
}

inline bool in_band(double neg_log_rate, double target, double eps) {
  return std::isfinite(neg_log_rate) && std::fabs(neg_log_rate - target) < eps;
}

// Advance a base-`radix` odometer; returns false on wrap-around.
inline bool next_seq(std::vector<int>& seq, int radix) {
  for (std::size_t i = seq.size(); i-- > 0;) {
    if (++seq[i] < radix) return true;
    seq[i] = 0;
  }
  return false;
}

}  // namespace detail

// Four-condition membership test of the distortion typical set.
inline bool is_distortion_typical(const std::vector<int>& m_seq,
                                  const std::vector<int>& mhat_seq,
                                  const JointSource& src,
                                  const TypicalParams& params) {
  const double n = static_cast<double>(params.n);
  if (m_seq.size() != static_cast<std::size_t>(params.n) ||
      mhat_seq.size() != static_cast<std::size_t>(params.n))
    throw std::invalid_argument("is_distortion_typical: sequence length != n");
  const double eps = params.epsilon;
  const double lp_m = detail::log2_prob_seq(m_seq, src.marginal_m());
  if (!detail::in_band(-lp_m / n, src.entropy_m(), eps)) return false;
  const double lp_h = detail::log2_prob_seq(mhat_seq, src.marginal_mhat());
  if (!detail::in_band(-lp_h / n, src.entropy_mhat(), eps)) return false;
  const double lp_j = detail::log2_prob_pair(m_seq, mhat_seq, src);
  if (!detail::in_band(-lp_j / n, src.entropy_joint(), eps)) return false;
  const double d = detail::avg_distortion(m_seq, mhat_seq, src, params);
  return std::fabs(d - expected_distortion(src, params)) < eps;
}

// Temporal variant: the reproduction-sequence condition is taken against the
// history-conditional distribution and conditional entropy.
inline bool is_temporal_distortion_typical(const std::vector<int>& m_seq,
                                           const std::vector<int>& mhat_seq,
                                           int history_state,
                                           const JointSource& src,
                                           const TypicalParams& params) {
  if (!src.has_history)
    throw std::logic_error("is_temporal_distortion_typical: no history model");
  const double n = static_cast<double>(params.n);
  if (m_seq.size() != static_cast<std::size_t>(params.n) ||
      mhat_seq.size() != static_cast<std::size_t>(params.n))
    throw std::invalid_argument("is_temporal_distortion_typical: length != n");
  const double eps = params.epsilon;
  const double lp_m = detail::log2_prob_seq(m_seq, src.marginal_m());
  if (!detail::in_band(-lp_m / n, src.entropy_m(), eps)) return false;
  const double lp_h = detail::log2_prob_seq(
      mhat_seq, src.history.p_mhat_given[history_state]);
  if (!detail::in_band(-lp_h / n, src.history.conditional_entropy(), eps))
    return false;
  const double lp_j = detail::log2_prob_pair(m_seq, mhat_seq, src);
  if (!detail::in_band(-lp_j / n, src.entropy_joint(), eps)) return false;
  const double d = detail::avg_distortion(m_seq, mhat_seq, src, params);
  return std::fabs(d - expected_distortion(src, params)) < eps;
}

struct LemmaReport {
  std::size_t enumerated = 0;      // all sequence pairs visited
  std::size_t typical_pairs = 0;   // pairs in the typical set
  std::size_t violations = 0;      // typical pairs breaking the inequality
  double min_margin_bits = std::numeric_limits<double>::infinity();
};

namespace detail {

inline void check_enumeration_budget(const JointSource& src, int n) {
  const double pairs = std::pow(static_cast<double>(src.m_size), n) *
                       std::pow(static_cast<double>(src.mhat_size), n);
  if (pairs > static_cast<double>(kEnumerationBudget))
    throw enumeration_budget_error(
        "lemma verification: |M|^n * |Mhat|^n exceeds enumeration budget");
}

}  // namespace detail

// Exhaustive check of p(mhat^n | m^n) <= p(mhat^n) 2^{n [I + 3 eps]} over the
// distortion typical set.
inline LemmaReport verify_lemma1(const JointSource& src,
                                 const TypicalParams& params) {
  src.validate();
  params.validate(src);
  detail::check_enumeration_budget(src, params.n);
  const double n = static_cast<double>(params.n);
  const double bound_exp = n * (src.mutual_information() + 3.0 * params.epsilon);
  const auto pm = src.marginal_m();
  const auto ph = src.marginal_mhat();

  LemmaReport rep;
  std::vector<int> m_seq(params.n, 0);
  do {
    const double lp_m = detail::log2_prob_seq(m_seq, pm);
    std::vector<int> mhat_seq(params.n, 0);
    do {
      ++rep.enumerated;
      if (!is_distortion_typical(m_seq, mhat_seq, src, params)) continue;
      ++rep.typical_pairs;
      const double lp_joint = detail::log2_prob_pair(m_seq, mhat_seq, src);
      const double lhs = lp_joint - lp_m;  // log2 p(mhat^n | m^n)
      const double rhs = detail::log2_prob_seq(mhat_seq, ph) + bound_exp;
      const double margin = rhs - lhs;
      rep.min_margin_bits = std::min(rep.min_margin_bits, margin);
      if (margin < 0.0) ++rep.violations;
    } while (detail::next_seq(mhat_seq, src.mhat_size));
  } while (detail::next_seq(m_seq, src.m_size));
  return rep;
}

// Exhaustive check of Lemma 2 over every history state: p(mhat^n | m^n) <=
// p(mhat^n | state) 2^{n [I(Mhat;M) - I(Mhat;state) + 3 eps]}.
inline LemmaReport verify_lemma2(const JointSource& src,
                                 const TypicalParams& params) {
  if (!src.has_history)
    throw std::logic_error("verify_lemma2: no history model");
  src.validate();
  params.validate(src);
  detail::check_enumeration_budget(src, params.n);
  const double n = static_cast<double>(params.n);
  const double bound_exp =
      n * (src.mutual_information() - src.history_information() +
           3.0 * params.epsilon);
  const auto pm = src.marginal_m();

  LemmaReport rep;
  for (int s = 0; s < src.history.n_states(); ++s) {
    const auto& p_cond = src.history.p_mhat_given[s];
    std::vector<int> m_seq(params.n, 0);
    do {
      const double lp_m = detail::log2_prob_seq(m_seq, pm);
      std::vector<int> mhat_seq(params.n, 0);
      do {
        ++rep.enumerated;
        if (!is_temporal_distortion_typical(m_seq, mhat_seq, s, src, params))
          continue;
        ++rep.typical_pairs;
        const double lp_joint = detail::log2_prob_pair(m_seq, mhat_seq, src);
        const double lhs = lp_joint - lp_m;
        const double rhs = detail::log2_prob_seq(mhat_seq, p_cond) + bound_exp;
        const double margin = rhs - lhs;
        rep.min_margin_bits = std::min(rep.min_margin_bits, margin);
        if (margin < 0.0) ++rep.violations;
      } while (detail::next_seq(mhat_seq, src.mhat_size));
    } while (detail::next_seq(m_seq, src.m_size));
  }
  return rep;
}

struct DistortionBounds {
  double bound_iid = 0.0;
  double bound_temporal = 0.0;
};

// Achievability upper bounds on expected distortion, with and without the
// history-information term in the exponent.
inline DistortionBounds distortion_bound(const JointSource& src,
                                         const TypicalParams& params,
                                         double rate) {
  const double D = expected_distortion(src, params);
  const double dmax = params.d_max();
  const double n = static_cast<double>(params.n);
  const double i_mm = src.mutual_information();
  const double i_hist = src.has_history ? src.history_information() : 0.0;
  const double slack = (1.0 + dmax) * params.epsilon;
  const double exp_iid = n * (rate - i_mm - 3.0 * params.epsilon);
  const double exp_temp = exp_iid + n * i_hist;
  DistortionBounds b;
  b.bound_iid = D + dmax * std::exp(-std::pow(2.0, exp_iid)) + slack;
  b.bound_temporal = D + dmax * std::exp(-std::pow(2.0, exp_temp)) + slack;
  return b;
}

struct CodingTrial {
  double distortion = 0.0;
  bool encoding_failed = false;
};

struct CodingStats {
  std::vector<CodingTrial> trials;
  double mean_distortion = 0.0;
  double failure_rate = 0.0;
};

namespace detail {

inline int draw_categorical(Rng& rng, const std::vector<double>& pmf) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    u -= pmf[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(pmf.size()) - 1;
}

}  // namespace detail

// Random coding with joint typical encoding. Each trial: draw a history
// state and a source block, draw a fresh codebook (from p(mhat), or from
// p(mhat|state) when conditioned), encode to the least index forming a
// typical pair, fall back to index 1 on failure. Trials use independent
// substreams of (seed, trial) so results are order independent.
inline CodingStats simulate_random_coding(const JointSource& src,
                                          const TypicalParams& params,
                                          double rate, std::size_t trials,
                                          std::uint64_t seed, bool conditioned) {
  if (trials == 0)
    throw std::invalid_argument("simulate_random_coding: trials must be > 0");
  if (conditioned && !src.has_history)
    throw std::logic_error("simulate_random_coding: conditioned needs history");
  src.validate();
  params.validate(src);
  const double codewords_d = std::ceil(std::pow(2.0, params.n * rate));
  const double budget = std::pow(static_cast<double>(src.mhat_size), params.n);
  if (codewords_d * params.n > 1e8 || budget > 1e15)
    throw enumeration_budget_error("simulate_random_coding: codebook too large");
  const auto n_codewords = static_cast<std::size_t>(codewords_d);

  const auto pm_marg = src.marginal_m();
  const auto ph_marg = src.marginal_mhat();
  // p(m | mhat) columns for the state -> mhat -> m generative chain
  std::vector<std::vector<double>> p_m_given_mhat(
      src.mhat_size, std::vector<double>(src.m_size, 0.0));
  for (int h = 0; h < src.mhat_size; ++h) {
    double col = 0.0;
    for (int m = 0; m < src.m_size; ++m) col += src.p(m, h);
    for (int m = 0; m < src.m_size; ++m)
      p_m_given_mhat[h][m] = col > 0.0 ? src.p(m, h) / col : 0.0;
  }

  CodingStats stats;
  stats.trials.resize(trials);
  double dist_sum = 0.0;
  std::size_t failures = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(substream_seed(seed, trial));
    // History state and source block. With a history model the block is
    // generated through state -> mhat -> m so the state is informative.
    int state = 0;
    std::vector<int> m_seq(params.n);
    if (src.has_history) {
      state = detail::draw_categorical(rng, src.history.p_state);
      for (int j = 0; j < params.n; ++j) {
        const int mh =
            detail::draw_categorical(rng, src.history.p_mhat_given[state]);
        m_seq[j] = detail::draw_categorical(rng, p_m_given_mhat[mh]);
      }
    } else {
      for (int j = 0; j < params.n; ++j)
        m_seq[j] = detail::draw_categorical(rng, pm_marg);
    }

    const auto& cw_pmf =
        conditioned ? src.history.p_mhat_given[state] : ph_marg;
    std::vector<int> codeword(params.n);
    bool encoded = false;
    std::vector<int> chosen(params.n);
    for (std::size_t w = 0; w < n_codewords; ++w) {
      for (int j = 0; j < params.n; ++j)
        codeword[j] = detail::draw_categorical(rng, cw_pmf);
      if (w == 0) chosen = codeword;  // fallback w = 1
      const bool typical =
          conditioned
              ? is_temporal_distortion_typical(m_seq, codeword, state, src,
                                               params)
              : is_distortion_typical(m_seq, codeword, src, params);
      if (typical) {
        chosen = codeword;
        encoded = true;
        break;
      }
    }
    auto& t = stats.trials[trial];
    t.encoding_failed = !encoded;
    t.distortion = detail::avg_distortion(m_seq, chosen, src, params);
    dist_sum += t.distortion;
    if (!encoded) ++failures;
  }
  stats.mean_distortion = dist_sum / static_cast<double>(trials);
  stats.failure_rate = static_cast<double>(failures) / static_cast<double>(trials);
  return stats;
}

// Seeded random source with a consistent history model: the joint is built
// as p(s) p(mhat|s) p(m|mhat), so the mhat marginal of the joint matches the
// history model exactly and I(Mhat; state) >= 0 holds by construction.
inline JointSource make_random_source(std::uint64_t seed, int m_size,
                                      int mhat_size, int n_states,
                                      double dependence = 4.0) {
  Rng rng(substream_seed(seed, 0x736f75726365ULL));
  JointSource src;
  src.m_size = m_size;
  src.mhat_size = mhat_size;
  src.has_history = n_states > 0;

  auto random_pmf = [&rng](int size, double concentration) {
    std::vector<double> p(size);
    double sum = 0.0;
    for (auto& v : p) {
      v = std::pow(rng.uniform(0.05, 1.0), concentration);
      sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
  };

  std::vector<double> p_mhat;
  if (src.has_history) {
    src.history.p_state = random_pmf(n_states, 1.0);
    for (int s = 0; s < n_states; ++s)
      src.history.p_mhat_given.push_back(random_pmf(mhat_size, dependence));
    p_mhat = src.history.mhat_marginal();
  } else {
    p_mhat = random_pmf(mhat_size, 1.0);
  }

  src.joint.assign(static_cast<std::size_t>(m_size) * mhat_size, 0.0);
  for (int h = 0; h < mhat_size; ++h) {
    const auto p_m_given = random_pmf(m_size, 2.0);
    for (int m = 0; m < m_size; ++m)
      src.joint[static_cast<std::size_t>(m) * mhat_size + h] =
          p_mhat[h] * p_m_given[m];
  }
  src.validate();
  return src;
}

// Hamming-style distortion, 0 on matched indices, 1 otherwise.
inline TypicalParams hamming_params(int n, double epsilon, int m_size,
                                    int mhat_size) {
  TypicalParams p;
  p.n = n;
  p.epsilon = epsilon;
  p.distortion.assign(static_cast<std::size_t>(m_size) * mhat_size, 1.0);
  const int k = std::min(m_size, mhat_size);
  for (int i = 0; i < k; ++i)
    p.distortion[static_cast<std::size_t>(i) * mhat_size + i] = 0.0;
  return p;
}

}  // namespace infotheory
}  // namespace wisense

#endif  // WISENSE_INFOTHEORY_HPP
