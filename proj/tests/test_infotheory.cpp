#include "doctest.h"

#include <cmath>
#include <vector>

#include "wisense/infotheory.hpp"

using namespace wisense;
using namespace wisense::infotheory;

namespace {

// symmetric 2x2 source: uniform marginals, I = 1 - H2(0.2)
JointSource symmetric_source() {
  JointSource src;
  src.m_size = 2;
  src.mhat_size = 2;
  src.joint = {0.4, 0.1, 0.1, 0.4};
  return src;
}

JointSource with_history(JointSource src) {
  src.has_history = true;
  src.history.p_state = {0.5, 0.5};
  src.history.p_mhat_given = {{0.9, 0.1}, {0.1, 0.9}};
  return src;
}

// Independent membership test built on empirical type counts instead of
// per-symbol log accumulation.
bool type_count_typical(const std::vector<int>& m_seq,
                        const std::vector<int>& mhat_seq,
                        const JointSource& src, const TypicalParams& params) {
  const double n = static_cast<double>(params.n);
  const auto pm = src.marginal_m();
  const auto ph = src.marginal_mhat();

  std::vector<double> cm(src.m_size, 0.0), ch(src.mhat_size, 0.0);
  std::vector<double> cj(static_cast<std::size_t>(src.m_size) * src.mhat_size,
                         0.0);
  double dist = 0.0;
  for (int j = 0; j < params.n; ++j) {
    cm[m_seq[j]] += 1.0;
    ch[mhat_seq[j]] += 1.0;
    cj[static_cast<std::size_t>(m_seq[j]) * src.mhat_size + mhat_seq[j]] += 1.0;
    dist += params.d(m_seq[j], mhat_seq[j], src.mhat_size);
  }

  auto rate = [&](const std::vector<double>& counts,
                  const std::vector<double>& pmf) {
    double r = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0.0) continue;
      if (pmf[i] <= 0.0) return std::numeric_limits<double>::infinity();
      r -= counts[i] / n * std::log2(pmf[i]);
    }
    return r;
  };

  if (!(std::fabs(rate(cm, pm) - src.entropy_m()) < params.epsilon))
    return false;
  if (!(std::fabs(rate(ch, ph) - src.entropy_mhat()) < params.epsilon))
    return false;
  if (!(std::fabs(rate(cj, src.joint) - src.entropy_joint()) < params.epsilon))
    return false;
  return std::fabs(dist / n - expected_distortion(src, params)) <
         params.epsilon;
}

}  // namespace

TEST_CASE("entropy") {
  CHECK(entropy({0.5, 0.5}) == doctest::Approx(1.0));
  CHECK(entropy({0.25, 0.75}) == doctest::Approx(0.811278).epsilon(1e-5));
  CHECK(entropy({1.0}) == doctest::Approx(0.0));
  CHECK(entropy({0.5, 0.0, 0.5}) == doctest::Approx(1.0));
  CHECK(entropy({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(2.0));
}

TEST_CASE("joint source information quantities") {
  JointSource src = symmetric_source();
  src.validate();
  CHECK(src.entropy_m() == doctest::Approx(1.0));
  CHECK(src.entropy_mhat() == doctest::Approx(1.0));
  // H(M, Mhat) = H(0.4, 0.1, 0.1, 0.4)
  CHECK(src.entropy_joint() == doctest::Approx(1.721928).epsilon(1e-5));
  CHECK(src.mutual_information() == doctest::Approx(0.278072).epsilon(1e-5));

  SUBCASE("binary symmetric pair, crossover 0.1") {
    JointSource bsc;
    bsc.m_size = 2;
    bsc.mhat_size = 2;
    bsc.joint = {0.45, 0.05, 0.05, 0.45};
    CHECK(bsc.mutual_information() == doctest::Approx(0.531004).epsilon(1e-5));
  }

  SUBCASE("independent pair has zero information") {
    JointSource ind;
    ind.m_size = 2;
    ind.mhat_size = 2;
    ind.joint = {0.21, 0.09, 0.49, 0.21};
    CHECK(ind.mutual_information() == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("history information") {
    const JointSource h = with_history(symmetric_source());
    h.validate();
    // marginal of the history model matches the joint's mhat marginal, so
    // I(Mhat; state) = 1 - H2(0.1)
    CHECK(h.history_information() == doctest::Approx(0.531004).epsilon(1e-5));
    CHECK_THROWS_AS(symmetric_source().history_information(), std::logic_error);
  }

  SUBCASE("validation") {
    JointSource bad = symmetric_source();
    bad.joint[0] = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = symmetric_source();
    bad.joint = {1.2, -0.2, 0.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = with_history(symmetric_source());
    bad.history.p_mhat_given[0] = {0.7, 0.7};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("expected distortion") {
  const JointSource src = symmetric_source();
  const TypicalParams p = hamming_params(4, 0.3, 2, 2);
  CHECK(expected_distortion(src, p) == doctest::Approx(0.2));
  CHECK(p.d_max() == 1.0);

  TypicalParams weighted = p;
  weighted.distortion = {0.0, 2.0, 1.0, 0.5};
  // 0.4*0 + 0.1*2 + 0.1*1 + 0.4*0.5
  CHECK(expected_distortion(src, weighted) == doctest::Approx(0.5));
}

TEST_CASE("distortion typicality") {
  const JointSource src = symmetric_source();

  SUBCASE("hand-checked pair at n = 2") {
    TypicalParams p = hamming_params(2, 0.6, 2, 2);
    // (0,0)/(0,0): joint rate -log2(0.16)/2 = 1.3219, within 0.6 of 1.7219
    CHECK(is_distortion_typical({0, 0}, {0, 0}, src, p));
    p.epsilon = 0.3;  // joint condition now fails by 0.1 bits
    CHECK_FALSE(is_distortion_typical({0, 0}, {0, 0}, src, p));
  }

  SUBCASE("matches type-count implementation over all pairs") {
    for (const double eps : {0.1, 0.2, 0.3, 0.5}) {
      const TypicalParams p = hamming_params(4, eps, 2, 2);
      std::vector<int> m_seq(4, 0);
      do {
        std::vector<int> mhat_seq(4, 0);
        do {
          CHECK(is_distortion_typical(m_seq, mhat_seq, src, p) ==
                type_count_typical(m_seq, mhat_seq, src, p));
        } while (detail::next_seq(mhat_seq, 2));
      } while (detail::next_seq(m_seq, 2));
    }
  }

  SUBCASE("zero-probability symbol is never typical") {
    JointSource z;
    z.m_size = 2;
    z.mhat_size = 2;
    z.joint = {0.5, 0.0, 0.0, 0.5};
    const TypicalParams p = hamming_params(3, 10.0, 2, 2);
    CHECK(is_distortion_typical({0, 1, 0}, {0, 1, 0}, z, p));
    // pair (0,1) has joint probability zero; huge epsilon must not admit it
    CHECK_FALSE(is_distortion_typical({0, 1, 0}, {1, 1, 0}, z, p));
  }

  SUBCASE("length mismatch throws") {
    const TypicalParams p = hamming_params(3, 0.3, 2, 2);
    CHECK_THROWS_AS(is_distortion_typical({0, 1}, {0, 1}, src, p),
                    std::invalid_argument);
  }

  SUBCASE("temporal variant") {
    const JointSource h = with_history(symmetric_source());
    const TypicalParams p = hamming_params(4, 0.4, 2, 2);
    int plain = 0, temporal = 0;
    std::vector<int> m_seq(4, 0);
    do {
      std::vector<int> mhat_seq(4, 0);
      do {
        plain += is_distortion_typical(m_seq, mhat_seq, h, p);
        temporal += is_temporal_distortion_typical(m_seq, mhat_seq, 0, h, p);
      } while (detail::next_seq(mhat_seq, 2));
    } while (detail::next_seq(m_seq, 2));
    CHECK(plain > 0);
    // conditional entropy H2(0.1) = 0.469 sits far from the marginal rates
    // of mixed sequences, so conditioning changes membership
    CHECK(temporal != plain);
    CHECK_THROWS_AS(
        is_temporal_distortion_typical({0}, {0}, 0, src,
                                       hamming_params(1, 0.3, 2, 2)),
        std::logic_error);
  }

  SUBCASE("typical set probability grows with n") {
    std::vector<double> masses;
    for (const int n : {2, 4, 6, 8, 10}) {
      const TypicalParams p = hamming_params(n, 0.3, 2, 2);
      double mass = 0.0;
      std::vector<int> m_seq(n, 0);
      do {
        std::vector<int> mhat_seq(n, 0);
        do {
          if (!is_distortion_typical(m_seq, mhat_seq, src, p)) continue;
          double pr = 1.0;
          for (int j = 0; j < n; ++j) pr *= src.p(m_seq[j], mhat_seq[j]);
          mass += pr;
        } while (detail::next_seq(mhat_seq, 2));
      } while (detail::next_seq(m_seq, 2));
      masses.push_back(mass);
    }
    // converges towards 1; small n wiggles, so only the trend is checked
    CHECK(masses.back() > masses.front());
    CHECK(masses.back() > 0.6);
  }
}

TEST_CASE("lemma 1") {
  const JointSource src = symmetric_source();

  SUBCASE("exhaustive check on the symmetric source") {
    for (const double eps : {0.1, 0.2, 0.3}) {
      const LemmaReport rep = verify_lemma1(src, hamming_params(5, eps, 2, 2));
      CHECK(rep.enumerated == 1024);
      CHECK(rep.violations == 0);
      if (rep.typical_pairs > 0) CHECK(rep.min_margin_bits >= 0.0);
    }
  }

  SUBCASE("seeded source sweep") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      const JointSource r = make_random_source(seed, 3, 2, 0);
      const LemmaReport rep = verify_lemma1(r, hamming_params(4, 0.2, 3, 2));
      CHECK(rep.enumerated == 81 * 16);
      CHECK(rep.violations == 0);
    }
  }

  SUBCASE("enumeration budget") {
    const JointSource r = make_random_source(7, 3, 3, 0);
    CHECK_THROWS_AS(verify_lemma1(r, hamming_params(8, 0.2, 3, 3)),
                    enumeration_budget_error);
  }
}

TEST_CASE("lemma 2") {
  const JointSource h = with_history(symmetric_source());

  SUBCASE("exhaustive check over both states") {
    for (const double eps : {0.1, 0.2, 0.3}) {
      const LemmaReport rep = verify_lemma2(h, hamming_params(5, eps, 2, 2));
      CHECK(rep.enumerated == 2 * 1024);
      CHECK(rep.violations == 0);
    }
  }

  SUBCASE("seeded sources with history") {
    for (std::uint64_t seed = 21; seed <= 32; ++seed) {
      const JointSource r = make_random_source(seed, 2, 3, 2);
      const LemmaReport rep = verify_lemma2(r, hamming_params(4, 0.3, 2, 3));
      CHECK(rep.violations == 0);
    }
  }

  CHECK_THROWS_AS(verify_lemma2(symmetric_source(), hamming_params(2, 0.3, 2, 2)),
                  std::logic_error);
}

TEST_CASE("distortion bounds") {
  const JointSource src = symmetric_source();
  const TypicalParams p = hamming_params(2, 0.1, 2, 2);

  SUBCASE("hand-computed value") {
    // D = 0.2, I = 0.278072, exponent 2 (1 - I - 0.3) = 0.843856,
    // bound = 0.2 + exp(-2^0.843856) + 0.2
    const DistortionBounds b = distortion_bound(src, p, 1.0);
    CHECK(b.bound_iid == doctest::Approx(0.566152).epsilon(1e-4));
    CHECK(b.bound_temporal == b.bound_iid);  // no history model
  }

  SUBCASE("temporal bound is tighter with an informative history") {
    const JointSource h = with_history(symmetric_source());
    for (const double rate : {0.3, 0.6, 1.0, 1.5}) {
      const DistortionBounds b = distortion_bound(h, p, rate);
      CHECK(b.bound_temporal <= b.bound_iid);
    }
  }

  SUBCASE("decreasing in rate, approaches D + slack") {
    double prev = 1e9;
    for (const double rate : {0.4, 0.8, 1.2, 2.0, 4.0}) {
      const DistortionBounds b = distortion_bound(src, p, rate);
      CHECK(b.bound_iid < prev);
      prev = b.bound_iid;
    }
    const TypicalParams p8 = hamming_params(8, 0.1, 2, 2);
    CHECK(distortion_bound(src, p8, 4.0).bound_iid ==
          doctest::Approx(0.2 + 0.2).epsilon(1e-6));
  }
}

TEST_CASE("random coding") {
  const JointSource src = symmetric_source();
  const TypicalParams p = hamming_params(6, 0.3, 2, 2);

  SUBCASE("deterministic in the seed") {
    const CodingStats a = simulate_random_coding(src, p, 1.0, 64, 99, false);
    const CodingStats b = simulate_random_coding(src, p, 1.0, 64, 99, false);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
      CHECK(a.trials[i].distortion == b.trials[i].distortion);
      CHECK(a.trials[i].encoding_failed == b.trials[i].encoding_failed);
    }
    const CodingStats c = simulate_random_coding(src, p, 1.0, 64, 100, false);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.trials.size(); ++i)
      any_diff |= a.trials[i].distortion != c.trials[i].distortion;
    CHECK(any_diff);
  }

  SUBCASE("per-trial distortion obeys the typicality split") {
    const double D = expected_distortion(src, p);
    const CodingStats s = simulate_random_coding(src, p, 1.0, 400, 5, false);
    for (const auto& t : s.trials) {
      if (t.encoding_failed)
        CHECK(t.distortion <= p.d_max());
      else
        CHECK(t.distortion <= D + p.epsilon + 1e-12);
    }
    // rate well above I with a generous band: encoding mostly succeeds
    CHECK(s.failure_rate < 0.2);
    CHECK(s.mean_distortion <= distortion_bound(src, p, 1.0).bound_iid + 0.1);
  }

  SUBCASE("conditioning on an informative state does not hurt") {
    const JointSource h = make_random_source(3, 2, 2, 2, 8.0);
    const TypicalParams hp = hamming_params(6, 0.3, 2, 2);
    const CodingStats un = simulate_random_coding(h, hp, 0.6, 400, 11, false);
    const CodingStats co = simulate_random_coding(h, hp, 0.6, 400, 11, true);
    CHECK(co.failure_rate <= un.failure_rate + 0.05);
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(simulate_random_coding(src, p, 1.0, 0, 1, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_random_coding(src, p, 1.0, 10, 1, true),
                    std::logic_error);
    CHECK_THROWS_AS(simulate_random_coding(src, p, 40.0, 2, 1, false),
                    enumeration_budget_error);
  }
}

TEST_CASE("make_random_source") {
  for (std::uint64_t seed : {1ULL, 9ULL, 77ULL}) {
    const JointSource r = make_random_source(seed, 3, 3, 3);
    CHECK_NOTHROW(r.validate());
    CHECK(r.history_information() >= -1e-12);
    const JointSource again = make_random_source(seed, 3, 3, 3);
    CHECK(r.joint == again.joint);
  }
  const JointSource flat = make_random_source(5, 2, 2, 0);
  CHECK_FALSE(flat.has_history);
}
