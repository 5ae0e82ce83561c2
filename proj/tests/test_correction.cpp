#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "droci/correction.hpp"
#include "droci/errors.hpp"
#include "droci/influence.hpp"
#include "droci/registry.hpp"
#include "droci/rng.hpp"
#include "droci/sample.hpp"

using namespace droci;

namespace {

BartlettMoments random_moments(Rng& rng) {
  BartlettMoments m;
  m.kappa2 = 0.3 + 2.0 * rng.uniform();
  m.gamma = rng.normal();
  m.mu4 = m.kappa2 * m.kappa2 * (1.5 + 3.0 * rng.uniform());
  m.mu2a = 0.5 * rng.normal();
  m.mu2b = 0.5 * rng.normal();
  m.mu2c = 0.5 * rng.normal();
  m.mu2d = rng.normal();
  m.mu22 = 0.5 + rng.uniform();
  m.mu12d = 0.5 * rng.normal();
  return m;
}

}  // namespace

TEST_CASE("normal quantile: reference values and symmetry") {
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-9));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  CHECK(normal_quantile(0.95) ==
        doctest::Approx(1.644853626951473).epsilon(1e-9));
  for (double p : {0.01, 0.2, 0.45}) {
    CHECK(normal_quantile(p) ==
          doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("chi-square quantile and uncorrected ball size") {
  CHECK(chi2_quantile_1df(0.95) ==
        doctest::Approx(3.841458820694124).epsilon(1e-9));
  CHECK(chi2_quantile_1df(0.90) ==
        doctest::Approx(2.705543454095404).epsilon(1e-9));
  // q = phi''(1) * quantile
  CHECK(q_exact(0.95, make_divergence("reverse-kl")) ==
        doctest::Approx(3.841458820694124).epsilon(1e-9));
  CHECK(q_exact(0.95, make_divergence("chi2")) ==
        doctest::Approx(7.682917641388248).epsilon(1e-9));
}

TEST_CASE("coverage polynomial is odd") {
  Rng rng(3);
  const auto spec = make_divergence("kl");
  for (int t = 0; t < 20; ++t) {
    const auto m = random_moments(rng);
    for (double x : {0.3, 1.1, 2.4}) {
      CHECK(a_eval(-x, spec, m) ==
            doctest::Approx(-a_eval(x, spec, m)).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("mean model under reverse-kl reduces to the classical factor") {
  Rng rng(4);
  const auto spec = make_divergence("reverse-kl");
  for (int t = 0; t < 50; ++t) {
    BartlettMoments m;  // only first-order moments: linear functional
    m.kappa2 = 0.3 + 2.0 * rng.uniform();
    m.gamma = rng.normal();
    m.mu4 = m.kappa2 * m.kappa2 * (1.5 + 3.0 * rng.uniform());
    const double classical = m.mu4 / (2.0 * m.kappa2 * m.kappa2) -
                             m.gamma * m.gamma /
                                 (3.0 * m.kappa2 * m.kappa2 * m.kappa2);
    for (double x : {0.7, 1.3, 2.1}) {
      CHECK(-a_eval(x, spec, m) / x ==
            doctest::Approx(classical).epsilon(1e-12));
    }
  }
  // standard normal moments: factor exactly 3/2
  BartlettMoments m;
  m.kappa2 = 1.0;
  m.gamma = 0.0;
  m.mu4 = 3.0;
  CHECK(-a_eval(1.0, spec, m) / 1.0 == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("corrected ball size: frozen example and clamping") {
  const auto spec = make_divergence("reverse-kl");
  BartlettMoments m;
  m.kappa2 = 1.0;
  m.gamma = 0.0;
  m.mu4 = 3.0;
  const auto c = corrected_q(0.95, spec, m, 30);
  CHECK_FALSE(c.clamped);
  CHECK(c.q ==
        doctest::Approx(3.841458820694124 * (1.0 + 1.5 / 30.0)).epsilon(1e-12));

  // a huge negative factor drives the corrected size non-positive: clamp
  BartlettMoments bad = m;
  bad.mu4 = -120.0;  // not a real moment set; forces factor < -n
  const auto cc = corrected_q(0.95, spec, bad, 5);
  CHECK(cc.clamped);
  CHECK(cc.q ==
        doctest::Approx(0.1 * 3.841458820694124).epsilon(1e-12));
}

TEST_CASE("standardized smooth model in one dimension") {
  const Sample s = Sample::from_scalars({1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  const auto st = standardize_smooth(lookup_smooth("identity"), s);
  REQUIRE(st.dim == 1);
  // theta = sd * f' = sd; biased sample variance of 1..6 is 35/12
  const double sd = std::sqrt(35.0 / 12.0);
  CHECK(st.theta[0] == doctest::Approx(sd).epsilon(1e-12));
  CHECK(st.theta2[0] == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  // whitened moments: symmetric design, third vanishes
  CHECK(st.alpha3[0] == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  CHECK(st.alpha4[0] > 1.0);
}

TEST_CASE("whitening rejects rank-deficient data") {
  std::vector<double> rows;
  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    const double x = rng.normal();
    rows.push_back(x);
    rows.push_back(2.0 * x);  // second column a multiple of the first
  }
  const Sample s(rows, 10, 2);
  CHECK_THROWS_AS(standardize_smooth(lookup_smooth("x+y^2"), s),
                  SingularWhitening);
}

TEST_CASE("t-factors: frozen population instance") {
  // f(x,y) = x + y^2 under the bivariate standard normal: theta = (1, 0),
  // Hessian diag(0, 2), no skewness, normal fourth moments.
  StandardizedSmooth s;
  s.dim = 2;
  s.theta = {1.0, 0.0};
  s.theta2 = {0.0, 0.0, 0.0, 2.0};
  s.alpha3.assign(8, 0.0);
  s.alpha4.assign(16, 0.0);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t d = 0; d < 2; ++d) {
          const double v = (a == b && c == d ? 1.0 : 0.0) +
                           (a == c && b == d ? 1.0 : 0.0) +
                           (a == d && b == c ? 1.0 : 0.0);
          s.alpha4[((a * 2 + b) * 2 + c) * 2 + d] = v;
        }
  const auto t = t_factors(s);
  CHECK(t.t1 == doctest::Approx(0.0).epsilon(1e-13).scale(1.0));
  CHECK(t.t2 == doctest::Approx(0.0).epsilon(1e-13).scale(1.0));
  CHECK(t.t3 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(t.t5 == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(t.factor == doctest::Approx(0.5).epsilon(1e-12));
  const auto t2 = t_factors(s, true);
  CHECK(t2.t5 == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(t2.factor == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("rule parsing and naming") {
  CHECK(parse_rule_kind("el") == RuleKind::Exact);
  CHECK(parse_rule_kind("eb") == RuleKind::BartlettEstimated);
  CHECK(parse_rule_kind("tb") == RuleKind::BartlettTheoretical);
  CHECK(parse_rule_kind("tb2") == RuleKind::BartlettDicc);
  CHECK_THROWS_AS(parse_rule_kind("bogus"), ConfigError);
  for (const char* n : {"el", "eb", "tb", "tb2"})
    CHECK(rule_kind_name(parse_rule_kind(n)).size() > 0);
}

TEST_CASE("confidence interval wraps two ball solves") {
  const Sample s = Sample::from_scalars({1.2, 0.7, 2.5, 3.1, 0.4, 1.9, 2.2});
  const InfluenceModel m = vstat_model(s, lookup_kernel("gamma-kernel"));
  const auto spec = make_divergence("reverse-kl");
  BallSizeRule rule;
  rule.kind = RuleKind::Exact;
  rule.nominal = 0.9;
  const auto ci = confidence_interval(m, s, spec, rule);
  CHECK(ci.lower < m.psi_hat);
  CHECK(ci.upper > m.psi_hat);
  CHECK(ci.q_used == doctest::Approx(q_exact(0.9, spec)).epsilon(1e-12));

  // the estimated correction enlarges the interval here (positive factor)
  BallSizeRule eb;
  eb.kind = RuleKind::BartlettEstimated;
  eb.nominal = 0.9;
  const auto ci2 = confidence_interval(m, s, spec, eb);
  CHECK(ci2.q_used > ci.q_used);
  CHECK(ci2.upper - ci2.lower > ci.upper - ci.lower);

  // expansion solver gives a nearby interval
  const auto ci3 =
      confidence_interval(m, s, spec, rule, SolverChoice::Expansion);
  CHECK(ci3.lower == doctest::Approx(ci.lower).epsilon(0.15));
  CHECK(ci3.upper == doctest::Approx(ci.upper).epsilon(0.15));

  // theoretical rule requires oracle moments
  BallSizeRule tb;
  tb.kind = RuleKind::BartlettTheoretical;
  tb.nominal = 0.9;
  CHECK_THROWS_AS(confidence_interval(m, s, spec, tb), ConfigError);
}
