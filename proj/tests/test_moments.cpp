#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "droci/errors.hpp"
#include "droci/influence.hpp"
#include "droci/moments.hpp"
#include "droci/registry.hpp"
#include "droci/rng.hpp"
#include "droci/sample.hpp"

using namespace droci;

namespace {

// Independent oracle: every moment as a naive full sum over the product
// measure, O(n^3) where needed, from dense influence tables.
MomentSet brute_force(const InfluenceModel& m) {
  const std::size_t n = m.n();
  const auto f2 = m.if2_dense_copy();
  MomentSet o;
  for (std::size_t i = 0; i < n; ++i) {
    o.kappa2 += m.if1[i] * m.if1[i];
    o.gamma += m.if1[i] * m.if1[i] * m.if1[i];
    o.mu4 += std::pow(m.if1[i], 4);
    o.mu2d += f2[i * n + i];
    o.mu12d += m.if1[i] * f2[i * n + i];
  }
  o.kappa2 /= double(n);
  o.gamma /= double(n);
  o.mu4 /= double(n);
  o.mu2d /= double(n);
  o.mu12d /= double(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      o.mu2b += m.if1[i] * m.if1[j] * m.if1[j] * f2[i * n + j];
      o.mu2c += m.if1[i] * m.if1[j] * f2[i * n + j];
      o.mu22 += f2[i * n + j] * f2[i * n + j];
    }
  o.mu2b /= double(n) * n;
  o.mu2c /= double(n) * n;
  o.mu22 /= double(n) * n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        o.mu2a += m.if1[i] * m.if1[k] * f2[i * n + j] * f2[j * n + k];
  o.mu2a /= double(n) * n * n;
  if (m.has_if3 && !m.if3_zero) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          o.mu3c += m.if1[i] * m.if1[j] * m.if1[k] * m.if3(i, j, k);
    o.mu3c /= double(n) * n * n;
  }
  o.has_mu3c = m.has_if3;
  return o;
}

void compare(const MomentSet& a, const MomentSet& b) {
  CHECK(a.kappa2 == doctest::Approx(b.kappa2).epsilon(1e-11));
  CHECK(a.gamma == doctest::Approx(b.gamma).epsilon(1e-11).scale(1.0));
  CHECK(a.mu4 == doctest::Approx(b.mu4).epsilon(1e-11));
  CHECK(a.mu2a == doctest::Approx(b.mu2a).epsilon(1e-10).scale(1.0));
  CHECK(a.mu2b == doctest::Approx(b.mu2b).epsilon(1e-10).scale(1.0));
  CHECK(a.mu2c == doctest::Approx(b.mu2c).epsilon(1e-10).scale(1.0));
  CHECK(a.mu2d == doctest::Approx(b.mu2d).epsilon(1e-11).scale(1.0));
  CHECK(a.mu22 == doctest::Approx(b.mu22).epsilon(1e-11).scale(1.0));
  CHECK(a.mu12d == doctest::Approx(b.mu12d).epsilon(1e-11).scale(1.0));
  CHECK(a.has_mu3c == b.has_mu3c);
  if (a.has_mu3c)
    CHECK(a.mu3c == doctest::Approx(b.mu3c).epsilon(1e-10).scale(1.0));
}

Sample random_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(n);
  for (double& v : xs) v = rng.gamma(2.0, 1.0);
  return Sample::from_scalars(xs);
}

}  // namespace

TEST_CASE("estimated moments match the naive sums for a v-statistic") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const Sample s = random_sample(17, seed);
    const InfluenceModel m = vstat_model(s, lookup_kernel("gamma-kernel"));
    compare(estimate_moments(m, s), brute_force(m));
  }
}

TEST_CASE("estimated moments match the naive sums for a smooth model") {
  const Sample s = random_sample(14, 9);
  const InfluenceModel m = smooth_model(s, lookup_smooth("square"));
  compare(estimate_moments(m, s), brute_force(m));
}

TEST_CASE("third-order moment estimated when a nonzero IF3 is present") {
  const std::size_t n = 9;
  const Sample s = random_sample(n, 23);
  Rng rng(77);
  InfluenceModel m = InfluenceModel::make(n);
  m.psi_hat = 0.3;
  std::vector<double> raw1(n), raw2(n * n), raw3(n * n * n);
  for (double& v : raw1) v = rng.normal();
  for (double& v : raw2) v = rng.normal();
  for (double& v : raw3) v = rng.normal();
  m.if1 = canonicalize1(raw1);
  m.set_if2_dense(canonicalize2(raw2, n));
  auto c3 = canonicalize3(raw3, n);
  m.set_if3_fn([c3, n](std::size_t i, std::size_t j, std::size_t k) {
    return c3[(i * n + j) * n + k];
  });
  m.has_if3 = true;
  m.if3_zero = false;
  const MomentSet est = estimate_moments(m, s);
  compare(est, brute_force(m));
  CHECK(est.has_mu3c);
  CHECK(est.mu3c != 0.0);
}

TEST_CASE("degenerate variance is rejected") {
  const Sample s = Sample::from_scalars({2.0, 2.0, 2.0, 2.0, 2.0});
  const InfluenceModel m = smooth_model(s, lookup_smooth("identity"));
  CHECK_THROWS_AS(estimate_moments(m, s), DegenerateVariance);
}

TEST_CASE("moment flags per model family") {
  const Sample s = random_sample(10, 4);
  const MomentSet v =
      estimate_moments(vstat_model(s, lookup_kernel("gamma-kernel")), s);
  CHECK(v.has_mu3c);  // zero-valued but present
  CHECK(v.mu3c == 0.0);

  Rng rng(5);
  std::vector<double> rows(16 * 2);
  for (std::size_t i = 0; i < 16; ++i) {
    rows[2 * i + 1] = rng.chi2_2();
    rows[2 * i] = rows[2 * i + 1] + rng.normal();
  }
  const Sample reg(rows, 16, 2);
  CHECK_FALSE(estimate_moments(optim_model(reg, lookup_loss("lsq-loss")), reg)
                  .has_mu3c);
}
