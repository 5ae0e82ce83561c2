#include "droci/correction.hpp"

#include <cmath>

#include "droci/errors.hpp"

namespace droci {

// Wichura's PPND16 algorithm (AS 241).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("normal quantile requires p in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                    r + 2.41780725177450611770e-1) * r +
                1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) *
               r + 5.76949722146069140550e+0) * r + 4.63033784615654529590e+0) *
               r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                    r + 1.51986665636164571966e-2) * r +
                1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) *
               r + 1.67638483018380384940e+0) * r + 2.05319162663775882187e+0) *
               r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                    r + 1.24266094738807843860e-3) * r +
                2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) *
               r + 1.78482653991729133580e+0) * r + 5.46378491116411436990e+0) *
               r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                    r + 1.84631831751005468180e-5) * r +
                7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) *
               r + 1.36929880922735805310e-1) * r + 5.99832206555887937690e-1) *
               r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double chi2_quantile_1df(double nominal) {
  if (!(nominal > 0.0 && nominal < 1.0))
    throw DomainError("nominal level must lie strictly between 0 and 1");
  const double z = normal_quantile((1.0 + nominal) / 2.0);
  return z * z;
}

double q_exact(double nominal, const DivergenceSpec& spec) {
  return spec.d2_at_1 * chi2_quantile_1df(nominal);
}

ACoefficients a_coeffs(const DivergenceSpec& spec, const BartlettMoments& m) {
  const double d2 = spec.d2_at_1, d3 = spec.d3_at_1, d4 = spec.d4_at_1;
  const double k2 = m.kappa2, g = m.gamma;
  const double k3 = k2 * k2 * k2;
  const double s = 2.0 * d2 + d3;

  ACoefficients c;
  c.cx5 = -(s * s * g * g) / (36.0 * d2 * d2 * k3);
  c.cx3 = -(1.0 / (36.0 * d2 * d2 * k3)) *
          (4.0 * (d2 + d3) * s * g * g +
           3.0 * (-2.0 * d2 * d2 - 4.0 * d2 * d3 - 3.0 * d3 * d3 + d2 * d4) *
               k2 * m.mu4 +
           9.0 * s * s * k3 + 6.0 * d2 * s * g * m.mu2c -
           6.0 * d2 * s * g * k2 * m.mu2d);
  c.cx = -(1.0 / (36.0 * k3)) *
         (-12.0 * g * g + 18.0 * k2 * m.mu4 +
          36.0 * k2 * (m.mu2a + 2.0 * m.mu2b) - 36.0 * g * m.mu2c -
          9.0 * m.mu2c * m.mu2c - 18.0 * k2 * m.mu2c * m.mu2d +
          9.0 * k2 * k2 *
              (-2.0 * m.mu22 + m.mu2d * m.mu2d - 4.0 * m.mu12d));
  return c;
}

double a_eval(double x, const DivergenceSpec& spec, const BartlettMoments& m) {
  const ACoefficients c = a_coeffs(spec, m);
  const double x2 = x * x;
  return x * (c.cx + x2 * (c.cx3 + x2 * c.cx5));
}

CorrectedQ corrected_q(double nominal, const DivergenceSpec& spec,
                       const BartlettMoments& m, std::size_t n) {
  const double q0 = q_exact(nominal, spec);
  const double x = std::sqrt(chi2_quantile_1df(nominal));
  const double q = q0 * (1.0 - a_eval(x, spec, m) / (x * double(n)));
  CorrectedQ out;
  if (q <= 0.0) {
    out.q = 0.1 * q0;
    out.clamped = true;
  } else {
    out.q = q;
  }
  return out;
}

StandardizedSmooth standardize_smooth(const SmoothFunction& f,
                                      const Sample& sample) {
  const std::size_t n = sample.n();
  const std::size_t d = sample.d();
  if (d != f.dim) throw ConfigError("data dimension does not match function");

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += sample.at(i, j);
  for (double& v : mean) v /= double(n);

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k)
        cov[j * d + k] +=
            (sample.at(i, j) - mean[j]) * (sample.at(i, k) - mean[k]);
  for (double& v : cov) v /= double(n);

  // Lower Cholesky factor of the covariance; whitened coordinates are
  // u = Lower^{-1} (x - mean).
  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) trace += cov[j * d + j];
  std::vector<double> lo(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      double s = cov[j * d + k];
      for (std::size_t p = 0; p < k; ++p) s -= lo[j * d + p] * lo[k * d + p];
      if (j == k) {
        if (s <= 1e-10 * trace)
          throw SingularWhitening("covariance is numerically rank-deficient");
        lo[j * d + j] = std::sqrt(s);
      } else {
        lo[j * d + k] = s / lo[k * d + k];
      }
    }
  }

  StandardizedSmooth out;
  out.dim = d;
  const std::vector<double> grad = f.grad(mean);
  const std::vector<double> hess = f.hess(mean);
  // Gradient/Hessian in whitened coordinates: Lower^T g and Lower^T H Lower.
  out.theta.assign(d, 0.0);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) out.theta[a] += lo[b * d + a] * grad[b];
  out.theta2.assign(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      double s = 0.0;
      for (std::size_t p = 0; p < d; ++p)
        for (std::size_t r = 0; r < d; ++r)
          s += lo[p * d + a] * hess[p * d + r] * lo[r * d + b];
      out.theta2[a * d + b] = s;
    }

  // Whitened rows, then raw empirical third/fourth central moments.
  std::vector<double> u(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = sample.at(i, j) - mean[j];
      for (std::size_t p = 0; p < j; ++p) s -= lo[j * d + p] * u[i * d + p];
      u[i * d + j] = s / lo[j * d + j];
    }
  }
  out.alpha3.assign(d * d * d, 0.0);
  out.alpha4.assign(d * d * d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ui = &u[i * d];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        for (std::size_t c = 0; c < d; ++c) {
          out.alpha3[(a * d + b) * d + c] += ui[a] * ui[b] * ui[c];
          for (std::size_t e = 0; e < d; ++e)
            out.alpha4[((a * d + b) * d + c) * d + e] +=
                ui[a] * ui[b] * ui[c] * ui[e];
        }
  }
  for (double& v : out.alpha3) v /= double(n);
  for (double& v : out.alpha4) v /= double(n);
  return out;
}

TFactors t_factors(const StandardizedSmooth& s, bool prior_sign) {
  const std::size_t d = s.dim;
  double q_denom = 0.0;
  for (double v : s.theta) q_denom += v * v;
  if (q_denom <= 0.0)
    throw DegenerateVariance("gradient vanishes at the standardized mean");
  const double Q = 1.0 / q_denom;

  auto M = [&](std::size_t i, std::size_t j) {
    return Q * s.theta[i] * s.theta[j];
  };
  auto dM = [&](std::size_t i, std::size_t j) {
    return (i == j ? 1.0 : 0.0) - M(i, j);
  };
  auto a3 = [&](std::size_t i, std::size_t j, std::size_t k) {
    return s.alpha3[(i * d + j) * d + k];
  };
  auto a4 = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return s.alpha4[((i * d + j) * d + k) * d + l];
  };

  TFactors t;
  // The rank-one structure of M collapses the six-index contractions:
  // t1 = t2 = Q^3 (sum a3 theta theta theta)^2.
  double g3 = 0.0;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l)
        g3 += a3(j, k, l) * s.theta[j] * s.theta[k] * s.theta[l];
  t.t1 = Q * Q * Q * g3 * g3;
  t.t2 = t.t1;

  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l)
        for (std::size_t m = 0; m < d; ++m)
          t.t3 += a4(j, k, l, m) * M(j, k) * M(l, m);

  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l)
        for (std::size_t m = 0; m < d; ++m)
          for (std::size_t nn = 0; nn < d; ++nn)
            t.t4 += a3(j, k, l) * Q * s.theta[j] * s.theta2[m * d + nn] *
                    dM(m, k) * dM(nn, l);

  const double cross = prior_sign ? 2.0 : -2.0;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l)
        for (std::size_t m = 0; m < d; ++m)
          t.t5 += Q * s.theta2[j * d + k] * s.theta2[l * d + m] *
                  (dM(j, k) * dM(l, m) + cross * dM(j, l) * dM(k, m));

  t.factor = (5.0 / 3.0) * t.t1 - 2.0 * t.t2 + 0.5 * t.t3 - t.t4 + 0.25 * t.t5;
  return t;
}

std::string rule_kind_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::Exact: return "exact";
    case RuleKind::BartlettEstimated: return "bartlett-estimated";
    case RuleKind::BartlettTheoretical: return "bartlett-theoretical";
    case RuleKind::BartlettDicc: return "bartlett-dicc";
  }
  return "?";
}

RuleKind parse_rule_kind(const std::string& name) {
  if (name == "el" || name == "exact") return RuleKind::Exact;
  if (name == "eb" || name == "bartlett-estimated")
    return RuleKind::BartlettEstimated;
  if (name == "tb" || name == "bartlett-theoretical")
    return RuleKind::BartlettTheoretical;
  if (name == "tb2" || name == "bartlett-dicc") return RuleKind::BartlettDicc;
  throw ConfigError("unknown method: " + name);
}

QSelection select_q(const BallSizeRule& rule, const DivergenceSpec& spec,
                    const MomentSet& sample_moments, std::size_t n) {
  if (!(rule.nominal > 0.0 && rule.nominal < 1.0))
    throw ConfigError("nominal level must lie strictly between 0 and 1");
  QSelection out;
  switch (rule.kind) {
    case RuleKind::Exact:
      out.q = q_exact(rule.nominal, spec);
      out.provenance = "chi-square calibration, no correction";
      return out;
    case RuleKind::BartlettEstimated: {
      const CorrectedQ c =
          corrected_q(rule.nominal, spec, sample_moments, n);
      out.q = c.q;
      out.clamped = c.clamped;
      out.provenance = "correction from sample moments";
      return out;
    }
    case RuleKind::BartlettTheoretical: {
      if (!rule.oracle_moments)
        throw ConfigError("bartlett-theoretical requires oracle moments");
      const CorrectedQ c =
          corrected_q(rule.nominal, spec, *rule.oracle_moments, n);
      out.q = c.q;
      out.clamped = c.clamped;
      out.provenance = "correction from oracle moments";
      return out;
    }
    case RuleKind::BartlettDicc: {
      if (!rule.oracle_smooth)
        throw ConfigError(
            "bartlett-dicc requires a standardized smooth instance");
      const TFactors t = t_factors(*rule.oracle_smooth, /*prior_sign=*/true);
      const double q0 = q_exact(rule.nominal, spec);
      const double q = q0 * (1.0 + t.factor / double(n));
      if (q <= 0.0) {
        out.q = 0.1 * q0;
        out.clamped = true;
      } else {
        out.q = q;
      }
      out.provenance = "prior-literature t5 sign, oracle smooth moments";
      return out;
    }
  }
  throw ConfigError("unknown ball-size rule");
}

CIResult confidence_interval(const InfluenceModel& model, const Sample& sample,
                             const DivergenceSpec& spec,
                             const BallSizeRule& rule, SolverChoice solver) {
  const MomentSet moments = estimate_moments(model, sample);
  const QSelection sel = select_q(rule, spec, moments, model.n());

  CIResult out;
  out.q_used = sel.q;
  out.method = rule_kind_name(rule.kind);
  if (sel.clamped)
    out.warnings.push_back(
        "correction drove the ball size nonpositive; clamped at 10% of the "
        "uncorrected value");

  if (solver == SolverChoice::Exact) {
    out.solver = "exact";
    out.lower =
        solve_dro_exact(model, sample, spec, sel.q, Direction::Min).objective;
    out.upper =
        solve_dro_exact(model, sample, spec, sel.q, Direction::Max).objective;
  } else {
    out.solver = "expansion";
    const ExpansionCoefficients c = expansion_coefficients(moments, spec);
    out.lower = dro_value_expansion(Direction::Min, model.psi_hat, c, spec,
                                    sel.q, model.n());
    out.upper = dro_value_expansion(Direction::Max, model.psi_hat, c, spec,
                                    sel.q, model.n());
  }
  if (out.lower > out.upper) std::swap(out.lower, out.upper);
  return out;
}

}  // namespace droci
