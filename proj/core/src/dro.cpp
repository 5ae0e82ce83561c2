#include "droci/dro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "droci/errors.hpp"

namespace droci {

ExpansionCoefficients expansion_coefficients(const MomentSet& m,
                                             const DivergenceSpec& spec,
                                             bool strict) {
  if (m.kappa2 <= 0.0)
    throw DegenerateVariance("expansion requires positive influence variance");
  if (strict && !m.has_mu3c)
    throw MissingThirdOrderMoment(
        "model lacks a third influence function; third-order moment absent");

  const double d2 = spec.d2_at_1;
  const double d3 = spec.d3_at_1;
  const double d4 = spec.d4_at_1;
  const double k2 = m.kappa2;
  const double mu3c = m.has_mu3c ? m.mu3c : 0.0;

  ExpansionCoefficients c;
  c.c1 = std::sqrt(k2);
  c.c2 = (1.0 / k2) * (-d3 * m.gamma / (6.0 * d2) + m.mu2c / 2.0);
  const double bracket =
      mu3c / 6.0 - (d3 / (2.0 * d2)) * m.mu2b +
      (d3 / (3.0 * k2 * d2)) * m.gamma * m.mu2c +
      (d3 * d3 / (8.0 * d2 * d2) - d4 / (24.0 * d2)) * m.mu4 + m.mu2a / 2.0 -
      d3 * d3 * m.gamma * m.gamma / (18.0 * d2 * d2 * k2) -
      d3 * d3 * k2 * k2 / (8.0 * d2 * d2) -
      m.mu2c * m.mu2c / (2.0 * k2);
  c.c3 = std::pow(k2, -1.5) * bracket;
  return c;
}

double dro_value_expansion(Direction direction, double psi_hat,
                           const ExpansionCoefficients& coeffs,
                           const DivergenceSpec& spec, double q,
                           std::size_t n) {
  if (q == 0.0) return psi_hat;
  const double s = direction == Direction::Max ? 1.0 : -1.0;
  const double r = std::sqrt(q / (spec.d2_at_1 * double(n)));
  return psi_hat + s * r * coeffs.c1 + r * r * coeffs.c2 +
         s * r * r * r * coeffs.c3;
}

namespace {

// Gradient of the truncated objective in L, times n:
// D_i = IF1_i + (1/n) sum_j IF2_ij w_j + (1/(2n^2)) sum_jk IF3_ijk w_j w_k
// where w = L - 1.
void objective_gradient(const InfluenceModel& model,
                        const std::vector<double>& w, std::vector<double>& d) {
  const std::size_t n = model.n();
  d.assign(model.if1.begin(), model.if1.end());
  if (!model.if2_zero) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += model.if2(i, j) * w[j];
      d[i] += s / double(n);
    }
  }
  if (model.has_if3 && !model.if3_zero) {
    const double inv = 1.0 / (2.0 * double(n) * double(n));
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          s += model.if3(i, j, k) * w[j] * w[k];
      d[i] += s * inv;
    }
  }
}

double truncated_objective(const InfluenceModel& model,
                           const std::vector<double>& w) {
  const std::size_t n = model.n();
  double t1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) t1 += model.if1[i] * w[i];
  double obj = model.psi_hat + t1 / double(n);
  if (!model.if2_zero) {
    double t2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += model.if2(i, j) * w[j];
      t2 += w[i] * s;
    }
    obj += t2 / (2.0 * double(n) * double(n));
  }
  if (model.has_if3 && !model.if3_zero) {
    double t3 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          t3 += model.if3(i, j, k) * w[i] * w[j] * w[k];
    obj += t3 / (6.0 * double(n) * double(n) * double(n));
  }
  return obj;
}

// Componentwise box [box_lo, box_hi] containing every feasible L: the ball
// constraint mean phi(L) = q/(2n) forces phi(L_i) <= q/2 for each i.
struct LBox {
  double lo = 0.0;
  double hi = 0.0;
};

LBox feasible_box(const DivergenceSpec& spec, double q) {
  // Any feasible L has phi(L_i) <= q/2 per point; the box is inflated well
  // beyond that so it only guards transients, never the solution itself.
  const double target = 2.0 * q + 4.0;
  LBox box;
  {
    double lo = 1.0, hi = 2.0;
    int grow = 0;
    while (spec.eval(hi) < target && grow++ < 2000) hi *= 2.0;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      (spec.eval(mid) < target ? lo : hi) = mid;
    }
    box.hi = hi;
  }
  {
    const double floor = 1e-12;
    if (spec.eval(floor) <= target) {
      box.lo = floor;
    } else {
      double lo = floor, hi = 1.0;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (spec.eval(mid) > target ? lo : hi) = mid;
      }
      box.lo = lo;
    }
  }
  return box;
}

// Dense LU with partial pivoting; solves in place, returns false if singular.
// When detsign is given it receives the sign of the determinant, which flips
// exactly when the tracked solution branch passes a simple fold.
bool lu_solve(std::vector<double>& a, std::vector<double>& rhs, std::size_t n,
              int* detsign = nullptr) {
  int ds = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
    if (a[p * n + c] == 0.0) return false;
    if (a[p * n + c] < 0.0) ds = -ds;
    if (p != c) {
      ds = -ds;
      for (std::size_t k = 0; k < n; ++k) std::swap(a[p * n + k], a[c * n + k]);
      std::swap(rhs[p], rhs[c]);
    }
    const double inv = 1.0 / a[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] * inv;
      if (f == 0.0) continue;
      for (std::size_t k = c + 1; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t ri = n; ri-- > 0;) {
    double s = rhs[ri];
    for (std::size_t k = ri + 1; k < n; ++k) s -= a[ri * n + k] * rhs[k];
    rhs[ri] = s / a[ri * n + ri];
  }
  if (detsign) *detsign = ds;
  return true;
}

// phi'' by central differences, one-sided near zero.
double phi2_num(const DivergenceSpec& spec, double x) {
  const double eps = 1e-7 * (1.0 + std::abs(x));
  if (x - eps > 0.0)
    return (spec.deriv1(x + eps) - spec.deriv1(x - eps)) / (2.0 * eps);
  return (spec.deriv1(x + eps) - spec.deriv1(x)) / eps;
}

// Full KKT system in (L, nu, beta) with nu = 1/alpha_tilde:
//   D_i(L) - nu * phi'(L_i) - beta = 0
//   mean phi(L) - q/(2n) = 0
//   mean L - 1 = 0
struct KktState {
  std::vector<double> L;
  double nu = 0.0;
  double beta = 0.0;
};

struct KktOutcome {
  bool ok = false;
  double r_div = 0.0;
  double r_mean = 0.0;
  std::size_t iters = 0;
  // Sign of det(Jacobian) at the last factored iterate; 0 if never factored.
  // Constant along a solution branch between folds, so a flip relative to the
  // small-ball reference marks a point past a fold.
  int detsign = 0;
};

// warm = true marks a continuation stage started from the converged state at
// a nearby ball size. There the merit is already tiny (only the ball-size
// residual is nonzero) and a monotone line search would creep; the first
// capped full step is the standard tangent predictor and is taken as is, with
// the damped iterations afterwards acting as the corrector.
KktOutcome kkt_newton(const InfluenceModel& model, const DivergenceSpec& spec,
                      double q, double sign, const LBox& box, KktState& st,
                      bool warm = false) {
  const std::size_t n = model.n();
  const std::size_t dim = n + 2;
  const bool linear = model.if2_zero && (!model.has_if3 || model.if3_zero);
  KktOutcome out;

  std::vector<double> w(n), d(n), p1(n), f(dim);
  auto eval_f = [&](const KktState& s, std::vector<double>& fout) {
    for (std::size_t i = 0; i < n; ++i) w[i] = s.L[i] - 1.0;
    objective_gradient(model, w, d);
    double sp = 0.0, sl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p1[i] = spec.deriv1(s.L[i]);
      fout[i] = d[i] - s.nu * p1[i] - s.beta;
      sp += spec.eval(s.L[i]);
      sl += s.L[i];
    }
    fout[n] = sp / double(n) - q / (2.0 * double(n));
    fout[n + 1] = sl / double(n) - 1.0;
    double m = 0.0;
    for (double v : fout) m += v * v;
    return m;
  };

  double merit = eval_f(st, f);
  std::vector<double> jac(dim * dim), step(dim), ftrial(dim);
  KktState trial = st;
  // Jacobian at the current accepted state (w, p1 are kept in sync by
  // eval_f).
  auto build_jac = [&]() {
    jac.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!linear) {
        if (!model.if2_zero) {
          for (std::size_t j = 0; j < n; ++j)
            jac[i * dim + j] += model.if2(i, j) / double(n);
        }
        if (model.has_if3 && !model.if3_zero) {
          const double inv = 1.0 / (double(n) * double(n));
          for (std::size_t j = 0; j < n; ++j) {
            double s3 = 0.0;
            for (std::size_t k = 0; k < n; ++k)
              s3 += model.if3(i, j, k) * w[k];
            jac[i * dim + j] += s3 * inv;
          }
        }
      }
      jac[i * dim + i] -= st.nu * phi2_num(spec, st.L[i]);
      jac[i * dim + n] = -p1[i];
      jac[i * dim + n + 1] = -1.0;
      jac[n * dim + i] = p1[i] / double(n);
      jac[(n + 1) * dim + i] = 1.0 / double(n);
    }
  };

  for (std::size_t iter = 0; iter < 100; ++iter) {
    ++out.iters;
    out.r_div = f[n];
    out.r_mean = f[n + 1];
    double dscale = 1.0, fstat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dscale = std::max(dscale, std::abs(d[i]));
      fstat = std::max(fstat, std::abs(f[i]));
    }
    if (std::abs(f[n]) <= 1e-11 && std::abs(f[n + 1]) <= 1e-13 &&
        fstat <= 1e-9 * dscale) {
      // factor once more at the converged point so detsign reflects it
      build_jac();
      for (std::size_t k = 0; k < dim; ++k) step[k] = -f[k];
      lu_solve(jac, step, dim, &out.detsign);
      out.ok = true;
      return out;
    }

    build_jac();
    for (std::size_t k = 0; k < dim; ++k) step[k] = -f[k];
    if (!lu_solve(jac, step, dim, &out.detsign)) return out;

    // Shrink the step so L stays inside the safeguard box and nu keeps the
    // sign of its direction.
    double smax = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (step[i] > 0.0)
        smax = std::min(smax, 0.95 * (box.hi - st.L[i]) / step[i]);
      else if (step[i] < 0.0)
        smax = std::min(smax, 0.95 * (box.lo - st.L[i]) / step[i]);
    }
    const double nu_new_full = st.nu + step[n];
    if (sign * nu_new_full <= 0.0 && step[n] != 0.0)
      smax = std::min(smax, 0.9 * (sign * st.nu) / std::abs(step[n]));
    if (!(smax > 0.0)) return out;

    double scale = smax;
    bool accepted = false;
    const bool predictor = warm && iter == 0;
    for (int half = 0; half <= 40; ++half) {
      trial.L = st.L;
      for (std::size_t i = 0; i < n; ++i) trial.L[i] += scale * step[i];
      trial.nu = st.nu + scale * step[n];
      trial.beta = st.beta + scale * step[n + 1];
      const double mt = eval_f(trial, ftrial);
      if (mt < merit || (predictor && std::isfinite(mt))) {
        st = trial;
        f = ftrial;
        merit = mt;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) return out;
  }
  return out;
}

}  // namespace

LikelihoodRatioSolution solve_dro_exact(const InfluenceModel& model,
                                        const Sample& sample,
                                        const DivergenceSpec& spec, double q,
                                        Direction direction) {
  const std::size_t n = model.n();
  double kappa2 = 0.0;
  for (double v : model.if1) kappa2 += v * v;
  kappa2 /= double(n);
  if (kappa2 < 1e-12 * sample.scale2())
    throw DegenerateVariance("all first influence values coincide");

  const LBox box = feasible_box(spec, q);
  const double sign = direction == Direction::Max ? 1.0 : -1.0;

  // Continuation in the ball size from the near-linear small-q regime,
  // tracking the solution branch that emanates from L = 1. Initialization at
  // the leading-order multiplier (alpha ~ sqrt(q / (n h'(0) kappa2))).
  auto init_state = [&](double q0) {
    KktState st;
    const double at = sign * std::sqrt(q0 / (double(n) * spec.h_prime0() * kappa2));
    st.nu = 1.0 / at;
    st.beta = 0.0;
    st.L.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = at * model.if1[i];
      double li = spec.in_deriv1_range(t) ? 1.0 + spec.h(t)
                                          : (t > 0.0 ? box.hi : box.lo);
      st.L[i] = std::clamp(li, box.lo, box.hi);
    }
    return st;
  };

  std::size_t total_iters = 0;

  // The branch of stationary points that emanates from L = 1 deviates from
  // the first-order value psi_hat +/- sqrt(q kappa2 / (d2 n)) by higher-order
  // terms only; stationary points far outside that band belong to spurious
  // branches created by the objective truncation and must be rejected.
  const double lead = std::sqrt(q * kappa2 / (spec.d2_at_1 * double(n)));
  auto on_branch = [&](const KktState& s, double nu0) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = s.L[i] - 1.0;
    const double obj = truncated_objective(model, w);
    if (std::abs(obj - (model.psi_hat + sign * lead)) > 0.75 * lead)
      return false;
    // the multiplier on the true branch stays near its leading-order value;
    // disconnected stationary points carry multipliers of a different scale
    const double ratio = s.nu / nu0;
    return ratio > 1.0 / 3.0 && ratio < 3.0;
  };

  // Direct solve at the target ball size is trusted in two regimes only:
  // linear objectives (a strictly convex problem with a unique stationary
  // point per direction) and small balls, where the leading-order initializer
  // is accurate and truncation-induced extra branches are far away. Nonlinear
  // models at larger balls can carry disconnected or folded-back stationary
  // points, so they always go through continuation, which tracks the branch
  // emanating from L = 1.
  const bool fold_free = model.if2_zero && (!model.has_if3 || model.if3_zero);
  bool done = false;
  KktState st, good;
  KktOutcome oc;
  if (fold_free || q <= 0.25) {
    st = init_state(q);
    const double nu0 = st.nu;
    oc = kkt_newton(model, spec, q, sign, box, st);
    total_iters += oc.iters;
    done = oc.ok && on_branch(st, nu0);
    good = st;
  }

  if (!done) {
    // Continuation in the ball size from the near-linear small-q regime.
    double q_start = std::min(q, 0.25);
    st = init_state(q_start);
    oc = kkt_newton(model, spec, q_start, sign, box, st);
    total_iters += oc.iters;
    for (int k = 0; !oc.ok && k < 20; ++k) {
      q_start *= 0.25;
      st = init_state(q_start);
      oc = kkt_newton(model, spec, q_start, sign, box, st);
      total_iters += oc.iters;
    }
    if (!oc.ok)
      throw NoConvergence("stationarity system unsolvable at any ball size");

    double cur_q = q_start;
    good = st;
    // Reference orientation of the branch: the determinant sign of the KKT
    // Jacobian is constant along the branch between folds.
    const int ref_detsign = oc.detsign;
    double factor = 4.0;
    std::size_t stages = 0;
    while (cur_q < q) {
      if (++stages > 500)
        throw NoConvergence(
            "ball-size continuation failed to reach the target");
      const double next_q = std::min(q, cur_q * factor);
      st = good;
      oc = kkt_newton(model, spec, next_q, sign, box, st, /*warm=*/true);
      total_iters += oc.iters;
      // A converged step that teleports the multiplier, or lands where the
      // Jacobian determinant has flipped sign, has left the branch (jumped to
      // a disconnected stationary set or slid past a fold onto its far side).
      // Treat it like a failed step so the ball-size increment shrinks and a
      // genuine fold surfaces as infeasibility.
      if (oc.ok) {
        const double ratio = st.nu / good.nu;
        if (!(ratio > 0.2 && ratio < 5.0)) oc.ok = false;
        if (oc.detsign != 0 && ref_detsign != 0 && oc.detsign != ref_detsign)
          oc.ok = false;
      }
      if (oc.ok) {
        cur_q = next_q;
        good = st;
        factor = std::min(4.0, factor * 1.5);
      } else {
        factor = 1.0 + (factor - 1.0) * 0.5;
        if (factor - 1.0 < 1e-6)
          throw InfeasibleBall(
              "the stationary branch through the empirical distribution "
              "turns around before the requested ball size");
      }
    }
  }

  st = good;
  LikelihoodRatioSolution sol;
  sol.L = st.L;
  sol.alpha_tilde = 1.0 / st.nu;
  sol.beta = st.beta;
  std::vector<double> w(n);
  double sp = 0.0, sl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = st.L[i] - 1.0;
    sp += spec.eval(st.L[i]);
    sl += st.L[i];
  }
  sol.objective = truncated_objective(model, w);
  sol.residual_divergence = std::abs(sp / double(n) - q / (2.0 * double(n)));
  sol.residual_mean = std::abs(sl / double(n) - 1.0);
  sol.iterations = total_iters;
  return sol;
}

double el_profile(const InfluenceModel& model, const Sample& sample,
                  const DivergenceSpec& spec, double psi_target,
                  double q_cap) {
  const std::size_t n = model.n();
  if (psi_target == model.psi_hat) return 0.0;
  const Direction dir =
      psi_target > model.psi_hat ? Direction::Max : Direction::Min;
  auto reach = [&](double q) {
    const double v = solve_dro_exact(model, sample, spec, q, dir).objective;
    return dir == Direction::Max ? v >= psi_target : v <= psi_target;
  };
  if (!reach(q_cap))
    throw TargetUnreachable("target outside the value range at the q cap");
  double lo = 0.0, hi = q_cap;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (reach(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi / (2.0 * double(n));
}

}  // namespace droci
