#include "droci/influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "droci/errors.hpp"

namespace droci {

InfluenceModel InfluenceModel::make(std::size_t n) {
  InfluenceModel m;
  m.n_ = n;
  m.if1.assign(n, 0.0);
  m.if3f_ = [](std::size_t, std::size_t, std::size_t) { return 0.0; };
  return m;
}

void InfluenceModel::set_if2_dense(std::vector<double> m) {
  if2m_ = std::move(m);
  if2f_ = nullptr;
}

void InfluenceModel::set_if2_fn(
    std::function<double(std::size_t, std::size_t)> f) {
  if2f_ = std::move(f);
  if2m_.clear();
}

void InfluenceModel::set_if3_fn(
    std::function<double(std::size_t, std::size_t, std::size_t)> f) {
  if3f_ = std::move(f);
}

std::vector<double> InfluenceModel::if2_dense_copy() const {
  if (!if2m_.empty()) return if2m_;
  std::vector<double> m(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m[i * n_ + j] = if2f_(i, j);
  return m;
}

InfluenceModel smooth_model(const Sample& sample, const SmoothFunction& f) {
  const std::size_t n = sample.n();
  const std::size_t d = sample.d();
  if (d != f.dim)
    throw ConfigError("smooth function dimension does not match data");

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a) mean[a] += sample.at(i, a);
  for (double& v : mean) v /= static_cast<double>(n);

  const std::vector<double> g = f.grad(mean);
  const std::vector<double> H = f.hess(mean);
  std::vector<double> T;
  if (f.has_third) T = f.third(mean);

  // Centered observations, row-major.
  std::vector<double> c(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      c[i * d + a] = sample.at(i, a) - mean[a];

  InfluenceModel m = InfluenceModel::make(n);
  m.psi_hat = f.value(mean);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a) s += g[a] * c[i * d + a];
    m.if1[i] = s;
  }

  bool hess_zero = std::all_of(H.begin(), H.end(),
                               [](double v) { return v == 0.0; });
  m.if2_zero = hess_zero;
  if (hess_zero && n <= kDenseIf2Limit) {
    m.set_if2_dense(std::vector<double>(n * n, 0.0));
  } else if (n <= kDenseIf2Limit) {
    std::vector<double> if2m(n * n);
    // Hc per observation, then IF2(i, j) = c_i^T H c_j.
    std::vector<double> hc(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
          hc[i * d + a] += H[a * d + b] * c[i * d + b];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < d; ++a) s += c[i * d + a] * hc[j * d + a];
        if2m[i * n + j] = s;
      }
    m.set_if2_dense(std::move(if2m));
  } else {
    auto cs = std::make_shared<std::vector<double>>(c);
    auto Hs = std::make_shared<std::vector<double>>(H);
    m.set_if2_fn([cs, Hs, d](std::size_t i, std::size_t j) {
      double s = 0.0;
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
          s += (*cs)[i * d + a] * (*Hs)[a * d + b] * (*cs)[j * d + b];
      return s;
    });
  }

  if (f.has_third) {
    m.has_if3 = true;
    bool third_zero = std::all_of(T.begin(), T.end(),
                                  [](double v) { return v == 0.0; });
    m.if3_zero = third_zero;
    if (!third_zero) {
      auto cs = std::make_shared<std::vector<double>>(c);
      auto Ts = std::make_shared<std::vector<double>>(T);
      m.set_if3_fn([cs, Ts, d](std::size_t i, std::size_t j, std::size_t k) {
        double s = 0.0;
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b)
            for (std::size_t e = 0; e < d; ++e)
              s += (*Ts)[(a * d + b) * d + e] * (*cs)[i * d + a] *
                   (*cs)[j * d + b] * (*cs)[k * d + e];
        return s;
      });
    }
  }
  return m;
}

InfluenceModel vstat_model(const Sample& sample, const Kernel& kernel) {
  const std::size_t n = sample.n();
  if (sample.d() != 1)
    throw ConfigError("V-statistic kernels take scalar observations");

  auto hsym = [&kernel](double x, double y) {
    return 0.5 * (kernel.h(x, y) + kernel.h(y, x));
  };

  // g(x_i) = mean_j h(x_i, x_j); psi_hat = mean_i g(x_i).
  std::vector<double> g(n, 0.0);
  double psi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      s += hsym(sample.at(i, 0), sample.at(j, 0));
    g[i] = s / static_cast<double>(n);
    psi += g[i];
  }
  psi /= static_cast<double>(n);

  InfluenceModel m = InfluenceModel::make(n);
  m.psi_hat = psi;
  // Raw IF1 = 2 g; canonical IF1 = 2 (g - psi_hat).
  for (std::size_t i = 0; i < n; ++i) m.if1[i] = 2.0 * (g[i] - psi);

  // Raw IF2 = 2 h; canonical IF2 = 2 (h - g_i - g_j + psi_hat).
  if (n <= kDenseIf2Limit) {
    std::vector<double> if2m(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if2m[i * n + j] =
            2.0 * (hsym(sample.at(i, 0), sample.at(j, 0)) - g[i] - g[j] + psi);
    m.set_if2_dense(std::move(if2m));
  } else {
    auto xs = std::make_shared<std::vector<double>>(sample.data());
    auto gs = std::make_shared<std::vector<double>>(g);
    auto h = kernel.h;
    m.set_if2_fn([xs, gs, h, psi](std::size_t i, std::size_t j) {
      double hv = 0.5 * (h((*xs)[i], (*xs)[j]) + h((*xs)[j], (*xs)[i]));
      return 2.0 * (hv - (*gs)[i] - (*gs)[j] + psi);
    });
  }

  m.has_if3 = true;  // degree-2 kernel: third-order term is identically zero
  m.if3_zero = true;
  return m;
}

double optim_minimizer(const Sample& sample, const Loss& loss) {
  const std::size_t n = sample.n();
  auto mean_loss_x = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += loss.loss_x(x, sample.row(i));
    return s / static_cast<double>(n);
  };
  auto mean_loss_xx = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += loss.loss_xx(x, sample.row(i));
    return s / static_cast<double>(n);
  };
  auto mean_loss = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += loss.loss(x, sample.row(i));
    return s / static_cast<double>(n);
  };

  // Start at the sample point with the smallest empirical loss when used as
  // the decision variable, then bracket a root of the gradient by doubling.
  double x0 = 0.0;
  double best = mean_loss(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double cand = sample.at(i, 0);
    double v = mean_loss(cand);
    if (v < best) {
      best = v;
      x0 = cand;
    }
  }

  double g0 = mean_loss_x(x0);
  double lo = x0, hi = x0, glo = g0, ghi = g0;
  double step = 1.0;
  for (int it = 0; it < 200 && glo * ghi > 0.0; ++it) {
    lo = x0 - step;
    hi = x0 + step;
    glo = mean_loss_x(lo);
    ghi = mean_loss_x(hi);
    if (glo <= 0.0 && ghi >= 0.0) break;
    step *= 2.0;
  }
  if (!(glo <= 0.0 && ghi >= 0.0))
    throw MinimizerNotFound("could not bracket the first-order condition");

  double x = x0;
  double g = mean_loss_x(x);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(g) <= 1e-11) return x;
    double h = mean_loss_xx(x);
    double xn = (h > 1e-14) ? x - g / h : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    double gn = mean_loss_x(xn);
    if (gn > 0.0) {
      hi = xn;
    } else {
      lo = xn;
    }
    x = xn;
    g = gn;
  }
  if (std::abs(g) <= 1e-11) return x;
  throw MinimizerNotFound("Newton/bisection failed to reach |grad| <= 1e-11");
}

InfluenceModel optim_model(const Sample& sample, const Loss& loss) {
  const std::size_t n = sample.n();
  if (sample.d() != loss.dim)
    throw ConfigError("loss dimension does not match data");

  const double xstar = optim_minimizer(sample, loss);

  double mean_l = 0.0, mean_lxx = 0.0;
  std::vector<double> lx(n);
  for (std::size_t i = 0; i < n; ++i) {
    mean_l += loss.loss(xstar, sample.row(i));
    mean_lxx += loss.loss_xx(xstar, sample.row(i));
    lx[i] = loss.loss_x(xstar, sample.row(i));
  }
  mean_l /= static_cast<double>(n);
  mean_lxx /= static_cast<double>(n);
  if (mean_lxx <= 1e-10)
    throw SingularHessian("mean l_xx at the minimizer is not positive");

  InfluenceModel m = InfluenceModel::make(n);
  m.psi_hat = mean_l;
  for (std::size_t i = 0; i < n; ++i)
    m.if1[i] = loss.loss(xstar, sample.row(i)) - mean_l;

  // IF2(i, j) = -2 lx_i lx_j / mean_lxx = -s_i s_j.
  std::vector<double> s(n);
  double scale = std::sqrt(2.0 / mean_lxx);
  for (std::size_t i = 0; i < n; ++i) s[i] = lx[i] * scale;
  if (n <= kDenseIf2Limit) {
    std::vector<double> if2m(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) if2m[i * n + j] = -s[i] * s[j];
    m.set_if2_dense(std::move(if2m));
  } else {
    auto ss = std::make_shared<std::vector<double>>(s);
    m.set_if2_fn([ss](std::size_t i, std::size_t j) {
      return -(*ss)[i] * (*ss)[j];
    });
  }
  m.has_if3 = false;
  m.if3_zero = true;
  return m;
}

std::vector<double> canonicalize1(const std::vector<double>& raw) {
  double mean = 0.0;
  for (double v : raw) mean += v;
  mean /= static_cast<double>(raw.size());
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] - mean;
  return out;
}

std::vector<double> canonicalize2(const std::vector<double>& raw,
                                  std::size_t n) {
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      s[i * n + j] = 0.5 * (raw[i * n + j] + raw[j * n + i]);

  std::vector<double> rowm(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rowm[i] += s[i * n + j];
    rowm[i] /= static_cast<double>(n);
    total += rowm[i];
  }
  total /= static_cast<double>(n);

  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] = s[i * n + j] - rowm[i] - rowm[j] + total;
  return out;
}

std::vector<double> canonicalize3(const std::vector<double>& raw,
                                  std::size_t n) {
  auto idx = [n](std::size_t i, std::size_t j, std::size_t k) {
    return (i * n + j) * n + k;
  };
  // Symmetrize over the 6 slot permutations.
  std::vector<double> s(n * n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        s[idx(i, j, k)] =
            (raw[idx(i, j, k)] + raw[idx(i, k, j)] + raw[idx(j, i, k)] +
             raw[idx(j, k, i)] + raw[idx(k, i, j)] + raw[idx(k, j, i)]) /
            6.0;

  // Apply the product projection (1 - E) in each slot by inclusion-exclusion.
  const double dn = static_cast<double>(n);
  std::vector<double> m1(n * n, 0.0);  // mean over the last slot
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += s[idx(i, j, k)];
      m1[i * n + j] = acc / dn;
    }
  std::vector<double> m2(n, 0.0);  // mean over the last two slots
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += m1[i * n + j];
    m2[i] = acc / dn;
  }
  double m3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) m3 += m2[i];
  m3 /= dn;

  std::vector<double> out(n * n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        out[idx(i, j, k)] = s[idx(i, j, k)] - m1[i * n + j] - m1[i * n + k] -
                            m1[j * n + k] + m2[i] + m2[j] + m2[k] - m3;
  return out;
}

}  // namespace droci
