#include "droci/moments.hpp"

#include <cmath>

#include "droci/errors.hpp"

namespace droci {

MomentSet estimate_moments(const InfluenceModel& model, const Sample& sample) {
  const std::size_t n = model.n();
  const auto& f1 = model.if1;
  MomentSet m;

  double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = f1[i];
    s2 += a * a;
    s3 += a * a * a;
    s4 += a * a * a * a;
  }
  m.kappa2 = s2 / n;
  m.gamma = s3 / n;
  m.mu4 = s4 / n;

  if (m.kappa2 < 1e-12 * sample.scale2())
    throw DegenerateVariance("influence variance is numerically zero");

  if (!model.if2_zero) {
    // v(j) = mean_i IF1(i) IF2(i,j) collapses every degree-2 moment except
    // mu22 into O(n) reductions.
    std::vector<double> v(n, 0.0);
    double s22 = 0.0, sd = 0.0, s1d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dii = model.if2(i, i);
      sd += dii;
      s1d += f1[i] * dii;
      for (std::size_t j = 0; j < n; ++j) {
        const double t = model.if2(i, j);
        v[j] += f1[i] * t;
        s22 += t * t;
      }
    }
    double sa = 0.0, sb = 0.0, sc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double vj = v[j] / n;
      sa += vj * vj;
      sb += vj * f1[j] * f1[j];
      sc += vj * f1[j];
    }
    m.mu2a = sa / n;
    m.mu2b = sb / n;
    m.mu2c = sc / n;
    m.mu2d = sd / n;
    m.mu22 = s22 / (double(n) * n);
    m.mu12d = s1d / n;
  }

  if (model.has_if3) {
    m.has_mu3c = true;
    if (!model.if3_zero) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k)
            s += f1[i] * f1[j] * f1[k] * model.if3(i, j, k);
      m.mu3c = s / (double(n) * n * n);
    }
  }

  return m;
}

}  // namespace droci
