#pragma once

#include <functional>
#include <vector>

#include "droci/registry.hpp"
#include "droci/sample.hpp"

namespace droci {

// A statistical functional presented through its plug-in value and canonical
// influence functions at the empirical measure. IF1 is stored densely; IF2 is
// a dense matrix for small n and a callback otherwise; IF3 is a callback used
// only when present and not identically zero.
class InfluenceModel {
 public:
  double psi_hat = 0.0;
  std::vector<double> if1;  // length n

  double if2(std::size_t i, std::size_t j) const {
    return if2m_.empty() ? if2f_(i, j) : if2m_[i * n_ + j];
  }
  double if3(std::size_t i, std::size_t j, std::size_t k) const {
    return if3f_(i, j, k);
  }

  bool has_if3 = false;
  // True when IF2 (resp. IF3) vanishes identically; lets moment estimation
  // and the solver skip the corresponding sums.
  bool if2_zero = false;
  bool if3_zero = true;

  std::size_t n() const { return n_; }
  bool if2_dense() const { return !if2m_.empty(); }
  const std::vector<double>& if2_matrix() const { return if2m_; }

  // Construction helpers (used by the model builders below and by tests).
  static InfluenceModel make(std::size_t n);
  void set_if2_dense(std::vector<double> m);
  void set_if2_fn(std::function<double(std::size_t, std::size_t)> f);
  void set_if3_fn(std::function<double(std::size_t, std::size_t, std::size_t)> f);

  // Dense n x n IF2 matrix regardless of storage.
  std::vector<double> if2_dense_copy() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> if2m_;
  std::function<double(std::size_t, std::size_t)> if2f_;
  std::function<double(std::size_t, std::size_t, std::size_t)> if3f_;
};

// IF2 matrices are materialized up to this n; beyond it the callback form is
// kept (the 5,000-point oracle samples only feed moment estimation).
inline constexpr std::size_t kDenseIf2Limit = 2048;

// Smooth-function model psi(P) = f(E_P Z): influence functions are the
// centered derivative products of f at the sample mean.
InfluenceModel smooth_model(const Sample& sample, const SmoothFunction& f);

// Degree-2 V-statistic psi(P) = E h(X, Y): conditional means of the kernel,
// canonicalized to zero marginals. IF3 of a degree-2 kernel vanishes.
InfluenceModel vstat_model(const Sample& sample, const Kernel& kernel);

// Stochastic optimization psi(P) = inf_x E_P l(x, xi) with scalar x.
InfluenceModel optim_model(const Sample& sample, const Loss& loss);

// Solves the empirical first-order condition mean l_x(x, .) = 0 by Newton
// with a bisection safeguard. Exposed for tests.
double optim_minimizer(const Sample& sample, const Loss& loss);

// Canonical projections: symmetrize, then subtract empirical marginal means
// in every slot.
std::vector<double> canonicalize1(const std::vector<double>& raw);
std::vector<double> canonicalize2(const std::vector<double>& raw, std::size_t n);
std::vector<double> canonicalize3(const std::vector<double>& raw, std::size_t n);

}  // namespace droci
