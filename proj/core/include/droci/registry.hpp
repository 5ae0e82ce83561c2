#pragma once

#include <functional>
#include <string>
#include <vector>

namespace droci {

// A smooth function of a mean vector, with partial derivatives up to order 3
// at an arbitrary point. Index convention: grad[a], hess[a*dim+b],
// third[(a*dim+b)*dim+c].
struct SmoothFunction {
  std::string name;
  std::size_t dim = 1;
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> grad;
  std::function<std::vector<double>(const std::vector<double>&)> hess;
  std::function<std::vector<double>(const std::vector<double>&)> third;  // optional
  bool has_third = false;
};

// Symmetric degree-2 V-statistic kernel on scalar observations.
struct Kernel {
  std::string name;
  std::function<double(double, double)> h;
};

// Loss l(x, xi) with scalar decision variable x; xi is an observation row.
struct Loss {
  std::string name;
  std::size_t dim = 1;  // dimension of xi
  std::function<double(double, const double*)> loss;
  std::function<double(double, const double*)> loss_x;
  std::function<double(double, const double*)> loss_xx;
};

// Compile-time registries keyed by name. Smooth: identity, square, x+y^2.
// Kernels: gamma-kernel, sin-kernel. Losses: lsq-loss.
const SmoothFunction& lookup_smooth(const std::string& name);
const Kernel& lookup_kernel(const std::string& name);
const Loss& lookup_loss(const std::string& name);

}  // namespace droci
