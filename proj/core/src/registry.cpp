#include "droci/registry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "droci/errors.hpp"

namespace droci {

namespace {

std::map<std::string, SmoothFunction> build_smooth() {
  std::map<std::string, SmoothFunction> m;

  SmoothFunction identity;
  identity.name = "identity";
  identity.dim = 1;
  identity.value = [](const std::vector<double>& z) { return z[0]; };
  identity.grad = [](const std::vector<double>&) {
    return std::vector<double>{1.0};
  };
  identity.hess = [](const std::vector<double>&) {
    return std::vector<double>{0.0};
  };
  identity.third = [](const std::vector<double>&) {
    return std::vector<double>{0.0};
  };
  identity.has_third = true;
  m[identity.name] = identity;

  SmoothFunction square;
  square.name = "square";
  square.dim = 1;
  square.value = [](const std::vector<double>& z) { return z[0] * z[0]; };
  square.grad = [](const std::vector<double>& z) {
    return std::vector<double>{2.0 * z[0]};
  };
  square.hess = [](const std::vector<double>&) {
    return std::vector<double>{2.0};
  };
  square.third = [](const std::vector<double>&) {
    return std::vector<double>{0.0};
  };
  square.has_third = true;
  m[square.name] = square;

  SmoothFunction xy2;
  xy2.name = "x+y^2";
  xy2.dim = 2;
  xy2.value = [](const std::vector<double>& z) { return z[0] + z[1] * z[1]; };
  xy2.grad = [](const std::vector<double>& z) {
    return std::vector<double>{1.0, 2.0 * z[1]};
  };
  xy2.hess = [](const std::vector<double>&) {
    return std::vector<double>{0.0, 0.0, 0.0, 2.0};
  };
  xy2.third = [](const std::vector<double>&) {
    return std::vector<double>(8, 0.0);
  };
  xy2.has_third = true;
  m[xy2.name] = xy2;

  return m;
}

std::map<std::string, Kernel> build_kernels() {
  std::map<std::string, Kernel> m;
  m["gamma-kernel"] = Kernel{"gamma-kernel", [](double x, double y) {
                               return std::min(12.0,
                                               (x - y) * (x - y) + x + y);
                             }};
  m["sin-kernel"] = Kernel{"sin-kernel", [](double x, double y) {
                             return std::sin(x * x + y);
                           }};
  return m;
}

std::map<std::string, Loss> build_losses() {
  std::map<std::string, Loss> m;
  Loss lsq;
  lsq.name = "lsq-loss";
  lsq.dim = 2;  // xi = (y, z)
  lsq.loss = [](double x, const double* xi) {
    double r = xi[0] - x * xi[1];
    return r * r;
  };
  lsq.loss_x = [](double x, const double* xi) {
    return -2.0 * xi[1] * (xi[0] - x * xi[1]);
  };
  lsq.loss_xx = [](double, const double* xi) { return 2.0 * xi[1] * xi[1]; };
  m[lsq.name] = lsq;
  return m;
}

}  // namespace

const SmoothFunction& lookup_smooth(const std::string& name) {
  static const auto reg = build_smooth();
  auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown smooth function: " + name);
  return it->second;
}

const Kernel& lookup_kernel(const std::string& name) {
  static const auto reg = build_kernels();
  auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown kernel: " + name);
  return it->second;
}

const Loss& lookup_loss(const std::string& name) {
  static const auto reg = build_losses();
  auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown loss: " + name);
  return it->second;
}

}  // namespace droci
