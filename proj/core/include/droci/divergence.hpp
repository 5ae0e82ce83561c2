#pragma once

#include <functional>
#include <optional>
#include <string>

namespace droci {

// A phi-divergence together with its derivative values at 1. The inverse of
// phi' drives the KKT fixed point through h(t) = (phi')^{-1}(t) - 1, and the
// derivative triple (phi''(1), phi'''(1), phi''''(1)) feeds every expansion
// and correction formula downstream.
struct DivergenceSpec {
  std::string name;
  std::optional<double> lambda;

  std::function<double(double)> eval;            // phi(x), x > 0
  std::function<double(double)> deriv1;          // phi'(x)
  std::function<double(double)> deriv1_inverse;  // (phi')^{-1}(t)
  std::function<bool(double)> in_deriv1_range;   // t in range of phi'?

  double d2_at_1 = 0.0;
  double d3_at_1 = 0.0;
  double d4_at_1 = 0.0;

  // h(t) = (phi')^{-1}(t) - 1, so h(0) = 0 and h'(0) = 1/phi''(1).
  double h(double t) const { return deriv1_inverse(t) - 1.0; }
  double h_prime0() const { return 1.0 / d2_at_1; }
};

// Builds one of: kl, reverse-kl, chi2, cressie-read (lambda required, and
// lambda not in {0, -1}; those limits are kl and reverse-kl).
DivergenceSpec make_divergence(const std::string& name,
                               std::optional<double> lambda = {});

// Parses "kl", "reverse-kl", "chi2", or "cressie-read:<lambda>".
DivergenceSpec parse_divergence(const std::string& token);

// phi'''(1) = -2 phi''(1) and phi''''(1) = -3 phi'''(1), each to 1e-12.
bool is_bartlett_correctable(const DivergenceSpec& spec);

}  // namespace droci
