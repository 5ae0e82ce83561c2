#include "droci/divergence.hpp"

#include <cmath>
#include <limits>

#include "droci/errors.hpp"

namespace droci {

namespace {

void check_positive(double x, const char* who) {
  if (!(x >= 0.0)) {
    throw DomainError(std::string(who) + ": argument must be nonnegative");
  }
}

DivergenceSpec make_reverse_kl() {
  DivergenceSpec s;
  s.name = "reverse-kl";
  s.eval = [](double x) {
    check_positive(x, "reverse-kl");
    if (x == 0.0) throw DomainError("reverse-kl: phi(0) is infinite");
    return -std::log(x) + x - 1.0;
  };
  s.deriv1 = [](double x) { return 1.0 - 1.0 / x; };
  // phi'(x) = 1 - 1/x, range (-inf, 1); inverse t -> 1/(1-t).
  s.deriv1_inverse = [](double t) {
    if (t >= 1.0) throw DomainError("reverse-kl: phi' inverse needs t < 1");
    return 1.0 / (1.0 - t);
  };
  s.in_deriv1_range = [](double t) { return t < 1.0; };
  s.d2_at_1 = 1.0;
  s.d3_at_1 = -2.0;
  s.d4_at_1 = 6.0;
  return s;
}

DivergenceSpec make_kl() {
  DivergenceSpec s;
  s.name = "kl";
  s.eval = [](double x) {
    check_positive(x, "kl");
    if (x == 0.0) return 1.0;  // x log x -> 0
    return x * std::log(x) - x + 1.0;
  };
  s.deriv1 = [](double x) { return std::log(x); };
  s.deriv1_inverse = [](double t) { return std::exp(t); };
  s.in_deriv1_range = [](double) { return true; };
  s.d2_at_1 = 1.0;
  s.d3_at_1 = -1.0;
  s.d4_at_1 = 2.0;
  return s;
}

DivergenceSpec make_chi2() {
  DivergenceSpec s;
  s.name = "chi2";
  s.eval = [](double x) {
    check_positive(x, "chi2");
    return (x - 1.0) * (x - 1.0);
  };
  s.deriv1 = [](double x) { return 2.0 * (x - 1.0); };
  s.deriv1_inverse = [](double t) {
    double x = 1.0 + 0.5 * t;
    if (x <= 0.0) throw DomainError("chi2: phi' inverse left (0, inf)");
    return x;
  };
  s.in_deriv1_range = [](double t) { return t > -2.0; };
  s.d2_at_1 = 2.0;
  s.d3_at_1 = 0.0;
  s.d4_at_1 = 0.0;
  return s;
}

// phi(x) = (x^{lam+1} - (lam+1) x + lam) / (lam (lam+1)), which satisfies
// phi(1) = phi'(1) = 0 and phi''(x) = x^{lam-1}. phi'(x) = (x^lam - 1)/lam
// inverts in closed form as x = (1 + lam t)^{1/lam}.
DivergenceSpec make_cressie_read(double lam) {
  if (lam == 0.0 || lam == -1.0) {
    throw DegenerateCressieReadParameter(
        "cressie-read: lambda in {0, -1}; use kl / reverse-kl instead");
  }
  DivergenceSpec s;
  s.name = "cressie-read";
  s.lambda = lam;
  s.eval = [lam](double x) {
    check_positive(x, "cressie-read");
    if (x == 0.0) {
      if (lam + 1.0 <= 0.0)
        throw DomainError("cressie-read: phi(0) is infinite");
      return 1.0 / (lam + 1.0);
    }
    return (std::pow(x, lam + 1.0) - (lam + 1.0) * x + lam) /
           (lam * (lam + 1.0));
  };
  s.deriv1 = [lam](double x) { return (std::pow(x, lam) - 1.0) / lam; };
  s.deriv1_inverse = [lam](double t) {
    double base = 1.0 + lam * t;
    if (base <= 0.0)
      throw DomainError("cressie-read: phi' inverse left (0, inf)");
    return std::pow(base, 1.0 / lam);
  };
  s.in_deriv1_range = [lam](double t) { return 1.0 + lam * t > 0.0; };
  s.d2_at_1 = 1.0;
  s.d3_at_1 = lam - 1.0;
  s.d4_at_1 = (lam - 1.0) * (lam - 2.0);
  return s;
}

}  // namespace

DivergenceSpec make_divergence(const std::string& name,
                               std::optional<double> lambda) {
  if (name == "reverse-kl") return make_reverse_kl();
  if (name == "kl") return make_kl();
  if (name == "chi2") return make_chi2();
  if (name == "cressie-read") {
    if (!lambda)
      throw UnknownDivergence("cressie-read requires a lambda parameter");
    return make_cressie_read(*lambda);
  }
  throw UnknownDivergence("unknown divergence: " + name);
}

DivergenceSpec parse_divergence(const std::string& token) {
  auto colon = token.find(':');
  if (colon == std::string::npos) return make_divergence(token);
  std::string name = token.substr(0, colon);
  std::string arg = token.substr(colon + 1);
  std::size_t used = 0;
  double lam = 0.0;
  try {
    lam = std::stod(arg, &used);
  } catch (const std::exception&) {
    throw UnknownDivergence("bad divergence parameter: " + token);
  }
  if (used != arg.size())
    throw UnknownDivergence("bad divergence parameter: " + token);
  return make_divergence(name, lam);
}

bool is_bartlett_correctable(const DivergenceSpec& spec) {
  const double tol = 1e-12;
  return std::abs(spec.d3_at_1 + 2.0 * spec.d2_at_1) <= tol &&
         std::abs(spec.d4_at_1 + 3.0 * spec.d3_at_1) <= tol;
}

}  // namespace droci
