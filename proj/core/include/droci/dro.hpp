#pragma once

#include <cstddef>
#include <vector>

#include "droci/divergence.hpp"
#include "droci/influence.hpp"
#include "droci/moments.hpp"
#include "droci/sample.hpp"

namespace droci {

enum class Direction { Max, Min };

struct LikelihoodRatioSolution {
  std::vector<double> L;
  double alpha_tilde = 0.0;
  double beta = 0.0;
  double objective = 0.0;
  double residual_divergence = 0.0;
  double residual_mean = 0.0;
  std::size_t iterations = 0;
};

struct ExpansionCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

// Coefficients of the n^{-k/2} (q/phi'')^{k/2} expansion of the ball optimum.
// When the third-order moment is absent its term contributes zero; with
// strict = true that situation throws MissingThirdOrderMoment instead.
ExpansionCoefficients expansion_coefficients(const MomentSet& moments,
                                             const DivergenceSpec& spec,
                                             bool strict = false);

double dro_value_expansion(Direction direction, double psi_hat,
                           const ExpansionCoefficients& coeffs,
                           const DivergenceSpec& spec, double q,
                           std::size_t n);

// Exact optimum of the truncated influence expansion of psi over the
// divergence ball of radius q/(2n), via the multiplier fixed point.
LikelihoodRatioSolution solve_dro_exact(const InfluenceModel& model,
                                        const Sample& sample,
                                        const DivergenceSpec& spec, double q,
                                        Direction direction);

// Profile divergence: smallest ball radius whose value range reaches
// psi_target, found by bisection over q and returned as q/(2n).
double el_profile(const InfluenceModel& model, const Sample& sample,
                  const DivergenceSpec& spec, double psi_target,
                  double q_cap = 50.0);

}  // namespace droci
