#pragma once

#include <optional>
#include <string>
#include <vector>

#include "droci/divergence.hpp"
#include "droci/dro.hpp"
#include "droci/moments.hpp"
#include "droci/registry.hpp"
#include "droci/sample.hpp"

namespace droci {

// Inverse standard normal CDF (Wichura's rational approximation, absolute
// error below 1e-9 well inside (0,1)).
double normal_quantile(double p);

// chi^2 quantile with one degree of freedom, via the squared normal quantile.
double chi2_quantile_1df(double nominal);

// Uncorrected ball size: phi''(1) times the chi-square quantile.
double q_exact(double nominal, const DivergenceSpec& spec);

// Coefficients of the odd coverage-error polynomial A(x) = cx*x + cx3*x^3 +
// cx5*x^5. Takes only first/second-order influence moments by construction:
// the third-order moment cannot enter the correction.
struct ACoefficients {
  double cx = 0.0;
  double cx3 = 0.0;
  double cx5 = 0.0;
};
ACoefficients a_coeffs(const DivergenceSpec& spec, const BartlettMoments& m);
double a_eval(double x, const DivergenceSpec& spec, const BartlettMoments& m);

struct CorrectedQ {
  double q = 0.0;
  bool clamped = false;  // correction drove q <= 0; floored at 0.1 * q_exact
};
CorrectedQ corrected_q(double nominal, const DivergenceSpec& spec,
                       const BartlettMoments& m, std::size_t n);

// Smooth-function model in whitened coordinates: derivatives of the function
// of the mean and the standardized central moments of the data.
// Index conventions match SmoothFunction (row-major).
struct StandardizedSmooth {
  std::size_t dim = 0;
  std::vector<double> theta;   // gradient, length d
  std::vector<double> theta2;  // Hessian, d*d
  std::vector<double> alpha3;  // third central moments, d^3
  std::vector<double> alpha4;  // fourth central moments, d^4
};

StandardizedSmooth standardize_smooth(const SmoothFunction& f,
                                      const Sample& sample);

struct TFactors {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0, t5 = 0.0;
  double factor = 0.0;  // (5/3)t1 - 2 t2 + t3/2 - t4 + t5/4
};

// Bartlett factor of a standardized smooth-function model under reverse-kl.
// prior_sign = true flips the "-2" inside t5 to the earlier literature's
// "+2" (the TB2 comparison variant).
TFactors t_factors(const StandardizedSmooth& s, bool prior_sign = false);

enum class RuleKind {
  Exact,                // chi-square calibration as-is
  BartlettEstimated,    // correction from sample moments
  BartlettTheoretical,  // correction from oracle moments
  BartlettDicc          // smooth models: prior-literature t5 sign
};

std::string rule_kind_name(RuleKind kind);
RuleKind parse_rule_kind(const std::string& name);  // el|eb|tb|tb2

struct BallSizeRule {
  RuleKind kind = RuleKind::Exact;
  double nominal = 0.95;
  std::optional<MomentSet> oracle_moments;        // BartlettTheoretical
  std::optional<StandardizedSmooth> oracle_smooth;  // BartlettDicc
};

struct QSelection {
  double q = 0.0;
  bool clamped = false;
  std::string provenance;  // which moments fed the correction
};

QSelection select_q(const BallSizeRule& rule, const DivergenceSpec& spec,
                    const MomentSet& sample_moments, std::size_t n);

enum class SolverChoice { Exact, Expansion };

struct CIResult {
  double lower = 0.0;
  double upper = 0.0;
  double q_used = 0.0;
  std::string method;
  std::string solver;
  std::vector<std::string> warnings;
};

CIResult confidence_interval(const InfluenceModel& model, const Sample& sample,
                             const DivergenceSpec& spec,
                             const BallSizeRule& rule,
                             SolverChoice solver = SolverChoice::Exact);

}  // namespace droci
