#pragma once

#include "droci/influence.hpp"
#include "droci/sample.hpp"

namespace droci {

// The influence-function moments that feed the coverage polynomial and the
// Bartlett-corrected ball size. Deliberately excludes the third-order moment:
// the correction formulas must not be able to see it.
struct BartlettMoments {
  double kappa2 = 0.0;  // E IF1^2
  double gamma = 0.0;   // E IF1^3
  double mu4 = 0.0;     // E IF1^4
  double mu2a = 0.0;    // E IF1(X) IF1(Z) IF2(X,Y) IF2(Y,Z)
  double mu2b = 0.0;    // E IF1(X) IF1(Y)^2 IF2(X,Y)
  double mu2c = 0.0;    // E IF1(X) IF1(Y) IF2(X,Y)
  double mu2d = 0.0;    // E IF2(X,X)
  double mu22 = 0.0;    // E IF2(X,Y)^2
  double mu12d = 0.0;   // E IF1(X) IF2(X,X)
};

struct MomentSet : BartlettMoments {
  double mu3c = 0.0;  // E IF1(X) IF1(Y) IF1(Z) IF3(X,Y,Z)
  bool has_mu3c = false;

  const BartlettMoments& bartlett() const { return *this; }
};

// Exact empirical sums over the product measure; mu2a via the O(n^2)
// factorization v(j) = mean_i IF1(i) IF2(i,j). The O(n^3) mu3c sum runs only
// when the model carries a nonzero IF3.
MomentSet estimate_moments(const InfluenceModel& model, const Sample& sample);

}  // namespace droci
