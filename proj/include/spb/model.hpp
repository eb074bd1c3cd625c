#pragma once

#include "spb/polyalg.hpp"

#include <cmath>
#include <vector>

namespace spb {

/// sigma_lo <= E[g(X)] <= sigma_hi
struct MomentConstraint {
  PiecewiseFunction g;
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
};

/// Mixture-component family H_x, parameterized by the atom x.
struct MixtureFamily {
  enum class Kind { Dirac, UniformZero, KhintchineUniform, Lognormal, SmoothedUniform };
  Kind kind = Kind::Dirac;
  double mode = 0.0;   // M (KhintchineUniform, SmoothedUniform)
  double alpha = 0.0;  // component std deviation (Lognormal)
  double eta = 0.0;    // logistic sharpness (SmoothedUniform)

  static MixtureFamily dirac() { return {}; }
  static MixtureFamily uniform_zero() { return {Kind::UniformZero, 0, 0, 0}; }
  static MixtureFamily khintchine(double M) { return {Kind::KhintchineUniform, M, 0, 0}; }
  static MixtureFamily lognormal(double alpha) { return {Kind::Lognormal, 0, alpha, 0}; }
  static MixtureFamily smoothed_uniform(double M, double eta) {
    return {Kind::SmoothedUniform, M, 0, eta};
  }
  void validate() const;
  const char* name() const;
};

enum class Sense { Upper, Lower };

struct ProblemSpec {
  Domain support{0.0, kInf};
  PiecewiseFunction target;
  std::vector<MomentConstraint> constraints;
  Sense sense = Sense::Upper;
  MixtureFamily family;
  double cg_epsilon = 0.0;   // 0 -> default from target scale
  double search_cap = 0.0;   // 0 -> default; used when support is unbounded

  void validate() const;
  /// Fills cg_epsilon / search_cap defaults when unset.
  void finalize_defaults();
  double support_scale() const;
};

/// Deductible policy with pinned non-central moments: f = max(x-d, 0),
/// g_j = x^j on D = [0, b] (b may be +inf). m in {2, 3}; m = 3 requires
/// the third non-central moment.
ProblemSpec standard_policy_problem(double mu, double sigma2, double d, double b, int m,
                                    double third_moment = std::nan(""));

/// Variance bounds implied by observed call prices: g_j = max(x-K_j, 0)
/// pinned to c_j, mean pinned to mu, target f = (x - mu)^2 on [0, inf).
ProblemSpec option_constrained_problem(const std::vector<std::pair<double, double>>& prices,
                                       double mu);

/// gamma * [min(x,u) - min(x,d)] on the given support.
PiecewiseFunction coinsurance_payoff(double d, double u, double gamma,
                                     Domain support = Domain(0.0, kInf));

}  // namespace spb
