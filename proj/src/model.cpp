#include "spb/model.hpp"

#include <algorithm>
#include <cmath>

namespace spb {

void MixtureFamily::validate() const {
  switch (kind) {
    case Kind::Dirac:
    case Kind::UniformZero:
      break;
    case Kind::KhintchineUniform:
      if (!std::isfinite(mode)) throw ValidationError("KhintchineUniform: mode must be finite");
      break;
    case Kind::Lognormal:
      if (!(alpha > 0)) throw ValidationError("Lognormal: alpha must be > 0");
      break;
    case Kind::SmoothedUniform:
      if (!std::isfinite(mode)) throw ValidationError("SmoothedUniform: mode must be finite");
      if (!(eta > 0)) throw ValidationError("SmoothedUniform: eta must be > 0");
      break;
  }
}

const char* MixtureFamily::name() const {
  switch (kind) {
    case Kind::Dirac: return "dirac";
    case Kind::UniformZero: return "uniform_zero";
    case Kind::KhintchineUniform: return "khintchine";
    case Kind::Lognormal: return "lognormal";
    case Kind::SmoothedUniform: return "smoothed_uniform";
  }
  return "?";
}

double ProblemSpec::support_scale() const {
  double s = 1.0;
  if (support.bounded_below()) s = std::max(s, std::abs(support.lower));
  if (support.bounded_above()) s = std::max(s, std::abs(support.upper));
  else if (search_cap > 0) s = std::max(s, search_cap);
  return s;
}

void ProblemSpec::validate() const {
  if (constraints.empty()) throw ValidationError("ProblemSpec: needs at least one constraint");
  family.validate();
  for (const auto& c : constraints) {
    if (!(c.sigma_lo <= c.sigma_hi))
      throw ValidationError("MomentConstraint: sigma_lo > sigma_hi");
    if (c.g.support().lower > support.lower + 1e-12 * support_scale() ||
        c.g.support().upper < support.upper - 1e-12 * support_scale())
      throw ValidationError("MomentConstraint: g not defined on the whole support");
  }
  if (target.support().lower > support.lower + 1e-12 * support_scale() ||
      target.support().upper < support.upper - 1e-12 * support_scale())
    throw ValidationError("ProblemSpec: target not defined on the whole support");
  using K = MixtureFamily::Kind;
  if ((family.kind == K::Lognormal || family.kind == K::SmoothedUniform) && support.lower < 0)
    throw ValidationError("ProblemSpec: lognormal/smoothed families need D within [0, inf)");
  if (family.kind == K::UniformZero && support.lower < 0)
    throw ValidationError("ProblemSpec: UniformZero family needs D within [0, inf)");
  if ((family.kind == K::KhintchineUniform || family.kind == K::SmoothedUniform) &&
      !support.contains(family.mode))
    throw ValidationError("ProblemSpec: mixture mode outside the support");
  if (!support.bounded_above() && !(search_cap > support.lower))
    throw ValidationError("ProblemSpec: unbounded support needs a positive search_cap");
  if (!(cg_epsilon > 0)) throw ValidationError("ProblemSpec: cg_epsilon must be > 0");
}

void ProblemSpec::finalize_defaults() {
  double hi = support.bounded_above() ? support.upper : search_cap;
  if (!(hi > support.lower)) hi = support.lower + 1.0;
  if (cg_epsilon <= 0) {
    double scale = 1.0;
    for (int i = 0; i <= 64; ++i) {
      double x = support.lower + (hi - support.lower) * i / 64.0;
      scale = std::max(scale, std::abs(target.eval(x)));
    }
    cg_epsilon = 1e-8 * scale;
  }
  if (support.bounded_above() && search_cap <= 0) search_cap = support.upper;
  if (!support.bounded_above() && search_cap <= 0) {
    // derive a cap from monomial moment caps: E[a x^j] <= s implies the bulk
    // of the mass sits below (s/a)^(1/j); pad generously
    double cap = kInf;
    for (const auto& c : constraints) {
      if (!std::isfinite(c.sigma_hi) || c.g.pieces().size() != 1) continue;
      const auto& pc = c.g.pieces()[0];
      if (pc.has_den && !pc.has_limit) continue;
      const Polynomial& poly = pc.has_limit ? pc.quotient : pc.num;
      const auto& cf = poly.coeffs();
      if (cf.empty()) continue;
      size_t j = cf.size() - 1;
      if (j == 0 || cf[j] <= 0 || c.sigma_hi <= 0) continue;
      cap = std::min(cap, 20.0 * std::pow(c.sigma_hi / cf[j], 1.0 / static_cast<double>(j)));
    }
    if (std::isfinite(cap)) search_cap = std::max(cap, support.lower + 1.0);
  }
}

ProblemSpec standard_policy_problem(double mu, double sigma2, double d, double b, int m,
                                    double third_moment) {
  if (m != 2 && m != 3) throw ValidationError("standard_policy_problem: m must be 2 or 3");
  if (!(mu > 0) || !(sigma2 > 0))
    throw ValidationError("standard_policy_problem: mu and sigma2 must be > 0");
  if (!(d >= 0)) throw ValidationError("standard_policy_problem: d must be >= 0");
  double m2 = sigma2 + mu * mu;
  if (m2 < mu * mu)
    throw ValidationError("standard_policy_problem: moments violate E[X^2] >= E[X]^2");
  ProblemSpec spec;
  spec.support = Domain(0.0, b);
  spec.target = PiecewiseFunction::call_payoff(spec.support, d);
  spec.constraints.push_back({PiecewiseFunction::monomial(spec.support, 1), mu, mu});
  spec.constraints.push_back({PiecewiseFunction::monomial(spec.support, 2), m2, m2});
  if (m == 3) {
    if (std::isnan(third_moment))
      throw ValidationError("standard_policy_problem: m = 3 needs the third moment");
    if (!(third_moment > 0))
      throw ValidationError("standard_policy_problem: third moment must be > 0");
    spec.constraints.push_back(
        {PiecewiseFunction::monomial(spec.support, 3), third_moment, third_moment});
  }
  if (!spec.support.bounded_above()) spec.search_cap = mu + 20.0 * std::sqrt(sigma2);
  spec.finalize_defaults();
  spec.validate();
  return spec;
}

ProblemSpec option_constrained_problem(const std::vector<std::pair<double, double>>& prices,
                                       double mu) {
  if (!(mu > 0)) throw ValidationError("option_constrained_problem: mu must be > 0");
  ProblemSpec spec;
  spec.support = Domain(0.0, kInf);
  // f = (x - mu)^2
  spec.target = PiecewiseFunction::from_polynomial(spec.support,
                                                   Polynomial({mu * mu, -2.0 * mu, 1.0}));
  spec.constraints.push_back({PiecewiseFunction::monomial(spec.support, 1), mu, mu});
  double kmax = 0.0;
  for (size_t i = 0; i < prices.size(); ++i) {
    auto [K, c] = prices[i];
    if (!(c >= 0)) throw ValidationError("option_constrained_problem: price must be >= 0");
    for (size_t j = 0; j < i; ++j)
      if (std::abs(prices[j].first - K) <= 1e-12 * (1.0 + std::abs(K)))
        throw ValidationError("option_constrained_problem: duplicate strikes");
    spec.constraints.push_back({PiecewiseFunction::call_payoff(spec.support, K), c, c});
    kmax = std::max(kmax, K);
  }
  spec.search_cap = std::max(20.0 * mu, 4.0 * kmax);
  spec.finalize_defaults();
  spec.validate();
  return spec;
}

PiecewiseFunction coinsurance_payoff(double d, double u, double gamma, Domain support) {
  if (!(d >= 0) || !(d < u)) throw ValidationError("coinsurance_payoff: need 0 <= d < u");
  if (!(gamma >= 0 && gamma <= 1)) throw ValidationError("coinsurance_payoff: gamma in [0,1]");
  // gamma*[min(x,u) - min(x,d)]: 0 below d, gamma*(x-d) in [d,u], gamma*(u-d) above
  std::vector<double> breaks;
  std::vector<Polynomial> polys;
  if (d > support.lower) {
    breaks.push_back(d);
    polys.push_back(Polynomial());
  }
  polys.push_back(Polynomial::linear(-gamma * d, gamma));
  if (u < support.upper) {
    breaks.push_back(u);
    polys.push_back(Polynomial::constant(gamma * (u - d)));
  }
  return PiecewiseFunction::from_poly_pieces(support, std::move(breaks), std::move(polys));
}

}  // namespace spb
