#include "spb/oracles.hpp"

#include <cmath>

#include "spb/lp.hpp"
#include "spb/mixtures.hpp"

namespace spb::oracles {

double lo_upper_bound(double mu, double sigma, double d) {
  if (!(mu > 0) || !(sigma >= 0) || d < 0)
    throw ValidationError("lo_upper_bound: need mu > 0, sigma >= 0, d >= 0");
  double s2 = sigma * sigma;
  double boundary = (mu * mu + s2) / (2.0 * mu);
  if (d <= boundary) return mu - d * mu * mu / (mu * mu + s2);
  return 0.5 * ((mu - d) + std::sqrt((mu - d) * (mu - d) + s2));
}

double normal_cdf(double z) { return spb::normal_cdf(z); }

double black_scholes_call(double s0, double k, double r, double vol, double t) {
  if (!(s0 > 0) || !(k > 0) || !(vol > 0) || !(t > 0))
    throw ValidationError("black_scholes_call: need s0, k, vol, t > 0");
  double sq = vol * std::sqrt(t);
  double d1 = (std::log(s0 / k) + (r + 0.5 * vol * vol) * t) / sq;
  double d2 = d1 - sq;
  return s0 * normal_cdf(d1) - k * std::exp(-r * t) * normal_cdf(d2);
}

double grid_lp_bound(const ProblemSpec& spec, const GridOracleConfig& cfg) {
  ProblemSpec s = spec;
  s.finalize_defaults();
  s.validate();
  if (cfg.n < 101) throw ValidationError("grid_lp_bound: need at least 101 grid atoms");
  double lo = s.support.lower;
  double hi = s.support.bounded_above() ? s.support.upper
                                        : (cfg.clip > 0 ? cfg.clip : s.search_cap);
  if (!(hi > lo)) throw ValidationError("grid_lp_bound: empty grid interval");

  TransformedFunction ft = transform(s.target, s.family);
  std::vector<TransformedFunction> gt;
  for (const auto& c : s.constraints) gt.push_back(transform(c.g, s.family));

  double sgn = (s.sense == Sense::Upper) ? 1.0 : -1.0;
  size_t n = static_cast<size_t>(cfg.n);
  lp::Problem p;
  p.c.resize(n);
  std::vector<std::vector<double>> gvals(gt.size(), std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    p.c[i] = sgn * ft(x);
    for (size_t j = 0; j < gt.size(); ++j) gvals[j][i] = gt[j](x);
  }
  for (size_t j = 0; j < gt.size(); ++j) {
    p.rows.push_back({gvals[j], lp::RowSense::GE, s.constraints[j].sigma_lo});
    p.rows.push_back({gvals[j], lp::RowSense::LE, s.constraints[j].sigma_hi});
  }
  p.rows.push_back({std::vector<double>(n, 1.0), lp::RowSense::EQ, 1.0});

  lp::Solution sol = lp::solve_lp(p);
  if (sol.status == lp::Status::Infeasible)
    throw InfeasibleError("grid_lp_bound: grid problem infeasible");
  if (sol.status != lp::Status::Optimal)
    throw NumericError("grid_lp_bound: unexpected LP status");
  return sgn * sol.objective;
}

}  // namespace spb::oracles
