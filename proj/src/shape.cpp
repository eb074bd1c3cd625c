#include "spb/shape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spb {

namespace {
constexpr int kUnimodalGrid = 4096;
constexpr double kWindowQuantile = 1e-6;
}  // namespace

void MixtureDistribution::validate() const {
  if (atoms.size() != weights.size() || atoms.empty())
    throw ValidationError("MixtureDistribution: atoms/weights size mismatch or empty");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0) throw ValidationError("MixtureDistribution: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("MixtureDistribution: weights sum to " + std::to_string(total));
  if (!(u_hi > u_lo) && family.kind != MixtureFamily::Kind::Dirac)
    throw ValidationError("MixtureDistribution: degenerate evaluation window");
}

MixtureDistribution make_distribution(const MixtureFamily& family,
                                      std::vector<double> atoms,
                                      std::vector<double> weights) {
  MixtureDistribution d;
  d.family = family;
  d.atoms = std::move(atoms);
  d.weights = std::move(weights);
  if (d.atoms.size() != d.weights.size() || d.atoms.empty())
    throw ValidationError("make_distribution: atoms/weights size mismatch or empty");
  double total = 0.0;
  for (double w : d.weights) total += w;
  if (!(total > 0)) throw ValidationError("make_distribution: zero total weight");
  for (double& w : d.weights) w /= total;
  d.u_lo = kInf;
  d.u_hi = -kInf;
  for (double x : d.atoms) {
    auto [a, b] = component_window(d.family, x, kWindowQuantile);
    d.u_lo = std::min(d.u_lo, a);
    d.u_hi = std::max(d.u_hi, b);
  }
  d.validate();
  return d;
}

MixtureDistribution make_distribution(const BoundResult& result) {
  return make_distribution(result.family, result.atoms, result.weights);
}

double mixture_pdf(const MixtureDistribution& dist, double u) {
  if (dist.family.kind == MixtureFamily::Kind::Dirac)
    throw DomainError("mixture_pdf: Dirac mixtures have no density");
  double v = 0.0;
  for (size_t i = 0; i < dist.atoms.size(); ++i)
    v += dist.weights[i] * component_pdf(dist.family, dist.atoms[i], u);
  return v;
}

double mixture_cdf(const MixtureDistribution& dist, double u) {
  double v = 0.0;
  for (size_t i = 0; i < dist.atoms.size(); ++i)
    v += dist.weights[i] * component_cdf(dist.family, dist.atoms[i], u);
  return v;
}

bool is_unimodal(const MixtureDistribution& dist) {
  dist.validate();
  if (!(dist.u_hi > dist.u_lo))
    throw DomainError("is_unimodal: degenerate evaluation window");
  std::vector<double> v(kUnimodalGrid);
  double peak = 0.0;
  for (int i = 0; i < kUnimodalGrid; ++i) {
    double u = dist.u_lo + (dist.u_hi - dist.u_lo) * i / (kUnimodalGrid - 1);
    v[static_cast<size_t>(i)] = mixture_pdf(dist, u);
    peak = std::max(peak, v[static_cast<size_t>(i)]);
  }
  if (!(peak > 0)) throw NumericError("is_unimodal: density vanished on the window");
  // merge plateaus so flat tops count as a single candidate
  double tol = 1e-9 * peak;
  std::vector<double> m;
  m.reserve(v.size());
  for (double x : v)
    if (m.empty() || std::abs(x - m.back()) > tol) m.push_back(x);
  if (m.size() == 1) return true;
  int maxima = 0;
  for (size_t i = 0; i < m.size(); ++i) {
    bool left_ok = (i == 0) || m[i] > m[i - 1];
    bool right_ok = (i + 1 == m.size()) || m[i] > m[i + 1];
    if (left_ok && right_ok) ++maxima;
  }
  return maxima == 1;
}

BisectionResult bisect_alpha(const ProblemSpec& spec, double alpha_lo, double alpha_hi,
                             double eps) {
  if (!(alpha_lo > 0) || !(alpha_hi > alpha_lo))
    throw ValidationError("bisect_alpha: need 0 < alpha_lo < alpha_hi");
  if (!(eps > 0)) throw ValidationError("bisect_alpha: eps must be > 0");

  MomentEnvelope env = moment_envelope(spec);
  if (env.var_unbounded || !(alpha_hi < std::sqrt(env.var_hi)))
    throw ValidationError("bisect_alpha: alpha_hi must stay below the feasible sigma " +
                          std::string(env.var_unbounded
                                          ? "(variance envelope unbounded)"
                                          : std::to_string(std::sqrt(env.var_hi))));

  auto solve_at = [&](double alpha) {
    ProblemSpec s = spec;
    s.family = MixtureFamily::lognormal(alpha);
    return run_cg(s);
  };

  BisectionResult out;
  BoundResult r_lo = solve_at(alpha_lo);
  bool uni_lo = is_unimodal(make_distribution(r_lo));
  BoundResult r_hi = solve_at(alpha_hi);
  bool uni_hi = is_unimodal(make_distribution(r_hi));
  out.trace.push_back({alpha_lo, uni_lo, r_lo.bound});
  out.trace.push_back({alpha_hi, uni_hi, r_hi.bound});
  if (uni_lo || !uni_hi)
    throw ValidationError("bisect_alpha: invalid bracket (alpha_lo unimodal=" +
                          std::string(uni_lo ? "yes" : "no") + ", alpha_hi unimodal=" +
                          std::string(uni_hi ? "yes" : "no") + ")");

  double best_alpha = alpha_hi;
  BoundResult best = std::move(r_hi);
  while (alpha_hi - alpha_lo > eps) {
    double mid = 0.5 * (alpha_lo + alpha_hi);
    BoundResult r = solve_at(mid);
    bool uni = is_unimodal(make_distribution(r));
    out.trace.push_back({mid, uni, r.bound});
    if (uni) {
      alpha_hi = mid;
      best_alpha = mid;
      best = std::move(r);
    } else {
      alpha_lo = mid;
    }
  }
  out.alpha_star = best_alpha;
  out.bound = best.bound;
  out.unimodal = true;
  out.solve = std::move(best);
  return out;
}

LerBounds ler_bounds(double mu, double sigma2, double b, double d,
                     const MixtureFamily& family) {
  if (!(mu > 0)) throw ValidationError("ler_bounds: mu must be > 0");
  ProblemSpec base = standard_policy_problem(mu, sigma2, d, b, 2);
  base.family = family;
  base.validate();
  LerBounds out;
  ProblemSpec up = base;
  up.sense = Sense::Upper;
  out.upper_solve = run_cg(up);
  ProblemSpec down = base;
  down.sense = Sense::Lower;
  out.lower_solve = run_cg(down);
  out.ler_hi = (mu - out.lower_solve.bound) / mu;
  out.ler_lo = (mu - out.upper_solve.bound) / mu;
  return out;
}

DistributionTable export_distribution(const MixtureDistribution& dist, int n_points) {
  if (n_points < 2) throw ValidationError("export_distribution: n_points must be >= 2");
  dist.validate();
  DistributionTable t;
  if (dist.family.kind == MixtureFamily::Kind::Dirac) {
    t.atom_table = true;
    t.atoms = dist.atoms;
    t.weights = dist.weights;
    return t;
  }
  t.u.resize(static_cast<size_t>(n_points));
  t.pdf.resize(static_cast<size_t>(n_points));
  t.cdf.resize(static_cast<size_t>(n_points));
  double prev = 0.0;
  for (int i = 0; i < n_points; ++i) {
    double u = dist.u_lo + (dist.u_hi - dist.u_lo) * i / (n_points - 1);
    size_t k = static_cast<size_t>(i);
    t.u[k] = u;
    t.pdf[k] = mixture_pdf(dist, u);
    t.cdf[k] = std::max(prev, mixture_cdf(dist, u));
    prev = t.cdf[k];
  }
  return t;
}

}  // namespace spb
