#include "spb/cg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

namespace spb {

namespace {

constexpr int kMaxCgIterations = 10000;
constexpr int kGridPoints = 2048;
constexpr int kRefineCandidates = 8;

double sense_sign(Sense s) { return s == Sense::Upper ? 1.0 : -1.0; }

// golden-section maximization on [a, b]
std::pair<double, double> golden_max(const std::function<double(double)>& f, double a,
                                     double b, double xtol) {
  const double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

// if g is a single-piece monomial c*x^j, returns j and c
std::optional<std::pair<int, double>> as_monomial(const PiecewiseFunction& g) {
  if (!g.breakpoints().empty()) return std::nullopt;
  const auto& pc = g.pieces()[0];
  if (pc.has_den && !pc.has_limit) return std::nullopt;
  const Polynomial& p = pc.has_limit ? pc.quotient : pc.num;
  const auto& c = p.coeffs();
  int j = -1;
  for (size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    if (j >= 0) return std::nullopt;
    j = static_cast<int>(i);
  }
  if (j <= 0) return std::nullopt;
  return std::make_pair(j, c[static_cast<size_t>(j)]);
}

}  // namespace

bool AtomSet::contains(double x) const {
  for (double a : atoms_)
    if (std::abs(a - x) <= tol_) return true;
  return false;
}

bool AtomSet::add(double x) {
  if (contains(x)) return false;
  atoms_.push_back(x);
  return true;
}

void AtomSet::keep(const std::vector<size_t>& indices) {
  std::vector<double> kept;
  kept.reserve(indices.size());
  for (size_t i : indices) kept.push_back(atoms_[i]);
  atoms_ = std::move(kept);
}

CgSolver::CgSolver(ProblemSpec spec) : spec_(std::move(spec)) {
  spec_.finalize_defaults();
  spec_.validate();
  ft_ = transform(spec_.target, spec_.family);
  gt_.reserve(spec_.constraints.size());
  for (const auto& c : spec_.constraints) gt_.push_back(transform(c.g, spec_.family));
  exact_path_ = ft_.has_exact();
  for (const auto& g : gt_) exact_path_ = exact_path_ && g.has_exact();
  double hi = spec_.support.bounded_above() ? spec_.support.upper : spec_.search_cap;
  atom_domain_ = Domain(spec_.support.lower, hi);
}

double CgSolver::objective_at(double x) const { return sense_sign(spec_.sense) * ft_(x); }

double CgSolver::reduced_cost_at(double x, const std::vector<double>& lambda, double tau,
                                 bool with_objective) const {
  double r = (with_objective ? objective_at(x) : 0.0) - tau;
  for (size_t j = 0; j < gt_.size(); ++j)
    if (lambda[j] != 0.0) r -= lambda[j] * gt_[j](x);
  return r;
}

lp::Problem CgSolver::build_master_lp(const AtomSet& atoms) const {
  lp::Problem p;
  const auto& xs = atoms.atoms();
  p.c.reserve(xs.size());
  for (double x : xs) p.c.push_back(objective_at(x));
  for (size_t j = 0; j < gt_.size(); ++j) {
    std::vector<double> coeffs;
    coeffs.reserve(xs.size());
    for (double x : xs) coeffs.push_back(gt_[j](x));
    p.rows.push_back({coeffs, lp::RowSense::GE, spec_.constraints[j].sigma_lo});
    p.rows.push_back({coeffs, lp::RowSense::LE, spec_.constraints[j].sigma_hi});
  }
  p.rows.push_back({std::vector<double>(xs.size(), 1.0), lp::RowSense::EQ, 1.0});
  return p;
}

MasterSolution CgSolver::solve_master(const AtomSet& atoms) const {
  if (atoms.empty()) throw ValidationError("solve_master: empty atom set");
  lp::Solution sol = lp::solve_lp(build_master_lp(atoms));
  if (sol.status == lp::Status::Infeasible)
    throw InfeasibleError("master problem infeasible for the current atom set");
  if (sol.status == lp::Status::Unbounded)
    throw NumericError("master problem unbounded (probability simplex should be compact)");
  MasterSolution ms;
  ms.weights = sol.x;
  ms.objective_internal = sol.objective;
  ms.objective = sense_sign(spec_.sense) * sol.objective;
  size_t m = gt_.size();
  ms.lambda.resize(m);
  ms.rho_lo.resize(m);
  ms.rho_hi.resize(m);
  for (size_t j = 0; j < m; ++j) {
    ms.rho_lo[j] = sol.duals[2 * j];
    ms.rho_hi[j] = sol.duals[2 * j + 1];
    ms.lambda[j] = ms.rho_lo[j] + ms.rho_hi[j];
  }
  ms.tau = sol.duals.back();
  return ms;
}

void CgSolver::ensure_grid() const {
  if (!grid_x_.empty()) return;
  grid_x_.resize(kGridPoints);
  grid_f_.resize(kGridPoints);
  grid_g_.assign(gt_.size(), std::vector<double>(kGridPoints));
  double lo = atom_domain_.lower, hi = atom_domain_.upper;
  for (int i = 0; i < kGridPoints; ++i) {
    double x = lo + (hi - lo) * i / (kGridPoints - 1);
    grid_x_[static_cast<size_t>(i)] = x;
    grid_f_[static_cast<size_t>(i)] = ft_(x);
    for (size_t j = 0; j < gt_.size(); ++j) grid_g_[j][static_cast<size_t>(i)] = gt_[j](x);
  }
}

SubproblemResult CgSolver::price_numeric(const std::vector<double>& lambda, double tau,
                                         bool with_objective) const {
  ensure_grid();
  double sgn = sense_sign(spec_.sense);
  std::vector<double> r(grid_x_.size());
  for (size_t i = 0; i < grid_x_.size(); ++i) {
    double v = (with_objective ? sgn * grid_f_[i] : 0.0) - tau;
    for (size_t j = 0; j < gt_.size(); ++j)
      if (lambda[j] != 0.0) v -= lambda[j] * grid_g_[j][i];
    r[i] = v;
  }
  // top candidates by grid value
  std::vector<size_t> idx(r.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  size_t ncand = std::min<size_t>(kRefineCandidates, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(ncand), idx.end(),
                    [&](size_t a, size_t b) { return r[a] > r[b]; });
  auto f = [&](double x) { return reduced_cost_at(x, lambda, tau, with_objective); };
  double xtol = 1e-10 * spec_.support_scale();
  SubproblemResult best;
  best.path = SubproblemPath::NumericSearch;
  best.reduced_cost = -kInf;
  for (size_t k = 0; k < ncand; ++k) {
    size_t i = idx[k];
    double a = grid_x_[i > 0 ? i - 1 : 0];
    double b = grid_x_[std::min(i + 1, grid_x_.size() - 1)];
    auto [x, v] = a < b ? golden_max(f, a, b, xtol) : std::make_pair(grid_x_[i], r[i]);
    if (v > best.reduced_cost || (v == best.reduced_cost && x < best.x_star)) {
      best.reduced_cost = v;
      best.x_star = x;
    }
  }
  return best;
}

SubproblemResult CgSolver::price_exact(const std::vector<double>& lambda, double tau,
                                       bool with_objective) const {
  double sgn = sense_sign(spec_.sense);
  PiecewiseFunction r = with_objective
                            ? ft_.exact()->scaled(sgn)
                            : PiecewiseFunction::from_polynomial(spec_.support, Polynomial());
  for (size_t j = 0; j < gt_.size(); ++j)
    if (lambda[j] != 0.0) r = r + gt_[j].exact()->scaled(-lambda[j]);
  r = r.plus_const(-tau);
  MaxResult mx = global_max(r, spec_.support);
  SubproblemResult out;
  out.path = SubproblemPath::ExactPolynomial;
  if (mx.unbounded) {
    out.unbounded_growth = true;
    out.x_star = atom_domain_.upper;
    out.reduced_cost = r.eval(out.x_star);
  } else if (!std::isfinite(mx.arg)) {
    // finite limit at infinity is the supremum; place the atom at the cap
    out.x_star = atom_domain_.upper;
    out.reduced_cost = mx.value;
  } else {
    out.x_star = mx.arg;
    out.reduced_cost = mx.value;
  }
  return out;
}

SubproblemResult CgSolver::price(const std::vector<double>& lambda, double tau,
                                 bool with_objective) const {
  if (exact_path_) return price_exact(lambda, tau, with_objective);
  return price_numeric(lambda, tau, with_objective);
}

SubproblemResult CgSolver::solve_subproblem(const MasterSolution& master) const {
  return price(master.lambda, master.tau, /*with_objective=*/true);
}

AtomSet CgSolver::initialize_atoms() {
  AtomSet atoms(1e-10 * spec_.support_scale());
  double lo = atom_domain_.lower, hi = atom_domain_.upper;
  atoms.add(lo);
  atoms.add(hi);
  for (const auto& c : spec_.constraints) {
    double mid = 0.5 * (c.sigma_lo + c.sigma_hi);
    if (auto mono = as_monomial(c.g)) {
      auto [j, coeff] = *mono;
      double v = mid / coeff;
      if (v >= 0 || j % 2 == 1) {
        double x = (v >= 0) ? std::pow(v, 1.0 / j) : -std::pow(-v, 1.0 / j);
        if (atom_domain_.contains(x)) atoms.add(x);
      }
    }
  }
  for (int i = 1; i < 32; ++i) atoms.add(lo + (hi - lo) * i / 32.0);
  if (!spec_.support.bounded_above())
    for (int k = 1; k <= 8; ++k) atoms.add(lo + (hi - lo) * std::pow(0.5, k + 5));

  double dual_tol = 1e-8;
  for (int it = 0; it < 500; ++it) {
    lp::PhaseOneResult ph = lp::phase_one(build_master_lp(atoms));
    if (ph.feasible) return atoms;
    size_t m = gt_.size();
    std::vector<double> lambda(m);
    for (size_t j = 0; j < m; ++j) lambda[j] = ph.duals[2 * j] + ph.duals[2 * j + 1];
    double tau = ph.duals.back();
    SubproblemResult pr = price(lambda, tau, /*with_objective=*/false);
    double scale = 1.0 + std::abs(tau);
    for (double l : lambda) scale += std::abs(l);
    if (pr.reduced_cost <= dual_tol * scale || !atoms.add(pr.x_star))
      throw InfeasibleError(
          "initialize_atoms: moment set infeasible (phase-1 residual " +
          std::to_string(ph.residual) + ")");
  }
  throw InfeasibleError("initialize_atoms: phase-1 column generation did not converge");
}

BoundResult CgSolver::run() {
  BoundResult res;
  res.sense = spec_.sense;
  res.family = spec_.family;
  res.epsilon_used = spec_.cg_epsilon;
  res.search_cap_used = spec_.search_cap;
  AtomSet atoms = initialize_atoms();
  MasterSolution ms;
  int it = 0;
  for (it = 1; it <= kMaxCgIterations; ++it) {
    ms = solve_master(atoms);
    SubproblemResult sub = solve_subproblem(ms);
    res.trace.push_back({ms.objective, sub.reduced_cost, sub.x_star, sub.path});
    res.hit_search_cap = sub.unbounded_growth;
    if (sub.reduced_cost <= spec_.cg_epsilon) {
      res.converged = true;
      break;
    }
    if (!atoms.add(sub.x_star)) {
      // duplicate entering atom: retry on a finer local grid before stalling
      double h = std::max(1e-6 * spec_.support_scale(), 10.0 * atoms.dedup_tol());
      double a = std::max(atom_domain_.lower, sub.x_star - h);
      double b = std::min(atom_domain_.upper, sub.x_star + h);
      double bestx = sub.x_star, bestv = -kInf;
      for (int i = 0; i <= 512; ++i) {
        double x = a + (b - a) * i / 512.0;
        if (atoms.contains(x)) continue;
        double v = reduced_cost_at(x, ms.lambda, ms.tau, true);
        if (v > bestv) {
          bestv = v;
          bestx = x;
        }
      }
      if (bestv <= spec_.cg_epsilon || !atoms.add(bestx)) {
        res.stalled = true;
        break;
      }
    }
    if (it % 50 == 0 && atoms.size() > 4) {
      // drop zero-weight columns; they may re-enter later
      std::vector<size_t> kept;
      for (size_t i = 0; i < atoms.size(); ++i)
        if (i < ms.weights.size() && ms.weights[i] > 1e-12) kept.push_back(i);
      if (kept.size() >= 2) atoms.keep(kept);
    }
  }
  res.iterations = static_cast<int>(res.trace.size());
  res.bound = ms.objective;
  res.gap = res.trace.empty() ? 0.0 : res.trace.back().reduced_cost;
  for (size_t i = 0; i < atoms.size(); ++i) {
    double w = (i < ms.weights.size()) ? ms.weights[i] : 0.0;
    if (w > 1e-10) {
      res.atoms.push_back(atoms.atoms()[i]);
      res.weights.push_back(w);
    }
  }
  // deterministic output ordering
  std::vector<size_t> order(res.atoms.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return res.atoms[a] < res.atoms[b]; });
  std::vector<double> As, Ws;
  for (size_t i : order) {
    As.push_back(res.atoms[i]);
    Ws.push_back(res.weights[i]);
  }
  res.atoms = std::move(As);
  res.weights = std::move(Ws);
  return res;
}

MasterSolution solve_master(const AtomSet& atoms, const ProblemSpec& spec) {
  return CgSolver(spec).solve_master(atoms);
}

SubproblemResult solve_subproblem(const MasterSolution& duals, const ProblemSpec& spec) {
  return CgSolver(spec).solve_subproblem(duals);
}

AtomSet initialize_atoms(const ProblemSpec& spec) { return CgSolver(spec).initialize_atoms(); }

BoundResult run_cg(const ProblemSpec& spec) { return CgSolver(spec).run(); }

namespace {

ProblemSpec envelope_spec(const ProblemSpec& base, PiecewiseFunction target, Sense sense) {
  ProblemSpec s = base;
  s.family = MixtureFamily::dirac();
  s.target = std::move(target);
  s.sense = sense;
  s.cg_epsilon = 0.0;  // re-derive from the new target scale
  s.finalize_defaults();
  return s;
}

}  // namespace

MomentEnvelope moment_envelope(const ProblemSpec& spec) {
  MomentEnvelope env;
  PiecewiseFunction fx = PiecewiseFunction::monomial(spec.support, 1);
  PiecewiseFunction fx2 = PiecewiseFunction::monomial(spec.support, 2);
  BoundResult up = run_cg(envelope_spec(spec, fx, Sense::Upper));
  BoundResult down = run_cg(envelope_spec(spec, fx, Sense::Lower));
  env.mu_hi = up.bound;
  env.mu_lo = down.bound;
  // a capped certificate is inconclusive: the final pricing polynomial can
  // carry a vanishing positive leading coefficient from dual round-off even
  // when the moment is pinned.  Re-solve with a larger cap and call the value
  // unbounded only if it actually moves.
  auto cap_sensitive = [](const ProblemSpec& base, const BoundResult& r) {
    if (!r.hit_search_cap) return false;
    ProblemSpec wide = base;
    wide.search_cap = 4.0 * r.search_cap_used;
    BoundResult w = run_cg(wide);
    double sgn = base.sense == Sense::Upper ? 1.0 : -1.0;
    return sgn * (w.bound - r.bound) > 1e-6 * (1.0 + std::abs(r.bound));
  };
  env.mu_hi_unbounded = cap_sensitive(envelope_spec(spec, fx, Sense::Upper), up);
  env.mu_lo_unbounded = cap_sensitive(envelope_spec(spec, fx, Sense::Lower), down);

  auto var_at = [&](double t) {
    ProblemSpec s = envelope_spec(spec, fx2, Sense::Upper);
    s.constraints.push_back({PiecewiseFunction::monomial(spec.support, 1), t, t});
    BoundResult r = run_cg(s);
    if (!env.var_unbounded && cap_sensitive(s, r)) env.var_unbounded = true;
    return r.bound - t * t;
  };
  double a = env.mu_lo, b = env.mu_hi;
  if (!(b >= a)) std::swap(a, b);
  double best_t = a, best_v = -kInf;
  const int sweep = 17;
  for (int i = 0; i < sweep; ++i) {
    double t = (sweep == 1 || b == a) ? a : a + (b - a) * i / (sweep - 1);
    double v = var_at(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
    if (b == a) break;
  }
  if (b > a && !env.var_unbounded) {
    double h = (b - a) / (sweep - 1);
    auto [t, v] = golden_max(var_at, std::max(a, best_t - h), std::min(b, best_t + h),
                             1e-6 * (1.0 + std::abs(best_t)));
    if (v > best_v) best_v = v;
  }
  env.var_hi = best_v;
  return env;
}

}  // namespace spb
