#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spb/cg.hpp"
#include "spb/oracles.hpp"

using namespace spb;

namespace {

ProblemSpec pinned_mean_spec(double mu, Domain support, double cap = 0.0) {
  ProblemSpec s;
  s.support = support;
  s.target = PiecewiseFunction::monomial(support, 1);
  s.constraints.push_back({PiecewiseFunction::monomial(support, 1), mu, mu});
  s.search_cap = cap;
  s.finalize_defaults();
  s.validate();
  return s;
}

void check_theorem_certificate(const BoundResult& r, double scale) {
  REQUIRE(r.converged);
  CHECK(r.gap <= r.epsilon_used);
  // certificate: final bound dominated by every iterate's objective + gap,
  // and master objective is nondecreasing (internal max space)
  double sgn = r.sense == Sense::Upper ? 1.0 : -1.0;
  double final_internal = sgn * r.bound;
  double prev = -kInf;
  for (const auto& t : r.trace) {
    double internal = sgn * t.master_objective;
    CHECK(internal >= prev - 1e-9 * scale);
    prev = internal;
    CHECK(final_internal >= internal - 1e-7 * scale);
    CHECK(final_internal <= internal + t.reduced_cost + 1e-7 * scale);
  }
}

}  // namespace

TEST_CASE("master: forced point mass") {
  ProblemSpec s;
  s.support = Domain(0, 100);
  s.target = PiecewiseFunction::call_payoff(s.support, 25.0);
  s.constraints.push_back({PiecewiseFunction::monomial(s.support, 1), 50.0, 50.0});
  s.finalize_defaults();
  AtomSet J(1e-8);
  J.add(50.0);
  MasterSolution ms = solve_master(J, s);
  CHECK(ms.weights[0] == doctest::Approx(1.0));
  CHECK(ms.objective == doctest::Approx(25.0));
}

TEST_CASE("master: atom set too coarse for the moments") {
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  AtomSet J(1e-8);
  J.add(0.0);
  J.add(100.0);
  CHECK_THROWS_AS(solve_master(J, s), InfeasibleError);
}

TEST_CASE("master: two-atom variance maximization") {
  ProblemSpec s;
  s.support = Domain(0, 100);
  s.target = PiecewiseFunction::monomial(s.support, 2);
  s.constraints.push_back({PiecewiseFunction::monomial(s.support, 1), 50.0, 50.0});
  s.finalize_defaults();
  AtomSet J(1e-8);
  J.add(25.0);
  J.add(75.0);
  MasterSolution ms = solve_master(J, s);
  CHECK(ms.weights[0] == doctest::Approx(0.5));
  CHECK(ms.weights[1] == doctest::Approx(0.5));
  CHECK(ms.objective == doctest::Approx(3125.0));
}

TEST_CASE("subproblem: zero duals maximize the target") {
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  MasterSolution duals;
  duals.lambda = {0.0, 0.0};
  duals.tau = 0.0;
  SubproblemResult r = solve_subproblem(duals, s);
  CHECK(r.path == SubproblemPath::ExactPolynomial);
  CHECK(r.x_star == doctest::Approx(100.0));
  CHECK(r.reduced_cost == doctest::Approx(50.0));
}

TEST_CASE("subproblem: piecewise-linear dual assembly") {
  // r(x) = max(x-50,0) - x + 10, maximal at x = 0 with value 10
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  MasterSolution duals;
  duals.lambda = {1.0, 0.0};
  duals.tau = -10.0;
  SubproblemResult r = solve_subproblem(duals, s);
  CHECK(r.x_star == doctest::Approx(0.0));
  CHECK(r.reduced_cost == doctest::Approx(10.0));
}

TEST_CASE("subproblem: quadratic vertex") {
  // f = (x-mu)^2 with mu = 30, lambda = 0, tau = 0 on [0,100]: max at x=100
  ProblemSpec s;
  s.support = Domain(0, 100);
  s.target = PiecewiseFunction::from_polynomial(s.support, Polynomial({900, -60, 1}));
  s.constraints.push_back({PiecewiseFunction::monomial(s.support, 1), 30.0, 30.0});
  s.finalize_defaults();
  MasterSolution duals;
  duals.lambda = {0.0};
  duals.tau = 0.0;
  SubproblemResult r = solve_subproblem(duals, s);
  CHECK(r.x_star == doctest::Approx(100.0));
  // and with the sign flipped via lower sense, -(x-30)^2 peaks at 30 with value 0
  ProblemSpec sl = s;
  sl.sense = Sense::Lower;
  SubproblemResult rl = solve_subproblem(duals, sl);
  CHECK(rl.x_star == doctest::Approx(30.0));
  CHECK(rl.reduced_cost == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("initialize_atoms finds a feasible set") {
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  AtomSet J = initialize_atoms(s);
  CHECK(J.size() >= 2);
  CHECK_NOTHROW(solve_master(J, s));
}

TEST_CASE("initialize_atoms rejects impossible moments") {
  ProblemSpec s = pinned_mean_spec(50.0, Domain(0, 40));
  CHECK_THROWS_AS(initialize_atoms(s), InfeasibleError);

  ProblemSpec j;
  j.support = Domain(0, 100);
  j.target = PiecewiseFunction::call_payoff(j.support, 50.0);
  j.constraints.push_back({PiecewiseFunction::monomial(j.support, 1), 50.0, 50.0});
  j.constraints.push_back({PiecewiseFunction::monomial(j.support, 2), 2000.0, 2000.0});
  j.finalize_defaults();
  CHECK_THROWS_AS(initialize_atoms(j), InfeasibleError);
}

TEST_CASE("run_cg reproduces the closed-form mean-variance call bound") {
  ProblemSpec s = standard_policy_problem(50.0, 10.1 * 10.1, 50.0, kInf, 2);
  BoundResult r = run_cg(s);
  REQUIRE(r.converged);
  CHECK(r.bound == doctest::Approx(0.5 * 10.1).epsilon(1e-6));
  CHECK(r.bound ==
        doctest::Approx(oracles::lo_upper_bound(50.0, 10.1, 50.0)).epsilon(1e-6));
  check_theorem_certificate(r, 50.0);
}

TEST_CASE("pinned objective converges immediately") {
  ProblemSpec s = pinned_mean_spec(50.0, Domain(0, 100));
  for (Sense sense : {Sense::Upper, Sense::Lower}) {
    s.sense = sense;
    BoundResult r = run_cg(s);
    REQUIRE(r.converged);
    CHECK(r.bound == doctest::Approx(50.0).epsilon(1e-10));
    CHECK(r.iterations == 1);
    CHECK(r.gap <= r.epsilon_used);
  }
}

TEST_CASE("unimodality tightens the upper bound") {
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  BoundResult plain = run_cg(s);
  ProblemSpec u = s;
  u.family = MixtureFamily::khintchine(50.0);
  BoundResult uni = run_cg(u);
  REQUIRE(plain.converged);
  REQUIRE(uni.converged);
  CHECK(uni.bound < plain.bound - 0.1);
  check_theorem_certificate(plain, 50.0);
  check_theorem_certificate(uni, 50.0);
}

TEST_CASE("upper bound dominates lower bound across families") {
  for (auto fam : {MixtureFamily::dirac(), MixtureFamily::khintchine(45.0),
                   MixtureFamily::lognormal(5.0)}) {
    ProblemSpec s = standard_policy_problem(50, 225, 40, 100, 2);
    s.family = fam;
    BoundResult up = run_cg(s);
    s.sense = Sense::Lower;
    BoundResult down = run_cg(s);
    REQUIRE(up.converged);
    REQUIRE(down.converged);
    CHECK(up.bound >= down.bound - 1e-9);
    check_theorem_certificate(up, 50.0);
    check_theorem_certificate(down, 50.0);
  }
}

TEST_CASE("final support stays small after pruning") {
  for (double d : {10.0, 35.0, 50.0, 80.0}) {
    ProblemSpec s = standard_policy_problem(50, 225, d, 100, 2);
    BoundResult r = run_cg(s);
    REQUIRE(r.converged);
    size_t m = s.constraints.size();
    CHECK(r.atoms.size() <= 2 * m + 2);
    double total = 0.0;
    for (double w : r.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("grid oracle agreement on a bounded instance") {
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  BoundResult r = run_cg(s);
  double grid = oracles::grid_lp_bound(s, {20001, 0.0});
  CHECK(r.bound == doctest::Approx(grid).epsilon(1e-4));
}

TEST_CASE("moment envelope: pinned moments") {
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  MomentEnvelope env = moment_envelope(s);
  CHECK(env.mu_lo == doctest::Approx(50.0).epsilon(1e-8));
  CHECK(env.mu_hi == doctest::Approx(50.0).epsilon(1e-8));
  CHECK(env.var_hi == doctest::Approx(225.0).epsilon(1e-6));
  CHECK_FALSE(env.var_unbounded);
}

TEST_CASE("moment envelope: mean-only constraint on a box") {
  ProblemSpec s = pinned_mean_spec(50.0, Domain(0, 100));
  MomentEnvelope env = moment_envelope(s);
  CHECK(env.mu_lo == doctest::Approx(50.0).epsilon(1e-8));
  CHECK(env.mu_hi == doctest::Approx(50.0).epsilon(1e-8));
  CHECK(env.var_hi == doctest::Approx(2500.0).epsilon(1e-6));
}

TEST_CASE("moment envelope: unbounded variance flag") {
  ProblemSpec s = pinned_mean_spec(50.0, Domain(0, kInf), 5000.0);
  MomentEnvelope env = moment_envelope(s);
  CHECK(env.var_unbounded);
}

TEST_CASE("interval moment constraints") {
  // loosening the variance band can only widen the bound
  ProblemSpec tight = standard_policy_problem(50, 225, 50, 100, 2);
  ProblemSpec loose = tight;
  loose.constraints[1].sigma_lo = 2500.0 + 100.0;
  loose.constraints[1].sigma_hi = 2500.0 + 400.0;
  BoundResult rt = run_cg(tight);
  BoundResult rl = run_cg(loose);
  REQUIRE(rt.converged);
  REQUIRE(rl.converged);
  CHECK(rl.bound >= rt.bound - 1e-7);
  check_theorem_certificate(rl, 50.0);
}

TEST_CASE("option-constrained variance problem runs") {
  ProblemSpec s = option_constrained_problem({{50.0, 5.05}}, 50.0);
  BoundResult up = run_cg(s);
  REQUIRE(up.converged);
  // consistency: a distribution matching the Lo-style price c = sigma/2 at
  // d = mu has variance at least near sigma^2 under the upper bound
  CHECK(up.bound > 0.0);
  s.sense = Sense::Lower;
  BoundResult down = run_cg(s);
  REQUIRE(down.converged);
  CHECK(up.bound >= down.bound);
}

TEST_CASE("smoothed-uniform family converges via the numeric path") {
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  s.family = MixtureFamily::smoothed_uniform(50.0, 20.0);
  BoundResult r = run_cg(s);
  REQUIRE(r.converged);
  CHECK(r.trace.front().path == SubproblemPath::NumericSearch);
  ProblemSpec k = s;
  k.family = MixtureFamily::khintchine(50.0);
  BoundResult kr = run_cg(k);
  CHECK(std::abs(r.bound - kr.bound) / kr.bound < 0.02);
}
