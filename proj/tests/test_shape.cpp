#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spb/shape.hpp"

using namespace spb;

TEST_CASE("khintchine two-atom mixture density") {
  // components Unif(40,50) and Unif(50,60) with equal weights: flat density
  auto dist = make_distribution(MixtureFamily::khintchine(50.0), {40.0, 60.0}, {0.5, 0.5});
  CHECK(mixture_pdf(dist, 45.0) == doctest::Approx(0.05));
  CHECK(mixture_pdf(dist, 55.0) == doctest::Approx(0.05));
  CHECK(mixture_pdf(dist, 39.0) == doctest::Approx(0.0));
  CHECK(mixture_cdf(dist, 50.0) == doctest::Approx(0.5));
  CHECK(mixture_cdf(dist, 60.0) == doctest::Approx(1.0));
  CHECK(is_unimodal(dist));
}

TEST_CASE("mixture cdf is monotone and normalized") {
  for (const auto& fam :
       {MixtureFamily::khintchine(45.0), MixtureFamily::lognormal(6.0),
        MixtureFamily::smoothed_uniform(45.0, 30.0)}) {
    auto dist = make_distribution(fam, {20.0, 55.0, 80.0}, {0.25, 0.5, 0.25});
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
      double u = dist.u_lo + (dist.u_hi - dist.u_lo) * i / 400.0;
      double c = mixture_cdf(dist, u);
      CHECK(c >= prev - 1e-12);
      CHECK(c >= -1e-12);
      CHECK(c <= 1.0 + 1e-12);
      prev = c;
    }
    CHECK(mixture_cdf(dist, dist.u_hi) == doctest::Approx(1.0).epsilon(1e-5));
    // pdf mass over the window accounts for all but the quantile tails
    const int n = 4000;
    double h = (dist.u_hi - dist.u_lo) / n, mass = 0.0;
    for (int i = 0; i <= n; ++i) {
      double w = (i == 0 || i == n) ? 0.5 : 1.0;
      mass += w * mixture_pdf(dist, dist.u_lo + i * h);
    }
    mass *= h;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("weight validation") {
  auto dist = make_distribution(MixtureFamily::khintchine(50.0), {40.0, 60.0}, {0.5, 0.5});
  CHECK_NOTHROW(dist.validate());
  dist.weights = {0.5, 0.6};
  CHECK_THROWS_AS(dist.validate(), ValidationError);
  dist.weights = {1.5, -0.5};
  CHECK_THROWS_AS(dist.validate(), ValidationError);
}

TEST_CASE("unimodality detector") {
  auto single = make_distribution(MixtureFamily::lognormal(8.0), {50.0}, {1.0});
  CHECK(is_unimodal(single));

  auto bimodal = make_distribution(MixtureFamily::lognormal(1.0), {10.0, 200.0}, {0.5, 0.5});
  CHECK_FALSE(is_unimodal(bimodal));

  // every khintchine mixture is unimodal at the common mode by construction
  auto kh = make_distribution(MixtureFamily::khintchine(45.0), {5.0, 30.0, 44.0, 90.0},
                              {0.1, 0.3, 0.4, 0.2});
  CHECK(is_unimodal(kh));

  auto dirac_pair =
      make_distribution(MixtureFamily::dirac(), {40.0, 60.0}, {0.5, 0.5});
  CHECK_THROWS_AS(is_unimodal(dirac_pair), DomainError);
}

TEST_CASE("bisect_alpha validates the bracket") {
  ProblemSpec s = standard_policy_problem(49.9975, 102.017, 49.50, kInf, 2);
  s.family = MixtureFamily::lognormal(1.0);
  CHECK_THROWS_AS(bisect_alpha(s, 5.0, 5.0, 0.01), ValidationError);
  CHECK_THROWS_AS(bisect_alpha(s, -1.0, 5.0, 0.01), ValidationError);
  CHECK_THROWS_AS(bisect_alpha(s, 1.0, 5.0, -0.1), ValidationError);
  // alpha_hi above the variance envelope is rejected before any bisection
  CHECK_THROWS_AS(bisect_alpha(s, 1.0, 50.0, 0.01), ValidationError);
  // both endpoints unimodal: no sign change to bisect
  CHECK_THROWS_AS(bisect_alpha(s, 9.0, 10.0, 0.01), ValidationError);
}

TEST_CASE("bisect_alpha finds the unimodality transition") {
  ProblemSpec s = standard_policy_problem(49.9975, 102.017, 49.50, kInf, 2);
  s.family = MixtureFamily::lognormal(1.0);
  BisectionResult r = bisect_alpha(s, 1.0, 10.0, 0.05);
  CHECK(r.unimodal);
  CHECK(r.alpha_star > 1.0);
  CHECK(r.alpha_star < 10.0);
  CHECK(r.solve.converged);
  CHECK(r.bound == doctest::Approx(r.solve.bound));
  // the returned alpha is the smallest unimodal one seen, so the trace must
  // contain a non-unimodal alpha within eps below it
  bool tight = false;
  for (const auto& t : r.trace)
    if (!t.unimodal && r.alpha_star - t.alpha <= 0.05 + 1e-12) tight = true;
  CHECK(tight);
  // smoothness premium: the unimodal-lognormal bound stays below the
  // unimodal-only bound at the same mode
  ProblemSpec k = s;
  k.family = MixtureFamily::khintchine(49.50);
  BoundResult kh = run_cg(k);
  REQUIRE(kh.converged);
  CHECK(r.bound < kh.bound + 1e-9);
}

TEST_CASE("ler edge identities") {
  auto fam = MixtureFamily::dirac();
  LerBounds at_zero = ler_bounds(50.0, 225.0, 100.0, 0.0, fam);
  CHECK(at_zero.ler_lo == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(at_zero.ler_hi == doctest::Approx(0.0).epsilon(1e-8));
  LerBounds at_cap = ler_bounds(50.0, 225.0, 100.0, 100.0, fam);
  CHECK(at_cap.ler_lo == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(at_cap.ler_hi == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("ler bounds are ordered and in [0,1]") {
  for (double d : {10.0, 45.0, 70.0}) {
    LerBounds plain = ler_bounds(50.0, 225.0, 100.0, d, MixtureFamily::dirac());
    LerBounds uni = ler_bounds(50.0, 225.0, 100.0, d, MixtureFamily::khintchine(45.0));
    for (const auto* lb : {&plain, &uni}) {
      CHECK(lb->ler_lo <= lb->ler_hi + 1e-9);
      CHECK(lb->ler_lo >= -1e-9);
      CHECK(lb->ler_hi <= 1.0 + 1e-9);
    }
    // shape information narrows the gap
    CHECK(uni.ler_hi - uni.ler_lo <= plain.ler_hi - plain.ler_lo + 1e-9);
  }
}

TEST_CASE("export_distribution tables") {
  auto dist = make_distribution(MixtureFamily::lognormal(8.0), {40.0, 60.0}, {0.5, 0.5});
  DistributionTable t = export_distribution(dist, 4096);
  REQUIRE_FALSE(t.atom_table);
  REQUIRE(t.u.size() == 4096);
  CHECK(t.u.front() == doctest::Approx(dist.u_lo));
  CHECK(t.u.back() == doctest::Approx(dist.u_hi));
  CHECK(t.cdf.front() <= 1e-4);
  CHECK(t.cdf.back() >= 0.999);
  for (size_t i = 1; i < t.cdf.size(); ++i) CHECK(t.cdf[i] >= t.cdf[i - 1]);

  DistributionTable ends = export_distribution(dist, 2);
  CHECK(ends.u.size() == 2);
  CHECK_THROWS_AS(export_distribution(dist, 1), ValidationError);

  auto atoms = make_distribution(MixtureFamily::dirac(), {30.0, 70.0}, {0.25, 0.75});
  DistributionTable at = export_distribution(atoms, 100);
  REQUIRE(at.atom_table);
  REQUIRE(at.atoms.size() == 2);
  CHECK(at.weights[1] == doctest::Approx(0.75));
}

TEST_CASE("make_distribution from a solver result") {
  ProblemSpec s = standard_policy_problem(50, 225, 50, 100, 2);
  s.family = MixtureFamily::khintchine(50.0);
  BoundResult r = run_cg(s);
  REQUIRE(r.converged);
  MixtureDistribution dist = make_distribution(r);
  CHECK_NOTHROW(dist.validate());
  CHECK(dist.atoms.size() == r.atoms.size());
  CHECK(is_unimodal(dist));
  // the extremal mixture reproduces the pinned moments
  const int n = 20000;
  double h = (dist.u_hi - dist.u_lo) / n, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i <= n; ++i) {
    double u = dist.u_lo + i * h;
    double w = ((i == 0 || i == n) ? 0.5 : 1.0) * mixture_pdf(dist, u) * h;
    m1 += w * u;
    m2 += w * u * u;
  }
  CHECK(m1 == doctest::Approx(50.0).epsilon(1e-3));
  CHECK(m2 == doctest::Approx(2725.0).epsilon(1e-3));
}
