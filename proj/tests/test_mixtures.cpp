#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spb/mixtures.hpp"

using namespace spb;

namespace {
const Domain kBox(0.0, 100.0);
}

TEST_CASE("uniform-from-zero transforms match the closed forms") {
  // E over Unif(0,x) of max(u,0) is x/2
  auto tf = transform(PiecewiseFunction::call_payoff(kBox, 0.0),
                      MixtureFamily::uniform_zero());
  REQUIRE(tf.has_exact());
  for (double x : {1.0, 7.5, 50.0, 99.0}) CHECK(tf(x) == doctest::Approx(x / 2));

  // E over Unif(0,x) of u^j is x^j/(j+1), coefficient-exact
  for (int j = 1; j <= 4; ++j) {
    auto tg = transform(PiecewiseFunction::monomial(kBox, j), MixtureFamily::uniform_zero());
    REQUIRE(tg.has_exact());
    REQUIRE(tg.exact()->pieces().size() == 1);
    const auto& pc = tg.exact()->pieces()[0];
    const Polynomial& q = pc.has_limit ? pc.quotient : pc.num;
    REQUIRE(q.degree() == j);
    for (int k = 0; k < j; ++k) CHECK(q.coeffs()[static_cast<size_t>(k)] == 0.0);
    CHECK(q.coeffs()[static_cast<size_t>(j)] == doctest::Approx(1.0 / (j + 1)).epsilon(1e-15));
  }
}

TEST_CASE("dirac transform is the identity") {
  auto tf = transform(PiecewiseFunction::monomial(kBox, 2), MixtureFamily::dirac());
  for (double x : {0.0, 3.0, 81.5}) CHECK(tf(x) == doctest::Approx(x * x));
}

TEST_CASE("khintchine transform basics") {
  auto tf = transform(PiecewiseFunction::monomial(kBox, 1), MixtureFamily::khintchine(50.0));
  CHECK(tf(70.0) == doctest::Approx(60.0));  // mean of Unif(50,70)
  CHECK(tf(30.0) == doctest::Approx(40.0));  // mean of Unif(30,50)
  // removable singularity at x = M
  CHECK(tf(50.0) == doctest::Approx(50.0));
  CHECK(tf(50.0 + 1e-8) == doctest::Approx(50.0).epsilon(1e-7));
}

TEST_CASE("khintchine transform is continuous at the mode") {
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    PiecewiseFunction base = PiecewiseFunction::from_polynomial(
        kBox, Polynomial({coeff(rng), coeff(rng), coeff(rng), coeff(rng)}));
    auto tf = transform(base, MixtureFamily::khintchine(45.0));
    double at = tf(45.0);
    CHECK(at == doctest::Approx(base.eval(45.0)).epsilon(1e-9));
    CHECK(tf(45.0 - 1e-7) == doctest::Approx(at).epsilon(1e-5));
    CHECK(tf(45.0 + 1e-7) == doctest::Approx(at).epsilon(1e-5));
  }
}

TEST_CASE("lognormal parameters") {
  LognormalParams p = lognormal_params(50.0, 13.75);
  CHECK(p.sigma_x == doctest::Approx(0.27003).epsilon(1e-4));
  CHECK(p.mu_x == doctest::Approx(3.87556).epsilon(1e-4));
  // mean / variance round-trip
  double mean = std::exp(p.mu_x + 0.5 * p.sigma_x * p.sigma_x);
  double var =
      (std::exp(p.sigma_x * p.sigma_x) - 1.0) * std::exp(2 * p.mu_x + p.sigma_x * p.sigma_x);
  CHECK(mean == doctest::Approx(50.0).epsilon(1e-10));
  CHECK(var == doctest::Approx(13.75 * 13.75).epsilon(1e-10));

  CHECK(lognormal_params(50.0, 50.0).sigma_x * lognormal_params(50.0, 50.0).sigma_x ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(lognormal_params(1.0, 1e-8).sigma_x == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("lognormal transform moments are exact on an unbounded support") {
  Domain half(0.0, kInf);
  auto t2 = transform(PiecewiseFunction::monomial(half, 2), MixtureFamily::lognormal(13.75));
  CHECK(t2(50.0) == doctest::Approx(2500.0 + 13.75 * 13.75).epsilon(1e-9));
  auto t1 = transform(PiecewiseFunction::monomial(half, 1), MixtureFamily::lognormal(13.75));
  CHECK(t1(50.0) == doctest::Approx(50.0).epsilon(1e-9));
  // a bounded base clamps mass past the boundary, so the box value is smaller
  auto tb = transform(PiecewiseFunction::monomial(kBox, 2), MixtureFamily::lognormal(13.75));
  CHECK(tb(50.0) < t2(50.0));
  CHECK(tb(50.0) > 0.9 * t2(50.0));
}

TEST_CASE("normal cdf and quantile") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-11));
  CHECK(normal_cdf(-1.96) == doctest::Approx(1.0 - 0.9750021048517795).epsilon(1e-11));
  for (double q : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999999})
    CHECK(normal_cdf(normal_quantile(q)) == doctest::Approx(q).epsilon(1e-10));
}

TEST_CASE("smoothed uniform pdf and cdf") {
  CHECK(smoothed_uniform_pdf(20, 30, 1000.0, 25.0) == doctest::Approx(0.1).epsilon(1e-9));
  // symmetry about the midpoint
  for (double eta : {1.0, 10.0}) {
    CHECK(smoothed_uniform_pdf(20, 30, eta, 22.0) ==
          doctest::Approx(smoothed_uniform_pdf(20, 30, eta, 28.0)).epsilon(1e-12));
  }
  CHECK(smoothed_uniform_pdf(20, 30, 5.0, -1e5) == doctest::Approx(0.0));
  CHECK(smoothed_uniform_cdf(20, 30, 10.0, -80.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(smoothed_uniform_cdf(20, 30, 10.0, 130.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(smoothed_uniform_cdf(20, 30, 10.0, 25.0) == doctest::Approx(0.5).epsilon(1e-9));

  // cdf equals the integral of the pdf
  double quad = integrate([](double u) { return smoothed_uniform_pdf(20, 30, 10.0, u); },
                          -20.0, 25.0);
  CHECK(smoothed_uniform_cdf(20, 30, 10.0, 25.0) == doctest::Approx(quad).epsilon(1e-8));
}

TEST_CASE("smoothed uniform converges to the uniform pdf") {
  double prev_sup = kInf;
  for (double eta : {10.0, 100.0, 1000.0, 10000.0}) {
    double sup = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      double u = 19.0 + 12.0 * i / 4000.0;
      if (std::abs(u - 20.0) < 0.1 || std::abs(u - 30.0) < 0.1) continue;
      double exact = (u > 20.0 && u < 30.0) ? 0.1 : 0.0;
      sup = std::max(sup, std::abs(smoothed_uniform_pdf(20, 30, eta, u) - exact));
    }
    CHECK(sup < prev_sup + 1e-15);
    prev_sup = sup;
  }
  CHECK(prev_sup < 1e-9);
}

TEST_CASE("component densities") {
  CHECK(component_pdf(MixtureFamily::khintchine(50.0), 70.0, 60.0) == doctest::Approx(0.05));
  CHECK(component_pdf(MixtureFamily::khintchine(50.0), 70.0, 40.0) == doctest::Approx(0.0));
  LognormalParams p = lognormal_params(50.0, 8.0);
  CHECK(component_cdf(MixtureFamily::lognormal(8.0), 50.0, std::exp(p.mu_x)) ==
        doctest::Approx(0.5).epsilon(1e-10));
  CHECK(component_pdf(MixtureFamily::smoothed_uniform(20.0, 4000.0), 30.0, 25.0) ==
        doctest::Approx(0.1).epsilon(1e-3));
  CHECK_THROWS_AS(component_pdf(MixtureFamily::dirac(), 50.0, 50.0), DomainError);
  CHECK(component_cdf(MixtureFamily::dirac(), 50.0, 49.0) == doctest::Approx(0.0));
  CHECK(component_cdf(MixtureFamily::dirac(), 50.0, 51.0) == doctest::Approx(1.0));
}

TEST_CASE("component densities integrate to one") {
  std::mt19937 rng(314159);
  std::uniform_real_distribution<double> xs(10.0, 90.0);
  std::vector<MixtureFamily> fams = {
      MixtureFamily::uniform_zero(), MixtureFamily::khintchine(45.0),
      MixtureFamily::lognormal(6.0), MixtureFamily::smoothed_uniform(45.0, 10.0)};
  for (const auto& fam : fams) {
    for (int trial = 0; trial < 25; ++trial) {
      double x = xs(rng);
      auto [lo, hi] = component_window(fam, x, 1e-12);
      double mass = integrate([&](double u) { return component_pdf(fam, x, u); }, lo, hi);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("exact transforms agree with quadrature") {
  std::mt19937 rng(271828);
  std::uniform_real_distribution<double> xs(0.5, 99.5);
  PiecewiseFunction base = PiecewiseFunction::call_payoff(kBox, 50.0);
  std::vector<MixtureFamily> fams = {MixtureFamily::uniform_zero(),
                                     MixtureFamily::khintchine(45.0),
                                     MixtureFamily::lognormal(9.0)};
  for (const auto& fam : fams) {
    auto tf = transform(base, fam);
    if (fam.kind != MixtureFamily::Kind::Lognormal) REQUIRE(tf.has_exact());
    for (int i = 0; i < 100; ++i) {
      double x = xs(rng);
      double exact = tf(x);
      auto [lo, hi] = component_window(fam, x, 1e-12);
      lo = std::max(lo, kBox.lower);
      auto f = [&](double u) { return component_pdf(fam, x, u) * base.eval(kBox.clamp(u)); };
      // split at the payoff kink so it never hides at a segment endpoint
      double quad = integrate(f, lo, std::clamp(50.0, lo, hi)) +
                    integrate(f, std::clamp(50.0, lo, hi), hi);
      CHECK(exact == doctest::Approx(quad).epsilon(1e-6).scale(1.0 + std::abs(exact)));
    }
  }
}

TEST_CASE("transform linearity") {
  std::mt19937 rng(161803);
  std::uniform_real_distribution<double> xs(0.5, 99.5);
  PiecewiseFunction f = PiecewiseFunction::call_payoff(kBox, 30.0);
  PiecewiseFunction g = PiecewiseFunction::monomial(kBox, 2);
  PiecewiseFunction combo = f.scaled(2.5) + g.scaled(-0.75);
  for (const auto& fam :
       {MixtureFamily::khintchine(45.0), MixtureFamily::lognormal(5.0),
        MixtureFamily::smoothed_uniform(45.0, 20.0)}) {
    auto tf = transform(f, fam);
    auto tg = transform(g, fam);
    auto tc = transform(combo, fam);
    for (int i = 0; i < 40; ++i) {
      double x = xs(rng);
      double lhs = tc(x);
      double rhs = 2.5 * tf(x) - 0.75 * tg(x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9).scale(1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("smoothed uniform transform approaches the khintchine transform") {
  PiecewiseFunction base = PiecewiseFunction::call_payoff(kBox, 50.0);
  auto kh = transform(base, MixtureFamily::khintchine(45.0));
  double prev = kInf;
  for (double eta : {5.0, 50.0, 500.0}) {
    auto sm = transform(base, MixtureFamily::smoothed_uniform(45.0, eta));
    double diff = 0.0;
    for (double x : {10.0, 30.0, 44.0, 60.0, 90.0}) diff = std::max(diff, std::abs(sm(x) - kh(x)));
    CHECK(diff < prev + 1e-12);
    prev = diff;
  }
  CHECK(prev < 1e-3);
}
