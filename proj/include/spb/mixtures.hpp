#pragma once

#include "spb/model.hpp"

#include <functional>
#include <optional>

namespace spb {

/// Parameters (mu_x, sigma_x) of a lognormal with mean x and variance alpha^2.
struct LognormalParams {
  double mu_x = 0.0;
  double sigma_x = 0.0;
};

LognormalParams lognormal_params(double x, double alpha);

/// Standard normal CDF, |error| <= 1e-12.
double normal_cdf(double z);
/// Inverse of normal_cdf, Newton-polished.
double normal_quantile(double q);

/// Logistic-difference density approximating Uniform(a, b).
double smoothed_uniform_pdf(double a, double b, double eta, double u);
/// Its CDF, evaluated in log-sum-exp-stable form.
double smoothed_uniform_cdf(double a, double b, double eta, double u);

/// Density / CDF of the component H_x at u. Dirac has no density.
double component_pdf(const MixtureFamily& family, double x, double u);
double component_cdf(const MixtureFamily& family, double x, double u);
/// [q, 1-q] quantile window of H_x (q small, e.g. 1e-6).
std::pair<double, double> component_window(const MixtureFamily& family, double x, double q);

/// Adaptive Gauss-Kronrod (G7/K15) quadrature, relative tolerance 1e-9.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-9);

/// x -> E_{H_x}(base). Exact piecewise-rational form when the family
/// produces one (Dirac, UniformZero, KhintchineUniform); lognormal uses
/// closed-form partial expectations for polynomial pieces; otherwise
/// adaptive quadrature against the component density.
class TransformedFunction {
public:
  TransformedFunction() = default;

  const MixtureFamily& family() const { return family_; }
  const PiecewiseFunction& base() const { return base_; }
  const std::optional<PiecewiseFunction>& exact() const { return exact_; }
  bool has_exact() const { return exact_.has_value(); }

  double operator()(double x) const;

private:
  friend TransformedFunction transform(const PiecewiseFunction&, const MixtureFamily&);
  MixtureFamily family_;
  PiecewiseFunction base_;
  std::optional<PiecewiseFunction> exact_;
  bool lognormal_closed_ = false;
  double quadrature_value(double x) const;
  double lognormal_closed_value(double x) const;
};

TransformedFunction transform(const PiecewiseFunction& base, const MixtureFamily& family);

}  // namespace spb
