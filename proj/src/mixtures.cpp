#include "spb/mixtures.hpp"

#include <algorithm>
#include <cmath>

namespace spb {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double eval_clamped(const PiecewiseFunction& f, double u) {
  return f.eval(f.support().clamp(u));
}

// --- Gauss-Kronrod 7/15 pair on [-1, 1] ---
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkResult {
  double kronrod;
  double err;
};

GkResult gk15(const std::function<double(double)>& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double x = h * kXgk[i];
    double s = f(c - x) + f(c + x);
    resk += kWgk[i] * s;
    if (i % 2 == 1) resg += kWg[i / 2] * s;
  }
  return {resk * h, std::abs((resk - resg) * h)};
}

struct AdaptState {
  const std::function<double(double)>* f;
  double rel_tol;
  double scale;
  long evals = 0;
  double leftover_err = 0.0;
};

double adapt(AdaptState& st, double a, double b, int depth) {
  GkResult r = gk15(*st.f, a, b);
  st.evals += 15;
  double tol = st.rel_tol * std::max(std::abs(r.kronrod), st.scale);
  // force a few levels of bisection: features hugging a segment endpoint are
  // invisible to the G7/K15 nodes and would be accepted with a zero estimate
  if ((r.err <= tol && depth >= 3) || depth >= 18) {
    if (depth >= 18 && r.err > tol) st.leftover_err += r.err;
    return r.kronrod;
  }
  double m = 0.5 * (a + b);
  return adapt(st, a, m, depth + 1) + adapt(st, m, b, depth + 1);
}

double integrate_segments(const std::function<double(double)>& f,
                          const std::vector<double>& cuts, double rel_tol) {
  AdaptState st{&f, rel_tol, 0.0, 0, 0.0};
  // first pass for a magnitude scale
  double rough = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    rough += gk15(f, cuts[i], cuts[i + 1]).kronrod;
  st.scale = 1e-3 * std::abs(rough) + 1e-300;
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) total += adapt(st, cuts[i], cuts[i + 1], 0);
  if (st.leftover_err > 1e-6 * std::max(1.0, std::abs(total)))
    throw NumericError("integrate: did not converge after max refinement (residual error " +
                       std::to_string(st.leftover_err) + ")");
  return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  return integrate_segments(f, {a, b}, rel_tol);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_quantile(double q) {
  if (!(q > 0 && q < 1)) throw DomainError("normal_quantile: q in (0,1) required");
  // Acklam's rational approximation, then Newton polish
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (q < plow) {
    double u = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (q <= 1 - plow) {
    double u = q - 0.5, t = u * u;
    x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
        (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
  } else {
    double u = std::sqrt(-2.0 * std::log(1 - q));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  for (int it = 0; it < 3; ++it) {
    double e = normal_cdf(x) - q;
    double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    if (pdf <= 0) break;
    x -= e / pdf;
  }
  return x;
}

LognormalParams lognormal_params(double x, double alpha) {
  if (!(x > 0)) throw DomainError("lognormal_params: x must be > 0");
  if (!(alpha > 0)) throw DomainError("lognormal_params: alpha must be > 0");
  double s2 = std::log1p(alpha * alpha / (x * x));
  return {std::log(x) - 0.5 * s2, std::sqrt(s2)};
}

double smoothed_uniform_pdf(double a, double b, double eta, double u) {
  if (!(b > a) || !(eta > 0)) throw DomainError("smoothed_uniform_pdf: need b > a, eta > 0");
  return (logistic(eta * (u - a)) - logistic(eta * (u - b))) / (b - a);
}

double smoothed_uniform_cdf(double a, double b, double eta, double u) {
  if (!(b > a) || !(eta > 0)) throw DomainError("smoothed_uniform_cdf: need b > a, eta > 0");
  double v = 1.0 - (softplus(-eta * (u - b)) - softplus(-eta * (u - a))) / (eta * (b - a));
  return std::clamp(v, 0.0, 1.0);
}

namespace {

// Effective (a, b) of a possibly-degenerate uniform-type component.
std::pair<double, double> uniform_ab(double x, double M) {
  double a = std::min(x, M), b = std::max(x, M);
  double w = b - a;
  double minw = 1e-9 * (1.0 + std::max(std::abs(a), std::abs(b)));
  if (w < minw) b = a + minw;
  return {a, b};
}

}  // namespace

double component_pdf(const MixtureFamily& family, double x, double u) {
  using K = MixtureFamily::Kind;
  switch (family.kind) {
    case K::Dirac:
      throw DomainError("component_pdf: Dirac has no density");
    case K::UniformZero: {
      auto [a, b] = uniform_ab(0.0, x);
      return (u >= a && u <= b) ? 1.0 / (b - a) : 0.0;
    }
    case K::KhintchineUniform: {
      auto [a, b] = uniform_ab(x, family.mode);
      return (u >= a && u <= b) ? 1.0 / (b - a) : 0.0;
    }
    case K::Lognormal: {
      if (u <= 0) return 0.0;
      LognormalParams p = lognormal_params(x, family.alpha);
      double z = (std::log(u) - p.mu_x) / p.sigma_x;
      return kInvSqrt2Pi / (u * p.sigma_x) * std::exp(-0.5 * z * z);
    }
    case K::SmoothedUniform: {
      double a = std::min(x, family.mode), b = std::max(x, family.mode);
      if (b - a < 1e-12 * (1.0 + std::abs(a))) {
        // b -> a limit: logistic density with scale 1/eta
        double s = logistic(family.eta * (u - a));
        return family.eta * s * (1.0 - s);
      }
      return smoothed_uniform_pdf(a, b, family.eta, u);
    }
  }
  return 0.0;
}

double component_cdf(const MixtureFamily& family, double x, double u) {
  using K = MixtureFamily::Kind;
  switch (family.kind) {
    case K::Dirac:
      return u >= x ? 1.0 : 0.0;
    case K::UniformZero: {
      auto [a, b] = uniform_ab(0.0, x);
      return std::clamp((u - a) / (b - a), 0.0, 1.0);
    }
    case K::KhintchineUniform: {
      auto [a, b] = uniform_ab(x, family.mode);
      return std::clamp((u - a) / (b - a), 0.0, 1.0);
    }
    case K::Lognormal: {
      if (u <= 0) return 0.0;
      LognormalParams p = lognormal_params(x, family.alpha);
      return normal_cdf((std::log(u) - p.mu_x) / p.sigma_x);
    }
    case K::SmoothedUniform: {
      double a = std::min(x, family.mode), b = std::max(x, family.mode);
      if (b - a < 1e-12 * (1.0 + std::abs(a))) return logistic(family.eta * (u - a));
      return smoothed_uniform_cdf(a, b, family.eta, u);
    }
  }
  return 0.0;
}

std::pair<double, double> component_window(const MixtureFamily& family, double x, double q) {
  using K = MixtureFamily::Kind;
  switch (family.kind) {
    case K::Dirac:
      return {x, x};
    case K::UniformZero: {
      auto [a, b] = uniform_ab(0.0, x);
      return {a + q * (b - a), b - q * (b - a)};
    }
    case K::KhintchineUniform: {
      auto [a, b] = uniform_ab(x, family.mode);
      return {a + q * (b - a), b - q * (b - a)};
    }
    case K::Lognormal: {
      LognormalParams p = lognormal_params(x, family.alpha);
      double z = normal_quantile(q);
      return {std::exp(p.mu_x + p.sigma_x * z), std::exp(p.mu_x - p.sigma_x * z)};
    }
    case K::SmoothedUniform: {
      double a = std::min(x, family.mode), b = std::max(x, family.mode);
      double pad = (std::log(1.0 / q) + 5.0) / family.eta;
      return {a - pad, b + pad};
    }
  }
  return {x, x};
}

// ---------------------------------------------------------------------------

double TransformedFunction::lognormal_closed_value(double x) const {
  double alpha = family_.alpha;
  double xe = std::max(x, 1e-9 * (1.0 + alpha));
  LognormalParams p = lognormal_params(xe, alpha);
  const Domain& sup = base_.support();
  auto Phi_d = [&](double t, int k) {
    if (t <= 0.0) return 0.0;
    if (t == kInf) return 1.0;
    return normal_cdf((std::log(t) - p.mu_x) / p.sigma_x - k * p.sigma_x);
  };
  double total = 0.0;
  // mass outside the base support uses the boundary value (constant extension)
  if (sup.lower > 0)
    total += base_.eval(sup.lower) * Phi_d(sup.lower, 0);
  if (sup.bounded_above())
    total += base_.eval(sup.upper) * (1.0 - Phi_d(sup.upper, 0));
  const auto& breaks = base_.breakpoints();
  for (size_t i = 0; i < base_.pieces().size(); ++i) {
    double lo = (i == 0) ? sup.lower : breaks[i - 1];
    double hi = (i == breaks.size()) ? sup.upper : breaks[i];
    lo = std::max(lo, 0.0);
    if (!(hi > lo)) continue;
    const auto& pc = base_.pieces()[i];
    const Polynomial& poly = pc.has_limit ? pc.quotient : pc.num;
    const auto& cf = poly.coeffs();
    for (size_t k = 0; k < cf.size(); ++k) {
      if (cf[k] == 0.0) continue;
      int ki = static_cast<int>(k);
      double moment = std::exp(ki * p.mu_x + 0.5 * ki * ki * p.sigma_x * p.sigma_x);
      total += cf[k] * moment * (Phi_d(hi, ki) - Phi_d(lo, ki));
    }
  }
  return total;
}

double TransformedFunction::quadrature_value(double x) const {
  using K = MixtureFamily::Kind;
  if (family_.kind == K::Lognormal) {
    double alpha = family_.alpha;
    double xe = std::max(x, 1e-9 * (1.0 + alpha));
    LognormalParams p = lognormal_params(xe, alpha);
    // substitute u = exp(mu + sigma t): integrand g(u) phi(t)
    auto f = [&](double t) {
      double u = std::exp(p.mu_x + p.sigma_x * t);
      return eval_clamped(base_, u) * kInvSqrt2Pi * std::exp(-0.5 * t * t);
    };
    std::vector<double> cuts{-8.5};
    auto add_cut = [&](double u) {
      if (u <= 0) return;
      double t = (std::log(u) - p.mu_x) / p.sigma_x;
      if (t > -8.5 && t < 8.5) cuts.push_back(t);
    };
    for (double b : base_.breakpoints()) add_cut(b);
    add_cut(base_.support().lower);
    if (base_.support().bounded_above()) add_cut(base_.support().upper);
    cuts.push_back(8.5);
    std::sort(cuts.begin(), cuts.end());
    return integrate_segments(f, cuts, 1e-9);
  }
  if (family_.kind == K::SmoothedUniform) {
    double a = std::min(x, family_.mode), b = std::max(x, family_.mode);
    double eta = family_.eta;
    double pad = 40.0 / eta;  // logistic tails below 1e-14 of the peak
    double lo = a - pad, hi = b + pad;
    auto f = [&](double u) { return eval_clamped(base_, u) * component_pdf(family_, x, u); };
    std::vector<double> cuts{lo};
    for (double br : base_.breakpoints())
      if (br > lo && br < hi) cuts.push_back(br);
    double w = 25.0 / eta;  // isolate each logistic transition in its own segments
    for (double edge : {a, b, base_.support().lower,
                        base_.support().bounded_above() ? base_.support().upper : hi})
      for (double c : {edge - w, edge, edge + w})
        if (c > lo && c < hi) cuts.push_back(c);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    return integrate_segments(f, cuts, 1e-9);
  }
  // generic fallback: integrate against the component density over its window
  auto [lo, hi] = component_window(family_, x, 1e-12);
  auto f = [&](double u) { return eval_clamped(base_, u) * component_pdf(family_, x, u); };
  return integrate(f, lo, hi);
}

double TransformedFunction::operator()(double x) const {
  if (exact_) return exact_->eval(x);
  if (lognormal_closed_) return lognormal_closed_value(x);
  return quadrature_value(x);
}

TransformedFunction transform(const PiecewiseFunction& base, const MixtureFamily& family) {
  family.validate();
  TransformedFunction t;
  t.family_ = family;
  t.base_ = base;
  using K = MixtureFamily::Kind;
  switch (family.kind) {
    case K::Dirac:
      t.exact_ = base;  // identity
      break;
    case K::UniformZero:
    case K::KhintchineUniform: {
      double c = (family.kind == K::UniformZero) ? 0.0 : family.mode;
      if (family.kind == K::UniformZero && std::abs(base.support().lower) > 1e-12)
        throw ValidationError("transform: UniformZero needs support starting at 0");
      // E_{H_x}(g) = (1/(x-c)) * Integral_c^x g(u) du, removable at x = c
      PiecewiseFunction A = base.antiderivative_from(c);
      std::vector<RationalPiece> pieces;
      pieces.reserve(A.pieces().size());
      for (const auto& pc : A.pieces())
        pieces.push_back(RationalPiece::rational(pc.num, c));
      t.exact_ = PiecewiseFunction(A.support(), A.breakpoints(), std::move(pieces));
      break;
    }
    case K::Lognormal:
      t.lognormal_closed_ = base.all_polynomial();
      break;
    case K::SmoothedUniform:
      break;
  }
  return t;
}

}  // namespace spb
