#include "spb/polyalg.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>

namespace spb {

namespace {
constexpr double kCanonTol = 1e-12;
constexpr double kRootResidualTol = 1e-10;
}  // namespace

Polynomial Polynomial::monomial(int j, double coeff) {
  std::vector<double> c(static_cast<size_t>(j) + 1, 0.0);
  c.back() = coeff;
  return Polynomial(std::move(c));
}

void Polynomial::canonicalize() {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  if (m == 0.0) {
    c_.clear();
    return;
  }
  for (double& v : c_)
    if (std::abs(v) < kCanonTol * m) v = 0.0;
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double Polynomial::operator()(double x) const {
  double r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
  return r;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial();
  std::vector<double> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
  if (c_.empty()) return Polynomial();
  std::vector<double> a(c_.size() + 1, 0.0);
  for (size_t i = 0; i < c_.size(); ++i) a[i + 1] = c_[i] / static_cast<double>(i + 1);
  return Polynomial(std::move(a));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (o * -1.0); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (c_.empty() || o.c_.empty()) return Polynomial();
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (size_t i = 0; i < c_.size(); ++i)
    for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double k) const {
  std::vector<double> r = c_;
  for (double& v : r) v *= k;
  return Polynomial(std::move(r));
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

Polynomial divide_by_linear(const Polynomial& p, double c) {
  const double scale = std::max(p.max_abs_coeff(), 1e-300);
  // residual magnitude at c grows with |c|^deg; fold that into the check
  double at = std::max(1.0, std::abs(c));
  double residual_scale = scale * std::pow(at, std::max(p.degree(), 0));
  if (std::abs(p(c)) > 1e-9 * residual_scale)
    throw NotDivisibleError("divide_by_linear: p(c) != 0");
  const auto& a = p.coeffs();
  if (a.empty()) return Polynomial();
  std::vector<double> q(a.size() - 1, 0.0);
  double carry = 0.0;
  for (size_t i = a.size(); i-- > 1;) {
    carry = a[i] + carry * c;
    q[i - 1] = carry;
  }
  return Polynomial(std::move(q));
}

namespace {

void solve_quadratic(double a, double b, double c, std::vector<double>& out) {
  if (a == 0.0) {
    if (b != 0.0) out.push_back(-c / b);
    return;
  }
  double disc = b * b - 4.0 * a * c;
  double scale = std::max({std::abs(b * b), std::abs(4.0 * a * c), 1e-300});
  if (disc < 0.0) {
    if (disc > -1e-12 * scale) {  // near-double root
      out.push_back(-b / (2.0 * a));
    }
    return;
  }
  double sq = std::sqrt(disc);
  double q = -0.5 * (b + (b >= 0 ? sq : -sq));
  if (q != 0.0) {
    out.push_back(q / a);
    out.push_back(c / q);
  } else {
    out.push_back(0.0);
    out.push_back(-b / a);
  }
}

// monic cubic x^3 + a x^2 + b x + c
void solve_cubic(double a, double b, double c, std::vector<double>& out) {
  double p = b - a * a / 3.0;
  double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  double shift = -a / 3.0;
  double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    double sq = std::sqrt(disc);
    double u = std::cbrt(-0.5 * q + sq);
    double v = std::cbrt(-0.5 * q - sq);
    out.push_back(u + v + shift);
  } else if (p == 0.0) {
    out.push_back(std::cbrt(-q) + shift);
  } else {
    double r = std::sqrt(-p / 3.0);
    double arg = -0.5 * q / (r * r * r);
    arg = std::clamp(arg, -1.0, 1.0);
    double theta = std::acos(arg);
    for (int k = 0; k < 3; ++k)
      out.push_back(2.0 * r * std::cos((theta - 2.0 * M_PI * k) / 3.0) + shift);
  }
}

// monic quartic x^4 + a x^3 + b x^2 + c x + d (Descartes-Ferrari factorization)
void solve_quartic(double a, double b, double c, double d, std::vector<double>& out) {
  // depressed: y^4 + p y^2 + q y + r, x = y - a/4
  double a2 = a * a;
  double p = b - 3.0 * a2 / 8.0;
  double q = c - a * b / 2.0 + a2 * a / 8.0;
  double r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
  double shift = -a / 4.0;
  double qscale = std::max({std::abs(p), std::sqrt(std::abs(r)), 1.0});
  if (std::abs(q) < 1e-12 * qscale * qscale) {
    // biquadratic
    std::vector<double> z;
    solve_quadratic(1.0, p, r, z);
    for (double zi : z) {
      if (zi > 0.0) {
        out.push_back(std::sqrt(zi) + shift);
        out.push_back(-std::sqrt(zi) + shift);
      } else if (zi > -1e-12 * qscale) {
        out.push_back(shift);
      }
    }
    return;
  }
  // resolvent cubic z^3 + 2p z^2 + (p^2 - 4r) z - q^2 = 0; needs z > 0
  std::vector<double> z;
  solve_cubic(2.0 * p, p * p - 4.0 * r, -q * q, z);
  double zs = 0.0;
  for (double zi : z) zs = std::max(zs, zi);
  if (zs <= 0.0) return;  // no real factorization -> no real roots
  double alpha = std::sqrt(zs);
  double beta = 0.5 * (p + zs - q / alpha);
  double gamma = 0.5 * (p + zs + q / alpha);
  std::vector<double> y;
  solve_quadratic(1.0, alpha, beta, y);
  solve_quadratic(1.0, -alpha, gamma, y);
  for (double yi : y) out.push_back(yi + shift);
}

std::vector<double> companion_seeds(const std::vector<double>& monic) {
  // monic: ascending coefficients with leading 1 implied of degree n
  int n = static_cast<int>(monic.size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -monic[static_cast<size_t>(i)];
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, /*computeEigenvectors=*/false);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    std::complex<double> ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) <= 1e-7 * (1.0 + std::abs(ev.real())))
      out.push_back(ev.real());
  }
  return out;
}

double root_residual_scale(const Polynomial& p, double r) {
  return p.max_abs_coeff() * std::pow(std::max(1.0, std::abs(r)), std::max(p.degree(), 0));
}

double newton_polish(const Polynomial& p, const Polynomial& dp, double r) {
  for (int it = 0; it < 60; ++it) {
    double f = p(r);
    double d = dp(r);
    if (f == 0.0) break;
    if (d == 0.0) break;
    double step = f / d;
    double next = r - step;
    if (!std::isfinite(next)) break;
    if (std::abs(next - r) <= 1e-16 * std::max(1.0, std::abs(r))) {
      r = next;
      break;
    }
    // keep Newton from diverging off a good closed-form seed
    if (std::abs(p(next)) > std::abs(f)) {
      next = r - 0.5 * step;
      if (std::abs(p(next)) > std::abs(f)) break;
    }
    r = next;
  }
  return r;
}

}  // namespace

std::vector<double> roots_real(const Polynomial& p, const Domain& dom) {
  if (p.is_zero()) throw DomainError("roots_real: zero polynomial");
  int deg = p.degree();
  if (deg == 0) return {};
  const auto& c = p.coeffs();
  double lead = c.back();
  std::vector<double> monic(c.begin(), c.end() - 1);
  for (double& v : monic) v /= lead;

  std::vector<double> seeds;
  switch (deg) {
    case 1:
      seeds.push_back(-monic[0]);
      break;
    case 2:
      solve_quadratic(1.0, monic[1], monic[0], seeds);
      break;
    case 3:
      solve_cubic(monic[2], monic[1], monic[0], seeds);
      break;
    case 4:
      solve_quartic(monic[3], monic[2], monic[1], monic[0], seeds);
      break;
    default:
      seeds = companion_seeds(monic);
      break;
  }

  Polynomial dp = p.derivative();
  std::vector<double> roots;
  for (double s : seeds) {
    double r = newton_polish(p, dp, s);
    if (std::abs(p(r)) > kRootResidualTol * root_residual_scale(p, r)) continue;
    double edge_tol = 1e-9 * (1.0 + std::abs(r));
    if (!dom.contains(r, edge_tol)) continue;
    roots.push_back(dom.clamp(r));
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) {
                            return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a));
                          }),
              roots.end());
  return roots;
}

RationalPiece RationalPiece::rational(Polynomial numerator, double c, double scale_hint) {
  RationalPiece r;
  r.num = std::move(numerator);
  r.has_den = true;
  r.den_root = c;
  double scale = r.num.max_abs_coeff() *
                 std::pow(std::max(1.0, std::abs(c)), std::max(r.num.degree(), 0));
  scale = std::max({scale, scale_hint, 1e-300});
  double resid = r.num(c);
  if (std::abs(resid) <= 1e-9 * scale) {
    // snap to exact divisibility before the synthetic division
    if (resid != 0.0) r.num = r.num + Polynomial::constant(-resid);
    r.quotient = divide_by_linear(r.num, c);
    r.has_limit = true;
    r.limit = r.quotient(c);
  }
  return r;
}

double RationalPiece::eval(double x) const {
  if (!has_den) return num(x);
  if (has_limit) return quotient(x);
  return num(x) / (x - den_root);
}

Polynomial RationalPiece::critical_poly() const {
  if (!has_den) return num.derivative();
  if (has_limit) return quotient.derivative();
  // d/dx [N/(x-c)] = 0  <=>  N'(x)(x-c) - N(x) = 0
  return num.derivative() * Polynomial::linear(-den_root, 1.0) - num;
}

RationalPiece RationalPiece::scaled(double k) const {
  RationalPiece r = *this;
  r.num = r.num * k;
  if (r.has_limit) {
    r.quotient = r.quotient * k;
    r.limit *= k;
  }
  return r;
}

RationalPiece RationalPiece::plus_const(double k) const {
  if (!has_den) {
    RationalPiece r = *this;
    r.num = r.num + Polynomial::constant(k);
    return r;
  }
  // N/(x-c) + k = (N + k(x-c))/(x-c)
  double m = std::max(1.0, std::abs(den_root));
  double hint = std::max(num.max_abs_coeff() * std::pow(m, std::max(num.degree(), 0)),
                         std::abs(k) * m);
  Polynomial n2 = num + Polynomial::linear(-den_root * k, k);
  return RationalPiece::rational(std::move(n2), den_root, hint);
}

RationalPiece add_pieces(const RationalPiece& a, const RationalPiece& b) {
  if (!a.has_den && !b.has_den) return RationalPiece::poly(a.num + b.num);
  if (a.has_den && b.has_den) {
    if (std::abs(a.den_root - b.den_root) >
        1e-12 * (1.0 + std::abs(a.den_root)))
      throw NumericError("add_pieces: incompatible denominator roots");
    double m = std::max(1.0, std::abs(a.den_root));
    double hint =
        std::max(a.num.max_abs_coeff() * std::pow(m, std::max(a.num.degree(), 0)),
                 b.num.max_abs_coeff() * std::pow(m, std::max(b.num.degree(), 0)));
    return RationalPiece::rational(a.num + b.num, a.den_root, hint);
  }
  const RationalPiece& rat = a.has_den ? a : b;
  const RationalPiece& pol = a.has_den ? b : a;
  double m = std::max(1.0, std::abs(rat.den_root));
  Polynomial scaled_pol = pol.num * Polynomial::linear(-rat.den_root, 1.0);
  double hint =
      std::max(rat.num.max_abs_coeff() * std::pow(m, std::max(rat.num.degree(), 0)),
               scaled_pol.max_abs_coeff() * std::pow(m, std::max(scaled_pol.degree(), 0)));
  Polynomial n = rat.num + std::move(scaled_pol);
  return RationalPiece::rational(std::move(n), rat.den_root, hint);
}

PiecewiseFunction::PiecewiseFunction(Domain support, std::vector<double> interior_breaks,
                                     std::vector<RationalPiece> pieces)
    : support_(support), breaks_(std::move(interior_breaks)), pieces_(std::move(pieces)) {
  if (pieces_.size() != breaks_.size() + 1)
    throw ValidationError("PiecewiseFunction: piece/breakpoint count mismatch");
  for (size_t i = 0; i + 1 < breaks_.size(); ++i)
    if (!(breaks_[i] < breaks_[i + 1]))
      throw ValidationError("PiecewiseFunction: breakpoints must be strictly increasing");
  for (double b : breaks_)
    if (!(b > support_.lower && b < support_.upper))
      throw ValidationError("PiecewiseFunction: breakpoint outside support interior");
  // a piece with a genuine (non-removable) pole must have it outside its interior
  for (size_t i = 0; i < pieces_.size(); ++i) {
    const auto& pc = pieces_[i];
    if (pc.has_den && !pc.has_limit) {
      double lo = (i == 0) ? support_.lower : breaks_[i - 1];
      double hi = (i == breaks_.size()) ? support_.upper : breaks_[i];
      if (pc.den_root > lo && pc.den_root < hi)
        throw ValidationError("PiecewiseFunction: non-removable pole inside a piece");
    }
  }
}

PiecewiseFunction PiecewiseFunction::from_polynomial(Domain support, Polynomial p) {
  return PiecewiseFunction(support, {}, {RationalPiece::poly(std::move(p))});
}

PiecewiseFunction PiecewiseFunction::from_poly_pieces(Domain support,
                                                      std::vector<double> interior_breaks,
                                                      std::vector<Polynomial> polys) {
  std::vector<RationalPiece> pieces;
  pieces.reserve(polys.size());
  for (auto& p : polys) pieces.push_back(RationalPiece::poly(std::move(p)));
  return PiecewiseFunction(support, std::move(interior_breaks), std::move(pieces));
}

PiecewiseFunction PiecewiseFunction::call_payoff(Domain support, double d) {
  if (d <= support.lower)
    return from_polynomial(support, Polynomial::linear(-d, 1.0));
  if (support.bounded_above() && d >= support.upper)
    return from_polynomial(support, Polynomial());
  return from_poly_pieces(support, {d}, {Polynomial(), Polynomial::linear(-d, 1.0)});
}

PiecewiseFunction PiecewiseFunction::monomial(Domain support, int j) {
  return from_polynomial(support, Polynomial::monomial(j));
}

bool PiecewiseFunction::all_polynomial() const {
  for (const auto& p : pieces_)
    if (p.has_den && !p.has_limit) return false;
  return true;
}

size_t PiecewiseFunction::piece_index(double x) const {
  // right piece at a breakpoint
  return static_cast<size_t>(
      std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
}

double PiecewiseFunction::eval(double x) const {
  double tol = 1e-9 * (1.0 + std::max(std::abs(support_.lower) == kInf ? 0.0 : std::abs(support_.lower),
                                      std::abs(support_.upper) == kInf ? 0.0 : std::abs(support_.upper)));
  if (!support_.contains(x, tol)) throw DomainError("PiecewiseFunction::eval: x outside support");
  return pieces_[piece_index(x)].eval(x);
}

PiecewiseFunction PiecewiseFunction::antiderivative_from(double x0) const {
  if (!all_polynomial())
    throw NumericError("antiderivative_from: rational pieces not supported");
  std::vector<Polynomial> anti;
  anti.reserve(pieces_.size());
  for (const auto& p : pieces_) anti.push_back(p.has_limit ? p.quotient.antiderivative()
                                                           : p.num.antiderivative());
  // accumulate constants so A is continuous across breakpoints
  std::vector<double> offs(pieces_.size(), 0.0);
  for (size_t i = 0; i + 1 < pieces_.size(); ++i) {
    double b = breaks_[i];
    double left = anti[i](b) + offs[i];
    offs[i + 1] = left - anti[i + 1](b);
  }
  size_t i0 = piece_index(x0);
  double shift = anti[i0](x0) + offs[i0];
  std::vector<RationalPiece> pieces;
  for (size_t i = 0; i < anti.size(); ++i)
    pieces.push_back(RationalPiece::poly(anti[i] + Polynomial::constant(offs[i] - shift)));
  return PiecewiseFunction(support_, breaks_, std::move(pieces));
}

PiecewiseFunction PiecewiseFunction::scaled(double k) const {
  std::vector<RationalPiece> pieces;
  pieces.reserve(pieces_.size());
  for (const auto& p : pieces_) pieces.push_back(p.scaled(k));
  return PiecewiseFunction(support_, breaks_, std::move(pieces));
}

PiecewiseFunction PiecewiseFunction::plus_const(double k) const {
  std::vector<RationalPiece> pieces;
  pieces.reserve(pieces_.size());
  for (const auto& p : pieces_) pieces.push_back(p.plus_const(k));
  return PiecewiseFunction(support_, breaks_, std::move(pieces));
}

PiecewiseFunction PiecewiseFunction::operator+(const PiecewiseFunction& o) const {
  Domain sup(std::max(support_.lower, o.support_.lower),
             std::min(support_.upper, o.support_.upper));
  std::vector<double> merged;
  std::merge(breaks_.begin(), breaks_.end(), o.breaks_.begin(), o.breaks_.end(),
             std::back_inserter(merged));
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [&](double b) { return b <= sup.lower || b >= sup.upper; }),
               merged.end());
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](double a, double b) {
                             return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a));
                           }),
               merged.end());
  std::vector<RationalPiece> pieces;
  for (size_t i = 0; i <= merged.size(); ++i) {
    double lo = (i == 0) ? sup.lower : merged[i - 1];
    double hi = (i == merged.size()) ? sup.upper : merged[i];
    double mid;
    if (std::isfinite(lo) && std::isfinite(hi)) mid = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) mid = lo + 1.0;
    else if (std::isfinite(hi)) mid = hi - 1.0;
    else mid = 0.0;
    pieces.push_back(add_pieces(pieces_[piece_index(mid)], o.pieces_[o.piece_index(mid)]));
  }
  return PiecewiseFunction(sup, std::move(merged), std::move(pieces));
}

namespace {

// asymptotic behaviour of a piece as x -> +inf (dir=+1) or -inf (dir=-1):
// returns {limit, diverges_to_plus_inf}
struct Asymptote {
  bool to_plus_inf = false;
  bool finite = false;
  double limit = 0.0;
};

Asymptote piece_asymptote(const RationalPiece& pc, int dir) {
  const Polynomial& n = pc.has_limit ? pc.quotient : pc.num;
  int deg = n.degree();
  int eff = deg - ((pc.has_den && !pc.has_limit) ? 1 : 0);
  Asymptote a;
  if (eff < 0 || n.is_zero()) {
    a.finite = true;
    a.limit = 0.0;
    return a;
  }
  if (eff == 0) {
    a.finite = true;
    a.limit = n.leading();
    return a;
  }
  double sign = n.leading();
  if (dir < 0 && (eff % 2 == 1)) sign = -sign;
  a.to_plus_inf = sign > 0.0;
  return a;
}

}  // namespace

MaxResult global_max(const PiecewiseFunction& fn, const Domain& dom) {
  Domain d(std::max(dom.lower, fn.support().lower), std::min(dom.upper, fn.support().upper));
  MaxResult best;
  auto consider = [&](double x) {
    if (!d.contains(x, 0.0)) return;
    double v = fn.eval(x);
    if (v > best.value || (v == best.value && x < best.arg)) {
      best.value = v;
      best.arg = x;
    }
  };
  if (d.bounded_below()) consider(d.lower);
  if (d.bounded_above()) consider(d.upper);
  const auto& breaks = fn.breakpoints();
  for (double b : breaks) {
    if (b >= d.lower && b <= d.upper) {
      consider(b);
      // left-piece value at the breakpoint, in case of a jump
      size_t li = fn.piece_index(b);
      if (li > 0) {
        double v = fn.pieces()[li - 1].eval(b);
        if (v > best.value) {
          best.value = v;
          best.arg = b;
        }
      }
    }
  }
  for (size_t i = 0; i < fn.pieces().size(); ++i) {
    double lo = (i == 0) ? fn.support().lower : breaks[i - 1];
    double hi = (i == breaks.size()) ? fn.support().upper : breaks[i];
    lo = std::max(lo, d.lower);
    hi = std::min(hi, d.upper);
    if (!(lo < hi)) continue;
    Polynomial cp = fn.pieces()[i].critical_poly();
    if (cp.is_zero()) continue;
    for (double r : roots_real(cp, Domain(lo, hi)))
      consider(r);
  }
  if (!d.bounded_above()) {
    Asymptote a = piece_asymptote(fn.pieces().back(), +1);
    if (a.to_plus_inf) {
      best.unbounded = true;
      best.value = kInf;
      best.arg = kInf;
    } else if (a.finite && a.limit > best.value) {
      best.value = a.limit;
      best.arg = kInf;
    }
  }
  if (!d.bounded_below()) {
    Asymptote a = piece_asymptote(fn.pieces().front(), -1);
    if (a.to_plus_inf) {
      best.unbounded = true;
      best.value = kInf;
      best.arg = -kInf;
    } else if (a.finite && a.limit > best.value) {
      best.value = a.limit;
      best.arg = -kInf;
    }
  }
  return best;
}

}  // namespace spb
