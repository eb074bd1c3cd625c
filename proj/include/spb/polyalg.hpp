#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Exact algebra, root finding and global extremization for piecewise
// polynomial / rational functions of one variable. Rational pieces are
// restricted to linear denominators (x - c), which is all the mixture
// transforms ever produce.

namespace spb {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class NotDivisibleError : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

class InfeasibleError : public Error {
public:
  using Error::Error;
};

/// Interval of the real line; either side may be infinite.
struct Domain {
  double lower = -kInf;
  double upper = kInf;

  Domain() = default;
  Domain(double lo, double hi) : lower(lo), upper(hi) {
    if (!(lower < upper)) throw ValidationError("Domain: lower must be < upper");
  }
  bool bounded_below() const { return lower > -kInf; }
  bool bounded_above() const { return upper < kInf; }
  bool contains(double x, double tol = 0.0) const {
    return x >= lower - tol && x <= upper + tol;
  }
  double clamp(double x) const {
    if (x < lower) return lower;
    if (x > upper) return upper;
    return x;
  }
};

/// Dense univariate polynomial, coefficients stored ascending by degree.
/// Canonical form: highest coefficient nonzero (zero polynomial is empty).
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    canonicalize();
  }
  static Polynomial constant(double a) { return Polynomial({a}); }
  /// a + b*x
  static Polynomial linear(double a, double b) { return Polynomial({a, b}); }
  /// x^j
  static Polynomial monomial(int j, double coeff = 1.0);

  const std::vector<double>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  /// Degree of the canonical form; -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double leading() const { return c_.empty() ? 0.0 : c_.back(); }

  double operator()(double x) const;

  Polynomial derivative() const;
  /// Antiderivative G with G(0) = 0.
  Polynomial antiderivative() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double k) const;
  Polynomial operator-() const { return *this * -1.0; }

  double max_abs_coeff() const;

private:
  void canonicalize();
  std::vector<double> c_;
};

/// Exact synthetic division of p by (x - c). Requires p(c) = 0 within
/// 1e-9 * max|coeff|; the residual is discarded after that check.
Polynomial divide_by_linear(const Polynomial& p, double c);

/// All real roots of p inside dom, ascending, Newton-polished.
/// Degree <= 4 uses closed-form seeds (quadratic / Cardano / Ferrari);
/// degree >= 5 seeds from the eigenvalues of the companion matrix.
std::vector<double> roots_real(const Polynomial& p, const Domain& dom);

/// One piece of a PiecewiseFunction: num(x) or num(x)/(x - den_root).
/// When the numerator is divisible by (x - den_root) the quotient is
/// precomputed and used for evaluation, which keeps the removable
/// singularity exact and stable.
struct RationalPiece {
  Polynomial num;
  bool has_den = false;
  double den_root = 0.0;
  bool has_limit = false;
  double limit = 0.0;      // removable-limit value at den_root
  Polynomial quotient;     // valid iff has_limit

  static RationalPiece poly(Polynomial p) {
    RationalPiece r;
    r.num = std::move(p);
    return r;
  }
  /// num / (x - c); detects divisibility and stores the removable limit.
  /// scale_hint widens the divisibility tolerance when the numerator is a
  /// cancellation remnant of much larger operands.
  static RationalPiece rational(Polynomial numerator, double c, double scale_hint = 0.0);

  double eval(double x) const;
  /// Polynomial whose roots are the interior critical points of the piece.
  Polynomial critical_poly() const;
  RationalPiece scaled(double k) const;
  RationalPiece plus_const(double k) const;
};

RationalPiece add_pieces(const RationalPiece& a, const RationalPiece& b);

struct MaxResult {
  double arg = 0.0;
  double value = -kInf;
  bool unbounded = false;
};

/// Piecewise rational function over a support interval. Pieces tile the
/// support; interior breakpoints are strictly increasing. Evaluation at a
/// breakpoint takes the right piece.
class PiecewiseFunction {
public:
  PiecewiseFunction() : support_(0.0, 1.0), pieces_{RationalPiece::poly(Polynomial())} {}
  PiecewiseFunction(Domain support, std::vector<double> interior_breaks,
                    std::vector<RationalPiece> pieces);

  static PiecewiseFunction from_polynomial(Domain support, Polynomial p);
  static PiecewiseFunction from_poly_pieces(Domain support,
                                            std::vector<double> interior_breaks,
                                            std::vector<Polynomial> polys);
  /// max(x - d, 0)
  static PiecewiseFunction call_payoff(Domain support, double d);
  /// x^j
  static PiecewiseFunction monomial(Domain support, int j);

  const Domain& support() const { return support_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<RationalPiece>& pieces() const { return pieces_; }
  bool all_polynomial() const;

  double eval(double x) const;
  double operator()(double x) const { return eval(x); }

  /// Piecewise antiderivative A with A(x0) = 0, continuous across pieces.
  /// All pieces must be polynomial.
  PiecewiseFunction antiderivative_from(double x0) const;

  PiecewiseFunction scaled(double k) const;
  PiecewiseFunction plus_const(double k) const;
  /// Pointwise sum; supports must match, rational pieces must share the
  /// same denominator root.
  PiecewiseFunction operator+(const PiecewiseFunction& o) const;

  size_t piece_index(double x) const;

private:
  Domain support_;
  std::vector<double> breaks_;
  std::vector<RationalPiece> pieces_;
};

/// Global maximum of fn over dom (intersected with fn's support).
/// Candidates: piece endpoints, domain endpoints, critical-point roots.
/// Unbounded sides are classified by the leading behaviour of the end
/// piece; `unbounded` is set when fn -> +inf, and a finite limiting value
/// at infinity is reported with arg = +/-inf.
MaxResult global_max(const PiecewiseFunction& fn, const Domain& dom);

}  // namespace spb
