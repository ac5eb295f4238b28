#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kappa {

/// Deformation parameter of the kappa-calculus.
///
/// Valid range is [0, 1). kappa == 0 selects the classical exp/ln limit
/// exactly (bit-exact dispatch, no 0/0 in the /(2*kappa) formulas). Only the
/// magnitude of the deformation matters, so negative values are rejected.
class Kappa {
 public:
  Kappa() = default;

  explicit Kappa(double value) : value_(value) {
    if (!(value >= 0.0 && value < 1.0)) {
      throw std::invalid_argument("Kappa: parameter must lie in [0, 1)");
    }
  }

  double value() const noexcept { return value_; }
  bool classical() const noexcept { return value_ == 0.0; }

 private:
  double value_ = 0.0;
};

namespace detail {

// Largest t with exp(t) still finite.
inline constexpr double max_exp_arg = 709.78271289338397;

// Saturating exp: overflow maps to the largest finite double (flag set),
// underflow to the smallest positive normal. Never returns 0, negative or inf.
inline double exp_saturating(double t, bool& saturated) {
  if (t >= max_exp_arg) {
    saturated = true;
    return std::numeric_limits<double>::max();
  }
  const double y = std::exp(t);
  return y > 0.0 ? y : std::numeric_limits<double>::min();
}

}  // namespace detail

/// kappa-exponential. Computed as exp(asinh(kappa*x)/kappa), which is the
/// integral form of the definition and agrees with the closed form
/// (kappa*x + sqrt(1 + kappa^2 x^2))^(1/kappa) without cancellation for
/// large negative x. Strictly increasing, strictly convex, maps R onto R_>0.
///
/// On overflow the result saturates to the largest finite double and
/// `saturated` is set (it is never cleared, so a flag can accumulate over
/// many calls).
inline double kexp(Kappa k, double x, bool& saturated) {
  if (!std::isfinite(x)) {
    throw std::domain_error("kexp: argument must be finite");
  }
  const double t = k.classical() ? x : std::asinh(k.value() * x) / k.value();
  return detail::exp_saturating(t, saturated);
}

inline double kexp(Kappa k, double x) {
  bool saturated = false;
  return kexp(k, x, saturated);
}

/// kappa-logarithm (y^kappa - y^-kappa)/(2 kappa) = sinh(kappa*ln y)/kappa,
/// the inverse of kexp. Strictly increasing, strictly concave on y > 0.
inline double kln(Kappa k, double y) {
  if (!(y > 0.0)) {
    throw std::domain_error("kln: argument must be positive");
  }
  const double t = std::log(y);
  return k.classical() ? t : std::sinh(k.value() * t) / k.value();
}

/// First derivative of kexp: (1 + kappa^2 x^2)^(-1/2) * kexp(x) > 0.
inline double kexp_deriv(Kappa k, double x, bool& saturated) {
  const double kx = k.value() * x;
  return kexp(k, x, saturated) / std::sqrt(1.0 + kx * kx);
}

inline double kexp_deriv(Kappa k, double x) {
  bool saturated = false;
  return kexp_deriv(k, x, saturated);
}

/// Second derivative of kexp, positive for all arguments:
///   (sqrt(1 + kappa^2 x^2) - kappa^2 x) / (1 + kappa^2 x^2) * kexp'(x).
inline double kexp_deriv2(Kappa k, double x, bool& saturated) {
  const double k2 = k.value() * k.value();
  const double one_plus = 1.0 + k2 * x * x;
  const double root = std::sqrt(one_plus);
  // For x > 0 the direct difference root - k^2 x loses digits as kappa -> 1;
  // the conjugate form keeps the numerator exact.
  const double factor = x > 0.0
                            ? (1.0 + k2 * x * x * (1.0 - k2)) / (root + k2 * x)
                            : root - k2 * x;
  return factor / one_plus * kexp_deriv(k, x, saturated);
}

inline double kexp_deriv2(Kappa k, double x) {
  bool saturated = false;
  return kexp_deriv2(k, x, saturated);
}

/// Derivative of kln: (y^kappa + y^-kappa)/(2y) = cosh(kappa*ln y)/y.
/// Reciprocal of kexp_deriv evaluated at x = kln(y).
inline double kln_deriv(Kappa k, double y) {
  if (!(y > 0.0)) {
    throw std::domain_error("kln_deriv: argument must be positive");
  }
  return k.classical() ? 1.0 / y : std::cosh(k.value() * std::log(y)) / y;
}

/// Deformed sum: x1 (+) x2 = x1*sqrt(1+kappa^2 x2^2) + x2*sqrt(1+kappa^2 x1^2).
/// Satisfies kexp(x1 (+) x2) = kexp(x1)*kexp(x2); commutative, identity 0,
/// inverse -x. Reduces to x1 + x2 at kappa = 0.
inline double kplus(Kappa k, double x1, double x2) {
  const double a = k.value() * x1;
  const double b = k.value() * x2;
  return x1 * std::sqrt(1.0 + b * b) + x2 * std::sqrt(1.0 + a * a);
}

/// Partial derivative of kplus in its first argument:
///   d(x1 (+) x2)/dx1 = sqrt(1+kappa^2 x2^2) + kappa^2 x1 x2 / sqrt(1+kappa^2 x1^2)
///                    = sqrt(1+kappa^2 (x1 (+) x2)^2) / sqrt(1+kappa^2 x1^2).
/// Equals 1 identically at kappa = 0.
inline double kplus_partial(Kappa k, double x1, double x2) {
  const double k2 = k.value() * k.value();
  return std::sqrt(1.0 + k2 * x2 * x2) +
         k2 * x1 * x2 / std::sqrt(1.0 + k2 * x1 * x1);
}

/// Deformed product kexp(kln y1 + kln y2), extended by continuity with
/// 0 (x) y = y (x) 0 = 0. Defined for nonnegative arguments; 1 is the
/// identity and 1/y the inverse.
inline double kprod(Kappa k, double y1, double y2) {
  if (y1 < 0.0 || y2 < 0.0) {
    throw std::domain_error("kprod: arguments must be nonnegative");
  }
  if (y1 == 0.0 || y2 == 0.0) {
    return 0.0;
  }
  return kexp(k, kln(k, y1) + kln(k, y2));
}

/// n-fold deformed power y (x) ... (x) y = kexp(n * kln y) for y > 0, with
/// kpow(y, 0) = 1 and kpow(0, n) = 0 for n >= 1. Only nonnegative integer
/// exponents are defined; real exponents go through kexp(t * kln y)
/// explicitly at call sites.
inline double kpow(Kappa k, double y, int n) {
  if (n < 0) {
    throw std::domain_error("kpow: exponent must be nonnegative");
  }
  if (y < 0.0) {
    throw std::domain_error("kpow: base must be nonnegative");
  }
  if (n == 0) {
    return 1.0;
  }
  if (y == 0.0) {
    return 0.0;
  }
  if (n == 1) {
    return y;
  }
  return kexp(k, static_cast<double>(n) * kln(k, y));
}

}  // namespace kappa
