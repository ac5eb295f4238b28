#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "kappa/core.hpp"

namespace kappa {

/// Root finding failed to converge. Signals pathological inputs; it cannot
/// occur for finite arguments within the supported kappa window.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Neumaier compensated summation, used where residual targets sit near the
// rounding floor of a plain sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Solves sum_x w(x) * kexp(a(x) - psi) = 1 for psi. Requires w > 0.
///
/// The map psi -> sum is continuous and strictly decreasing from +inf to 0,
/// so the root is unique. With amax = max a, W = sum w and w* the weight at
/// an argmax state, the bracket
///     [amax + kln(w*), amax + kln(W)]
/// always straddles the root: at the left end the argmax term alone is
/// w* * kexp(-kln w*) = 1, at the right end the sum is at most
/// W * kexp(-kln W) = 1. Safeguarded Newton with bisection fallback.
inline double solve_normalizer(Kappa k, std::span<const double> a,
                               std::span<const double> w, double tol = 1e-13,
                               int max_iter = 200) {
  if (a.empty() || a.size() != w.size()) {
    throw std::invalid_argument("solve_normalizer: bad input lengths");
  }

  double amax = a[0];
  double wsum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !(w[i] > 0.0)) {
      throw std::invalid_argument("solve_normalizer: arguments must be finite, weights positive");
    }
    amax = std::max(amax, a[i]);
    wsum += w[i];
  }
  double wstar = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == amax) wstar = std::max(wstar, w[i]);
  }

  const auto residual = [&](double psi) {
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) {
      s.add(w[i] * kexp(k, a[i] - psi));
    }
    return s.value() - 1.0;
  };
  const auto slope = [&](double psi) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      s -= w[i] * kexp_deriv(k, a[i] - psi);
    }
    return s;
  };

  double lo = amax + kln(k, wstar);
  double hi = amax + kln(k, wsum);

  // The constant-a case puts the root exactly at hi.
  double ghi = residual(hi);
  if (std::abs(ghi) <= tol) return hi;
  // Guard against rounding at the bracket ends.
  for (int i = 0; i < 64 && residual(lo) < 0.0; ++i) lo -= 1.0 + std::abs(lo) * 0.5;
  for (int i = 0; i < 64 && ghi > 0.0; ++i) {
    hi += 1.0 + std::abs(hi) * 0.5;
    ghi = residual(hi);
  }

  double psi = 0.5 * (lo + hi);
  for (int iter = 0; iter < max_iter; ++iter) {
    const double g = residual(psi);
    if (std::abs(g) <= tol) return psi;
    if (g > 0.0) {
      lo = psi;
    } else {
      hi = psi;
    }
    if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(psi))) {
      // Bracket exhausted at double resolution; accept if the residual is
      // within an order of the target, which covers quantization at large psi.
      if (std::abs(g) <= 100.0 * tol) return psi;
      throw SolverError("solve_normalizer: residual target unreachable at double precision");
    }
    const double gp = slope(psi);
    double next = psi - g / gp;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
    }
    psi = next;
  }
  throw SolverError("solve_normalizer: iteration cap exceeded");
}

}  // namespace detail
}  // namespace kappa
