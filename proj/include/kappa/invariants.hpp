#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <tuple>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kappa/core.hpp"
#include "kappa/density.hpp"
#include "kappa/gibbs.hpp"
#include "kappa/solver.hpp"

namespace kappa {

namespace detail {

// Extended gcd: returns (g, s, t) with s*a + t*b == g == gcd(a, b), g >= 0.
inline std::tuple<std::int64_t, std::int64_t, std::int64_t> gcdx(std::int64_t a, std::int64_t b) {
  std::int64_t old_r = a, r = b;
  std::int64_t old_s = 1, s = 0;
  std::int64_t old_t = 0, t = 1;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
    std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  return {old_r, old_s, old_t};
}

}  // namespace detail

/// Integer-valued vector orthogonal to the design span {1, U} of an energy
/// model (an element of V-perp). Carries the split into positive and negative
/// parts v = v+ - v- with disjoint supports, and the common level
/// lambda = sum v+ = sum v-.
class LatticeVector {
 public:
  LatticeVector(const EnergyModel& model, std::vector<std::int64_t> values)
      : space_(model.space()), values_(std::move(values)) {
    if (values_.size() != model.size()) {
      throw std::invalid_argument("LatticeVector: length must match space");
    }
    const auto levels = model.lattice_levels();
    std::int64_t sum = 0;
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      sum += values_[i];
      dot += values_[i] * levels[i];
    }
    if (sum != 0 || dot != 0) {
      throw std::invalid_argument("LatticeVector: vector is not orthogonal to {1, U}");
    }
  }

  const StateSpace& space() const noexcept { return space_; }
  const std::vector<std::int64_t>& values() const noexcept { return values_; }
  std::int64_t operator[](std::size_t i) const { return values_.at(i); }
  std::size_t size() const noexcept { return values_.size(); }

  std::vector<std::int64_t> positive_part() const {
    std::vector<std::int64_t> out(values_.size(), 0);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] > 0) out[i] = values_[i];
    }
    return out;
  }

  std::vector<std::int64_t> negative_part() const {
    std::vector<std::int64_t> out(values_.size(), 0);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] < 0) out[i] = -values_[i];
    }
    return out;
  }

  /// lambda = sum of the positive part (equals the sum of the negative part).
  std::int64_t level() const {
    std::int64_t lambda = 0;
    for (std::int64_t v : values_) {
      if (v > 0) lambda += v;
    }
    return lambda;
  }

 private:
  StateSpace space_;
  std::vector<std::int64_t> values_;
};

/// Basis of the lattice of ALL integer vectors orthogonal to {1, U}
/// (N - 2 vectors, saturated: every integer vector of the rational kernel is
/// an integer combination of the basis). Computed by unimodular column
/// reduction of the 2 x N design matrix; the kernel columns of the
/// accumulated transform are the basis. Each vector is primitive (content 1)
/// with its first nonzero entry positive; pivots are chosen at the lowest
/// state index, so the output is deterministic.
inline std::vector<LatticeVector> orthogonal_lattice_basis(const EnergyModel& model) {
  const auto levels = model.lattice_levels();
  const std::size_t n = levels.size();

  // Column operations on A = [1; levels], mirrored on the identity.
  std::vector<std::array<std::int64_t, 2>> A(n);
  for (std::size_t j = 0; j < n; ++j) A[j] = {1, levels[j]};
  std::vector<std::vector<std::int64_t>> T(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t j = 0; j < n; ++j) T[j][j] = 1;

  const auto combine = [&](std::size_t p, std::size_t q, std::int64_t a, std::int64_t b,
                           std::int64_t c, std::int64_t d) {
    // col_p' = a*col_p + b*col_q ; col_q' = c*col_p + d*col_q  (ad - bc = +-1)
    for (int r = 0; r < 2; ++r) {
      const std::int64_t xp = A[p][r], xq = A[q][r];
      A[p][r] = a * xp + b * xq;
      A[q][r] = c * xp + d * xq;
    }
    for (std::size_t r = 0; r < n; ++r) {
      const std::int64_t xp = T[p][r], xq = T[q][r];
      T[p][r] = a * xp + b * xq;
      T[q][r] = c * xp + d * xq;
    }
  };

  // Row 0 is all ones: clear it against column 0.
  for (std::size_t j = 1; j < n; ++j) combine(0, j, 1, 0, -1, 1);

  // Row 1: gcd-reduce columns 1..n-1 onto the lowest-index nonzero pivot.
  std::size_t pivot = 0;
  for (std::size_t j = 1; j < n && pivot == 0; ++j) {
    if (A[j][1] != 0) pivot = j;
  }
  if (pivot == 0) {
    throw std::invalid_argument("orthogonal_lattice_basis: energy must be non-constant");
  }
  for (std::size_t j = pivot + 1; j < n; ++j) {
    if (A[j][1] == 0) continue;
    const auto [g, s, t] = detail::gcdx(A[pivot][1], A[j][1]);
    combine(pivot, j, s, t, -A[j][1] / g, A[pivot][1] / g);
  }

  std::vector<LatticeVector> basis;
  basis.reserve(n - 2);
  for (std::size_t j = 1; j < n; ++j) {
    if (j == pivot) continue;
    std::vector<std::int64_t> v = T[j];
    std::int64_t content = 0;
    for (std::int64_t x : v) content = std::gcd(content, x);
    if (content > 1) {
      for (std::int64_t& x : v) x /= content;
    }
    for (std::int64_t x : v) {
      if (x != 0) {
        if (x < 0) {
          for (std::int64_t& y : v) y = -y;
        }
        break;
      }
    }
    basis.emplace_back(model, std::move(v));
  }
  return basis;
}

/// kln-form invariant residual sum_x v(x) * kln(p(x)); zero exactly on the
/// kappa-Gibbs model of the energy defining v. Requires strict positivity;
/// boundary densities go through kbinomial_residual_boundary.
inline double kbinomial_residual(Kappa k, const FiniteDensity& p, const LatticeVector& v) {
  detail::require_same_space(p.space(), v.space(), "kbinomial_residual");
  detail::require_strict(p, "kbinomial_residual");
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (v[i] != 0) sum.add(static_cast<double>(v[i]) * kln(k, p[i]));
  }
  return sum.value();
}

/// Binomial form of the invariant, defined for boundary densities as well:
///   (x)_{v>0} p(x)^((x) v+(x))  -  (x)_{v<0} p(x)^((x) v-(x))
/// with the deformed product extended by zero.
inline double kbinomial_residual_boundary(Kappa k, const FiniteDensity& p,
                                          const LatticeVector& v) {
  detail::require_same_space(p.space(), v.space(), "kbinomial_residual_boundary");
  double lhs = 1.0;
  double rhs = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (v[i] > 0) {
      lhs = kprod(k, lhs, kpow(k, p[i], static_cast<int>(v[i])));
    } else if (v[i] < 0) {
      rhs = kprod(k, rhs, kpow(k, p[i], static_cast<int>(-v[i])));
    }
  }
  return lhs - rhs;
}

/// The invariant restated through the disjoint pair of densities
/// r1 = v+/lambda, r2 = v-/lambda: returns (E_r1[kln p], E_r2[kln p]).
/// The two means agree exactly when p satisfies the invariant for v.
inline std::pair<double, double> two_state_mean_form(Kappa k, const FiniteDensity& p,
                                                     const LatticeVector& v) {
  detail::require_same_space(p.space(), v.space(), "two_state_mean_form");
  detail::require_strict(p, "two_state_mean_form");
  const double lambda = static_cast<double>(v.level());
  if (lambda == 0.0) {
    throw std::invalid_argument("two_state_mean_form: vector must be nonzero");
  }
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (v[i] > 0) m1 += static_cast<double>(v[i]) * kln(k, p[i]);
    if (v[i] < 0) m2 += static_cast<double>(-v[i]) * kln(k, p[i]);
  }
  return {m1 / lambda, m2 / lambda};
}

/// Power-sum form sum_x v(x) * (p(x)^kappa - p(x)^-kappa), computed through
/// std::pow so it is an independent route; equals 2*kappa times the kln-form
/// residual.
inline double additive_invariant_residual(Kappa k, const FiniteDensity& p,
                                          const LatticeVector& v) {
  detail::require_same_space(p.space(), v.space(), "additive_invariant_residual");
  detail::require_strict(p, "additive_invariant_residual");
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (v[i] == 0) continue;
    const double pk = std::pow(p[i], k.value());
    sum.add(static_cast<double>(v[i]) * (pk - 1.0 / pk));
  }
  return sum.value();
}

/// Parameters of the toric presentation p(x) = zeta0 (x) zeta1^((x) U(x)/step).
/// zeta0 must be strictly positive; zeta1 may be zero, which selects the
/// boundary family supported on the zero-energy states.
struct ToricParams {
  double zeta0;
  double zeta1;

  ToricParams(double z0, double z1) : zeta0(z0), zeta1(z1) {
    if (!(zeta0 > 0.0) || !std::isfinite(zeta0)) {
      throw std::invalid_argument("ToricParams: zeta0 must be strictly positive");
    }
    if (!(zeta1 >= 0.0) || !std::isfinite(zeta1)) {
      throw std::invalid_argument("ToricParams: zeta1 must be nonnegative");
    }
  }
};

/// Pointwise monomial evaluation zeta0 (x) kpow(zeta1, U(x)/step). The result
/// is not normalized.
inline std::vector<double> toric_eval(Kappa k, const EnergyModel& model,
                                      const ToricParams& params) {
  const auto levels = model.lattice_levels();
  std::vector<double> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out[i] = kprod(k, params.zeta0, kpow(k, params.zeta1, static_cast<int>(levels[i])));
  }
  return out;
}

/// The unique zeta0 > 0 normalizing the toric monomials for the given zeta1,
/// together with the resulting density. zeta1 = 0 yields the boundary family:
/// the uniform distribution on the zero-energy states.
inline std::pair<double, FiniteDensity> toric_normalize(Kappa k, const EnergyModel& model,
                                                        double zeta1) {
  if (!(zeta1 >= 0.0) || !std::isfinite(zeta1)) {
    throw std::invalid_argument("toric_normalize: zeta1 must be nonnegative");
  }
  const auto levels = model.lattice_levels();
  if (zeta1 == 0.0) {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] == 0) support.push_back(i);
    }
    if (support.empty()) {
      throw std::invalid_argument("toric_normalize: zeta1 = 0 needs a zero-energy state");
    }
    const double zeta0 = 1.0 / static_cast<double>(support.size());
    return {zeta0, uniform_on(model.space(), support)};
  }
  std::vector<double> a(levels.size());
  std::vector<double> w(levels.size(), 1.0);
  const double log_zeta1 = kln(k, zeta1);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    a[i] = static_cast<double>(levels[i]) * log_zeta1;
  }
  const double psi = detail::solve_normalizer(k, a, w);
  std::vector<double> p(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    p[i] = kexp(k, a[i] - psi);
  }
  return {kexp(k, -psi), FiniteDensity(model.space(), std::move(p))};
}

/// Residual of the eliminated monomial relation p(3)^((x)2) = p(2) (x) p(5)
/// of the five-state example. Valid for any five-state lattice model whose
/// levels satisfy 2*U(3) = U(2) + U(5), which puts the relation in the ideal.
inline double elimination_check(Kappa k, const EnergyModel& model, const FiniteDensity& p) {
  detail::require_same_space(p.space(), model.space(), "elimination_check");
  if (model.size() != 5) {
    throw std::invalid_argument("elimination_check: model must have five states");
  }
  const auto levels = model.lattice_levels();
  if (2 * levels[2] != levels[1] + levels[4]) {
    throw std::invalid_argument("elimination_check: relation p3^2 = p2 (x) p5 is not in the ideal");
  }
  return kpow(k, p[2], 2) - kprod(k, p[1], p[4]);
}

}  // namespace kappa
