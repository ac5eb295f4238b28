#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kappa/core.hpp"
#include "kappa/density.hpp"
#include "kappa/solver.hpp"

namespace kappa {

/// Tangent vector at a strictly positive density: a random variable with
/// zero mean under the base. On a finite space this is the whole model space
/// L^{1/kappa}_0(p); the integrability condition is automatic.
class TangentVector {
 public:
  TangentVector(FiniteDensity base, std::vector<double> values)
      : base_(std::move(base)), values_(std::move(values)) {
    detail::require_strict(base_, "TangentVector");
    if (values_.size() != base_.size()) {
      throw std::invalid_argument("TangentVector: length must match space");
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw std::invalid_argument("TangentVector: values must be finite");
      }
      mean += base_[i] * values_[i];
    }
    if (std::abs(mean) > 1e-12) {
      throw std::invalid_argument("TangentVector: values must be centered at the base density");
    }
  }

  /// Center an arbitrary vector at the base by subtracting its mean.
  static TangentVector centered(const FiniteDensity& base, std::vector<double> raw) {
    double mean = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) mean += base[i] * raw[i];
    for (double& x : raw) x -= mean;
    return TangentVector(base, std::move(raw));
  }

  const FiniteDensity& base() const noexcept { return base_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_.at(i); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  FiniteDensity base_;
  std::vector<double> values_;
};

/// A density represented in the chart at its base: q = kexp(u - psi) * base
/// pointwise, with psi the normalization value; psi equals the divergence
/// D_kappa(base || q).
struct ChartPoint {
  FiniteDensity base;
  TangentVector coordinates;
  double psi;
  FiniteDensity density;
};

/// The unique psi >= 0 with E_p[kexp(u - psi)] = 1. The map is continuous
/// and strictly decreasing from +inf to 0.
inline double solve_psi(Kappa k, const FiniteDensity& p, const TangentVector& u) {
  detail::require_same_space(p.space(), u.base().space(), "solve_psi");
  return detail::solve_normalizer(k, u.values(), p.weights());
}

inline ChartPoint from_coordinates(Kappa k, const FiniteDensity& p, const TangentVector& u) {
  const double psi = solve_psi(k, p, u);
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    q[i] = kexp(k, u[i] - psi) * p[i];
  }
  return ChartPoint{p, u, psi, FiniteDensity(p.space(), std::move(q))};
}

/// Chart representation of q at the reference p:
///   u = kln(q/p) - E_p[kln(q/p)],  psi = -E_p[kln(q/p)] = D_kappa(p || q).
inline ChartPoint to_coordinates(Kappa k, const FiniteDensity& p, const FiniteDensity& q) {
  detail::require_same_space(p.space(), q.space(), "to_coordinates");
  detail::require_strict(p, "to_coordinates");
  detail::require_strict(q, "to_coordinates");
  std::vector<double> u(p.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    u[i] = kln(k, q[i] / p[i]);
    mean += p[i] * u[i];
  }
  for (double& x : u) x -= mean;
  return ChartPoint{p, TangentVector(p, std::move(u)), -mean, q};
}

/// The reversed divergence in chart terms: D_kappa(q || p) = E_q[u] - psi.
inline double reverse_divergence(const ChartPoint& cp) {
  double eq = 0.0;
  for (std::size_t i = 0; i < cp.density.size(); ++i) {
    eq += cp.density[i] * cp.coordinates[i];
  }
  return eq - cp.psi;
}

namespace detail {

// Tangency at p is a real precondition: a vector centered at some other
// density is not an element of L^{1/kappa}_0(p).
inline void require_tangent_at(const FiniteDensity& p, std::span<const double> u,
                               const char* who) {
  if (u.size() != p.size()) {
    throw std::invalid_argument(std::string(who) + ": length must match space");
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) mean += p[i] * u[i];
  if (std::abs(mean) > 1e-12) {
    throw std::invalid_argument(std::string(who) + ": vector is not centered at the reference");
  }
}

// Escort weights of q relative to p (q from the chart at p with value a = u - psi):
// proportional to kexp'(a) * p = q / sqrt(1 + kappa^2 a^2).
inline std::vector<double> escort_weights(Kappa k, const FiniteDensity& p,
                                          std::span<const double> a) {
  std::vector<double> e(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    e[i] = kexp_deriv(k, a[i]) * p[i];
    total += e[i];
  }
  for (double& x : e) x /= total;
  return e;
}

}  // namespace detail

/// Directional derivative of the normalization functional,
/// D psi_{kappa,p}(u) v = E_{q|p}[v] with q|p the escort density of
/// q = from_coordinates(p, u). Vanishes at u = 0.
inline double dpsi(Kappa k, const FiniteDensity& p, const TangentVector& u,
                   const TangentVector& v) {
  const double psi = solve_psi(k, p, u);
  std::vector<double> a(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) a[i] = u[i] - psi;
  const auto e = detail::escort_weights(k, p, a);
  double out = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) out += e[i] * v[i];
  return out;
}

/// Second directional derivative:
///   D^2 psi(u) v w = E_p[kexp''(u - psi)(v - Dpsi v)(w - Dpsi w)] / E_p[kexp'(u - psi)].
/// Symmetric in (v, w) and positive on the diagonal, so the functional is
/// strictly convex; at u = 0 it is the covariance Cov_p(v, w).
inline double d2psi(Kappa k, const FiniteDensity& p, const TangentVector& u,
                    const TangentVector& v, const TangentVector& w) {
  const double psi = solve_psi(k, p, u);
  double e1 = 0.0;
  std::vector<double> weight2(p.size());
  std::vector<double> e1w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = u[i] - psi;
    e1w[i] = kexp_deriv(k, a) * p[i];
    weight2[i] = kexp_deriv2(k, a) * p[i];
    e1 += e1w[i];
  }
  double dv = 0.0;
  double dw = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dv += e1w[i] * v[i];
    dw += e1w[i] * w[i];
  }
  dv /= e1;
  dw /= e1;
  double num = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    num += weight2[i] * (v[i] - dv) * (w[i] - dw);
  }
  return num / e1;
}

/// Coordinates of the same density in the chart at a new reference:
///   u_bar = (u - psi(u)) (+) kln(p/p_bar), recentered at p_bar.
/// Affine at kappa = 0.
inline TangentVector change_chart(Kappa k, const FiniteDensity& p, const FiniteDensity& pbar,
                                  const TangentVector& u) {
  detail::require_same_space(p.space(), pbar.space(), "change_chart");
  detail::require_strict(p, "change_chart");
  detail::require_strict(pbar, "change_chart");
  const double psi = solve_psi(k, p, u);
  std::vector<double> raw(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    raw[i] = kplus(k, u[i] - psi, kln(k, p[i] / pbar[i]));
  }
  return TangentVector::centered(pbar, std::move(raw));
}

/// Derivative of the chart change in the direction v: A - E_{p_bar}[A] with
///   A(x) = d1 kplus(u(x) - psi, kln(p/p_bar)(x)) * (v(x) - Dpsi(u) v).
inline TangentVector change_chart_deriv(Kappa k, const FiniteDensity& p,
                                        const FiniteDensity& pbar, const TangentVector& u,
                                        const TangentVector& v) {
  detail::require_same_space(p.space(), pbar.space(), "change_chart_deriv");
  detail::require_strict(pbar, "change_chart_deriv");
  const double psi = solve_psi(k, p, u);
  std::vector<double> a(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) a[i] = u[i] - psi;
  const auto e = detail::escort_weights(k, p, a);
  double dv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) dv += e[i] * v[i];
  std::vector<double> raw(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    raw[i] = kplus_partial(k, a[i], kln(k, p[i] / pbar[i])) * (v[i] - dv);
  }
  return TangentVector::centered(pbar, std::move(raw));
}

/// Parallel transport from the tangent space at p to the tangent space at
/// p_bar:
///   u_bar = (u - E_{p_bar|p}[u]) / sqrt(1 + kappa^2 kln(p_bar/p)^2).
/// The output has zero p_bar-mean by construction. At kappa = 0 this is the
/// classical exponential transport u - E_{p_bar}[u].
inline TangentVector transport(Kappa k, const FiniteDensity& p, const FiniteDensity& pbar,
                               const TangentVector& u) {
  detail::require_same_space(p.space(), pbar.space(), "transport");
  detail::require_strict(p, "transport");
  detail::require_strict(pbar, "transport");
  std::vector<double> s(p.size());
  std::vector<double> e(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s[i] = detail::escort_denominator(k, std::log(pbar[i] / p[i]));
    e[i] = pbar[i] / s[i];
    total += e[i];
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += (e[i] / total) * u[i];
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = (u[i] - mean) / s[i];
  return TangentVector(pbar, std::move(out));
}

/// A curve theta -> u_theta in the chart at a fixed base density, with its
/// derivative. When no analytic derivative is available, use
/// with_numeric_derivative to fall back to central differences.
struct ChartCurve {
  std::function<std::vector<double>(double)> u;
  std::function<std::vector<double>(double)> du;

  static ChartCurve with_numeric_derivative(std::function<std::vector<double>(double)> u,
                                            double step = 1e-6) {
    ChartCurve curve;
    curve.u = u;
    curve.du = [u, step](double theta) {
      auto hi = u(theta + step);
      const auto lo = u(theta - step);
      for (std::size_t i = 0; i < hi.size(); ++i) hi[i] = (hi[i] - lo[i]) / (2.0 * step);
      return hi;
    };
    return curve;
  }
};

/// Velocity of the curve p_theta = kexp(u_theta - psi(u_theta)) p0 in the
/// chart at p_theta:
///   (dp/p)(x) = (du - Dpsi(u) du)(x) / sqrt(1 + kappa^2 (u - psi)^2(x)).
/// Equals the parallel transport of du from p0 to p_theta.
inline TangentVector curve_velocity(Kappa k, const FiniteDensity& p0, const ChartCurve& curve,
                                    double theta) {
  const TangentVector u(p0, curve.u(theta));
  const double psi = solve_psi(k, p0, u);
  const auto du = curve.du(theta);
  if (du.size() != p0.size()) {
    throw std::invalid_argument("curve_velocity: derivative length must match space");
  }
  std::vector<double> a(p0.size());
  std::vector<double> q(p0.size());
  for (std::size_t i = 0; i < p0.size(); ++i) {
    a[i] = u[i] - psi;
    q[i] = kexp(k, a[i]) * p0[i];
  }
  const auto e = detail::escort_weights(k, p0, a);
  double mean = 0.0;
  for (std::size_t i = 0; i < p0.size(); ++i) mean += e[i] * du[i];
  std::vector<double> vel(p0.size());
  for (std::size_t i = 0; i < p0.size(); ++i) {
    const double t = k.value() * a[i];
    vel[i] = (du[i] - mean) / std::sqrt(1.0 + t * t);
  }
  return TangentVector(FiniteDensity(p0.space(), std::move(q)), std::move(vel));
}

namespace detail {

// Right-hand side of the auto-parallel equation: f(y) = y * transport(u)
// pointwise, valid for any positive (not necessarily normalized) state y.
// The field sums to zero, so the flow conserves total mass.
inline bool autoparallel_field(Kappa k, const FiniteDensity& p0, std::span<const double> u,
                               std::span<const double> y, std::span<double> dy) {
  const std::size_t n = y.size();
  double total = 0.0;
  std::vector<double> s(n);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) return false;
    s[i] = escort_denominator(k, std::log(y[i] / p0[i]));
    e[i] = y[i] / s[i];
    total += e[i];
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += (e[i] / total) * u[i];
  for (std::size_t i = 0; i < n; ++i) dy[i] = y[i] * (u[i] - mean) / s[i];
  return true;
}

inline bool rk4_step(Kappa k, const FiniteDensity& p0, std::span<const double> u,
                     std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n);
  if (!autoparallel_field(k, p0, u, y, k1)) return false;
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + 0.5 * h * k1[i];
  if (!autoparallel_field(k, p0, u, stage, k2)) return false;
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + 0.5 * h * k2[i];
  if (!autoparallel_field(k, p0, u, stage, k3)) return false;
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + h * k3[i];
  if (!autoparallel_field(k, p0, u, stage, k4)) return false;
  std::vector<double> next(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!(next[i] > 0.0)) return false;
    total += next[i];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] = next[i] / total;
  return true;
}

// Advance from theta_from to theta_to in RK4 substeps no longer than `step`.
// A substep producing a nonpositive weight is retried at half length, at most
// 20 halvings deep.
inline void integrate_segment(Kappa k, const FiniteDensity& p0, std::span<const double> u,
                              std::vector<double>& y, double theta_from, double theta_to,
                              double step) {
  const double span = theta_to - theta_from;
  if (span == 0.0) return;
  const int nsub = std::max(1, static_cast<int>(std::ceil(std::abs(span) / step)));
  const double h = span / nsub;
  for (int i = 0; i < nsub; ++i) {
    double remaining = h;
    while (remaining != 0.0) {
      double trial = remaining;
      int halvings = 0;
      while (!rk4_step(k, p0, u, y, trial)) {
        trial *= 0.5;
        if (++halvings > 20) {
          throw SolverError("integrate_autoparallel: step halving limit reached");
        }
      }
      remaining -= trial;
    }
  }
}

}  // namespace detail

/// Numerical solution of the auto-parallel equation dp/p = transport(u) from
/// p0 along a strictly increasing grid of parameter values containing 0.
/// Classical RK4 on the density simplex; the exact solution is the
/// one-dimensional model kexp(theta*u - psi(theta*u)) p0.
inline std::vector<FiniteDensity> integrate_autoparallel(Kappa k, const FiniteDensity& p0,
                                                         const TangentVector& u,
                                                         std::span<const double> theta_grid,
                                                         double step = 1e-3) {
  detail::require_same_space(p0.space(), u.base().space(), "integrate_autoparallel");
  if (!(step > 0.0)) {
    throw std::invalid_argument("integrate_autoparallel: step must be positive");
  }
  if (theta_grid.empty()) {
    throw std::invalid_argument("integrate_autoparallel: empty grid");
  }
  std::size_t origin = theta_grid.size();
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (i > 0 && !(theta_grid[i] > theta_grid[i - 1])) {
      throw std::invalid_argument("integrate_autoparallel: grid must be strictly increasing");
    }
    if (theta_grid[i] == 0.0) origin = i;
  }
  if (origin == theta_grid.size()) {
    throw std::invalid_argument("integrate_autoparallel: grid must pass through 0");
  }

  std::vector<std::vector<double>> states(theta_grid.size());
  states[origin] = p0.weights();

  std::vector<double> y = p0.weights();
  for (std::size_t i = origin; i + 1 < theta_grid.size(); ++i) {
    detail::integrate_segment(k, p0, u.values(), y, theta_grid[i], theta_grid[i + 1], step);
    states[i + 1] = y;
  }
  y = p0.weights();
  for (std::size_t i = origin; i > 0; --i) {
    detail::integrate_segment(k, p0, u.values(), y, theta_grid[i], theta_grid[i - 1], step);
    states[i - 1] = y;
  }

  std::vector<FiniteDensity> out;
  out.reserve(states.size());
  for (auto& weights : states) {
    out.emplace_back(p0.space(), std::move(weights));
  }
  return out;
}

/// Implicit-representation residuals E_p[kln(q/p) * v] of the exponential
/// submodel with constraint space spanned by the given vectors. All residuals
/// vanish exactly when q lies in the model.
inline std::vector<double> kexp_submodel_residuals(Kappa k, const FiniteDensity& p,
                                                   const FiniteDensity& q,
                                                   const std::vector<TangentVector>& constraints) {
  detail::require_same_space(p.space(), q.space(), "kexp_submodel_residuals");
  detail::require_strict(p, "kexp_submodel_residuals");
  detail::require_strict(q, "kexp_submodel_residuals");
  std::vector<double> loglik(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) loglik[i] = kln(k, q[i] / p[i]);
  std::vector<double> out;
  out.reserve(constraints.size());
  for (const auto& v : constraints) {
    detail::require_same_space(p.space(), v.base().space(), "kexp_submodel_residuals");
    detail::CompensatedSum sum;
    for (std::size_t i = 0; i < p.size(); ++i) sum.add(p[i] * loglik[i] * v[i]);
    out.push_back(sum.value());
  }
  return out;
}

}  // namespace kappa
