#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kappa/core.hpp"
#include "kappa/density.hpp"
#include "kappa/solver.hpp"

namespace kappa {

/// Finite state space equipped with a nonnegative energy function. When the
/// energies lie on a lattice {0, step, 2*step, ...} the step can be recorded,
/// which unlocks the integer-lattice machinery of the invariants layer.
class EnergyModel {
 public:
  EnergyModel(StateSpace space, RandomVariable energy,
              std::optional<double> lattice_step = std::nullopt)
      : space_(std::move(space)), energy_(std::move(energy)), lattice_step_(lattice_step) {
    detail::require_same_space(space_, energy_.space(), "EnergyModel");
    for (double u : energy_.values()) {
      if (!(u >= 0.0)) {
        throw std::invalid_argument("EnergyModel: energies must be nonnegative");
      }
    }
    if (lattice_step_) {
      if (!(*lattice_step_ > 0.0)) {
        throw std::invalid_argument("EnergyModel: lattice step must be positive");
      }
      for (double u : energy_.values()) {
        const double level = u / *lattice_step_;
        if (std::abs(level - std::round(level)) > 1e-9) {
          throw std::invalid_argument("EnergyModel: energies are not on the stated lattice");
        }
      }
    }
  }

  const StateSpace& space() const noexcept { return space_; }
  const RandomVariable& energy() const noexcept { return energy_; }
  std::size_t size() const noexcept { return space_.size(); }
  std::optional<double> lattice_step() const noexcept { return lattice_step_; }
  bool has_lattice() const noexcept { return lattice_step_.has_value(); }

  /// Energies divided by the lattice step, as exact integers.
  std::vector<std::int64_t> lattice_levels() const {
    if (!lattice_step_) {
      throw std::invalid_argument("EnergyModel: no lattice step recorded");
    }
    std::vector<std::int64_t> levels;
    levels.reserve(size());
    for (double u : energy_.values()) {
      levels.push_back(static_cast<std::int64_t>(std::llround(u / *lattice_step_)));
    }
    return levels;
  }

 private:
  StateSpace space_;
  RandomVariable energy_;
  std::optional<double> lattice_step_;
};

/// One member of the kappa-Gibbs family: p(x) = kexp(theta*U(x) - psi) with
/// psi the implicit normalizer. Immutable once built.
struct GibbsPoint {
  EnergyModel model;
  Kappa kappa;
  double theta;
  double psi;
  FiniteDensity density;
};

/// The unique psi with sum_x kexp(theta*U(x) - psi) = 1.
inline double solve_psi_gibbs(Kappa k, const EnergyModel& model, double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("solve_psi_gibbs: theta must be finite");
  }
  std::vector<double> a(model.size());
  std::vector<double> w(model.size(), 1.0);
  for (std::size_t i = 0; i < model.size(); ++i) {
    a[i] = theta * model.energy()[i];
  }
  return detail::solve_normalizer(k, a, w);
}

inline GibbsPoint gibbs_density(Kappa k, const EnergyModel& model, double theta) {
  const double psi = solve_psi_gibbs(k, model, theta);
  std::vector<double> p(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    p[i] = kexp(k, theta * model.energy()[i] - psi);
  }
  return GibbsPoint{model, k, theta, psi, FiniteDensity(model.space(), std::move(p))};
}

/// psi'(theta) from the implicit moment identity:
///   psi' = E_theta[U/s] / E_theta[1/s],  s(x) = sqrt(1 + kappa^2 (theta*U(x) - psi)^2).
/// Exact given psi; reduces to E_theta[U] at kappa = 0.
inline double psi_prime(const GibbsPoint& point) {
  const Kappa k = point.kappa;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < point.model.size(); ++i) {
    const double u = point.model.energy()[i];
    const double t = k.value() * (point.theta * u - point.psi);
    const double s = std::sqrt(1.0 + t * t);
    num += point.density[i] * u / s;
    den += point.density[i] / s;
  }
  return num / den;
}

inline double psi_prime(Kappa k, const EnergyModel& model, double theta) {
  return psi_prime(gibbs_density(k, model, theta));
}

/// E_theta[(U - psi'(theta))/s]; vanishes identically on the model.
inline double moment_identity_residual(const GibbsPoint& point) {
  const Kappa k = point.kappa;
  const double pp = psi_prime(point);
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < point.model.size(); ++i) {
    const double u = point.model.energy()[i];
    const double t = k.value() * (point.theta * u - point.psi);
    sum.add(point.density[i] * (u - pp) / std::sqrt(1.0 + t * t));
  }
  return sum.value();
}

}  // namespace kappa
