#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kappa/core.hpp"

namespace kappa {

/// Ordered finite state space. The label order fixed at construction is the
/// indexing contract for every vector defined over the space.
class StateSpace {
 public:
  explicit StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) {
      throw std::invalid_argument("StateSpace: need at least two states");
    }
    auto sorted = labels_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("StateSpace: labels must be distinct");
    }
  }

  /// Space with labels "1", "2", ..., "n".
  static StateSpace numbered(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
    return StateSpace(std::move(labels));
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  friend bool operator==(const StateSpace& a, const StateSpace& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
};

/// Real-valued function on a state space, one value per state.
class RandomVariable {
 public:
  RandomVariable(StateSpace space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (values_.size() != space_.size()) {
      throw std::invalid_argument("RandomVariable: length must match space");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("RandomVariable: values must be finite");
      }
    }
  }

  const StateSpace& space() const noexcept { return space_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_.at(i); }

 private:
  StateSpace space_;
  std::vector<double> values_;
};

enum class Positivity { strict, boundary };

inline constexpr double simplex_tolerance = 1e-12;

/// Probability density with respect to the uniform counting reference on a
/// finite state space, i.e. a probability vector. Construction validates the
/// simplex constraint and refuses to renormalize: a sum off by more than
/// simplex_tolerance is an error, not a fixable input.
class FiniteDensity {
 public:
  FiniteDensity(StateSpace space, std::vector<double> weights)
      : space_(std::move(space)), weights_(std::move(weights)) {
    if (weights_.size() != space_.size()) {
      throw std::invalid_argument("FiniteDensity: length must match space");
    }
    double sum = 0.0;
    bool strict = true;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("FiniteDensity: weights must be nonnegative and finite");
      }
      if (w == 0.0) strict = false;
      sum += w;
    }
    if (std::abs(sum - 1.0) > simplex_tolerance) {
      throw std::invalid_argument("FiniteDensity: weights must sum to 1");
    }
    positivity_ = strict ? Positivity::strict : Positivity::boundary;
  }

  const StateSpace& space() const noexcept { return space_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double operator[](std::size_t i) const { return weights_.at(i); }
  std::size_t size() const noexcept { return weights_.size(); }

  Positivity positivity() const noexcept { return positivity_; }
  bool strict() const noexcept { return positivity_ == Positivity::strict; }

 private:
  StateSpace space_;
  std::vector<double> weights_;
  Positivity positivity_ = Positivity::boundary;
};

namespace detail {

inline void require_same_space(const StateSpace& a, const StateSpace& b, const char* who) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(who) + ": state spaces do not match");
  }
}

inline void require_strict(const FiniteDensity& p, const char* who) {
  if (!p.strict()) {
    throw std::domain_error(std::string(who) + ": density must be strictly positive");
  }
}

// sqrt(1 + kappa^2 * kln(r)^2) == cosh(kappa * ln r); the cosh form avoids
// squaring a large kln value.
inline double escort_denominator(Kappa k, double log_ratio) {
  return k.classical() ? 1.0 : std::cosh(k.value() * log_ratio);
}

}  // namespace detail

/// E_p[f] = sum_x f(x) p(x).
inline double expectation(const FiniteDensity& p, std::span<const double> values) {
  if (values.size() != p.size()) {
    throw std::invalid_argument("expectation: length must match space");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += values[i] * p[i];
  return sum;
}

inline double expectation(const FiniteDensity& p, const RandomVariable& f) {
  detail::require_same_space(p.space(), f.space(), "expectation");
  return expectation(p, std::span<const double>(f.values()));
}

/// kappa-divergence D_kappa(p || q) = E_p[kln(p/q)]. Nonnegative, zero iff
/// p == q; the Kullback-Leibler divergence at kappa = 0. Both densities must
/// be strictly positive.
inline double divergence(Kappa k, const FiniteDensity& p, const FiniteDensity& q) {
  detail::require_same_space(p.space(), q.space(), "divergence");
  detail::require_strict(p, "divergence");
  detail::require_strict(q, "divergence");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += p[i] * kln(k, p[i] / q[i]);
  }
  return sum;
}

/// Escort density of q relative to p: proportional to
/// q(x) / sqrt(1 + kappa^2 kln(q(x)/p(x))^2), renormalized. Collapses to q
/// at kappa = 0. This is the weight appearing in the derivative of the
/// normalization functional.
inline FiniteDensity escort(Kappa k, const FiniteDensity& p, const FiniteDensity& q) {
  detail::require_same_space(p.space(), q.space(), "escort");
  detail::require_strict(p, "escort");
  detail::require_strict(q, "escort");
  std::vector<double> w(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    w[i] = q[i] / detail::escort_denominator(k, std::log(q[i] / p[i]));
    total += w[i];
  }
  for (double& wi : w) wi /= total;
  return FiniteDensity(p.space(), std::move(w));
}

/// Uniform density on a subset of states (mass 1/|subset| on members, zero
/// elsewhere). Boundary unless the subset covers the whole space.
inline FiniteDensity uniform_on(const StateSpace& space, const std::vector<std::size_t>& subset) {
  if (subset.empty()) {
    throw std::invalid_argument("uniform_on: subset must be nonempty");
  }
  std::vector<double> w(space.size(), 0.0);
  for (std::size_t i : subset) {
    if (i >= space.size()) {
      throw std::invalid_argument("uniform_on: state index out of range");
    }
    if (w[i] != 0.0) {
      throw std::invalid_argument("uniform_on: repeated state index");
    }
    w[i] = 1.0 / static_cast<double>(subset.size());
  }
  return FiniteDensity(space, std::move(w));
}

inline FiniteDensity uniform(const StateSpace& space) {
  std::vector<double> w(space.size(), 1.0 / static_cast<double>(space.size()));
  return FiniteDensity(space, std::move(w));
}

/// Total variation distance (1/2) * sum_x |a(x) - b(x)|.
inline double total_variation(const FiniteDensity& a, const FiniteDensity& b) {
  detail::require_same_space(a.space(), b.space(), "total_variation");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

}  // namespace kappa
