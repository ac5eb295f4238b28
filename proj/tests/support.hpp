#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "kappa/kappa.hpp"

namespace testutil {

inline kappa::StateSpace toy_space() { return kappa::StateSpace::numbered(5); }

/// Five-state example: U = (0, 0, 1, 2, 2) on the unit lattice.
inline kappa::EnergyModel toy_model() {
  auto space = toy_space();
  kappa::RandomVariable energy(space, {0.0, 0.0, 1.0, 2.0, 2.0});
  return kappa::EnergyModel(space, energy, 1.0);
}

/// Random strict density: Dirichlet-like draw mixed with the uniform so all
/// weights stay bounded away from zero.
inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n,
                                          double uniform_mix = 0.1) {
  std::gamma_distribution<double> gamma(2.0, 1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) {
    x = gamma(rng);
    sum += x;
  }
  double total = 0.0;
  for (auto& x : w) {
    x = (1.0 - uniform_mix) * x / sum + uniform_mix / static_cast<double>(n);
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

inline kappa::FiniteDensity random_density(std::mt19937_64& rng, const kappa::StateSpace& space,
                                           double uniform_mix = 0.1) {
  return kappa::FiniteDensity(space, random_simplex(rng, space.size(), uniform_mix));
}

inline kappa::TangentVector random_tangent(std::mt19937_64& rng, const kappa::FiniteDensity& p,
                                           double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  std::vector<double> raw(p.size());
  for (auto& x : raw) x = unif(rng);
  return kappa::TangentVector::centered(p, std::move(raw));
}

// ---- independently coded classical (kappa = 0) formulas ----

inline double log_sum_exp(std::span<const double> a) {
  double m = a[0];
  for (double x : a) m = std::max(m, x);
  double s = 0.0;
  for (double x : a) s += std::exp(x - m);
  return m + std::log(s);
}

inline std::vector<double> softmax(std::span<const double> a) {
  const double lse = log_sum_exp(a);
  std::vector<double> p(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = std::exp(a[i] - lse);
  return p;
}

inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

// ---- exact integer linear algebra for lattice comparisons ----

using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// Row-style Hermite normal form (positive pivots, entries above a pivot
/// reduced into [0, pivot), zero rows dropped). Canonical per row lattice.
inline IntMatrix hermite_normal_form(IntMatrix m) {
  if (m.empty()) return m;
  const std::size_t cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    // Euclidean elimination below row r in column c.
    while (true) {
      std::size_t best = m.size();
      for (std::size_t i = r; i < m.size(); ++i) {
        if (m[i][c] != 0 && (best == m.size() || std::abs(m[i][c]) < std::abs(m[best][c]))) {
          best = i;
        }
      }
      if (best == m.size()) break;
      std::swap(m[r], m[best]);
      bool done = true;
      for (std::size_t i = r + 1; i < m.size(); ++i) {
        if (m[i][c] != 0) {
          const std::int64_t q = m[i][c] / m[r][c];
          for (std::size_t j = 0; j < cols; ++j) m[i][j] -= q * m[r][j];
          if (m[i][c] != 0) done = false;
        }
      }
      if (done) break;
    }
    if (m[r][c] == 0) continue;
    if (m[r][c] < 0) {
      for (std::size_t j = 0; j < cols; ++j) m[r][j] = -m[r][j];
    }
    for (std::size_t i = 0; i < r; ++i) {
      const std::int64_t q = m[i][c] >= 0 ? m[i][c] / m[r][c]
                                          : -((-m[i][c] + m[r][c] - 1) / m[r][c]);
      for (std::size_t j = 0; j < cols; ++j) m[i][j] -= q * m[r][j];
    }
    ++r;
  }
  m.resize(r);
  return m;
}

/// All nonzero integer vectors with entries in [-bound, bound] orthogonal to
/// the all-ones vector and to the lattice levels. Brute force, toy scale only.
inline IntMatrix brute_force_kernel(std::span<const std::int64_t> levels, std::int64_t bound) {
  const std::size_t n = levels.size();
  IntMatrix out;
  std::vector<std::int64_t> v(n, -bound);
  while (true) {
    std::int64_t sum = 0, dot = 0;
    bool nonzero = false;
    for (std::size_t i = 0; i < n; ++i) {
      sum += v[i];
      dot += v[i] * levels[i];
      nonzero = nonzero || v[i] != 0;
    }
    if (nonzero && sum == 0 && dot == 0) out.push_back(v);
    std::size_t i = 0;
    while (i < n && v[i] == bound) {
      v[i] = -bound;
      ++i;
    }
    if (i == n) break;
    ++v[i];
  }
  return out;
}

}  // namespace testutil
