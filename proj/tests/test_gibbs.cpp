#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "kappa/gibbs.hpp"
#include "kappa/invariants.hpp"
#include "support.hpp"

using kappa::EnergyModel;
using kappa::FiniteDensity;
using kappa::Kappa;
using kappa::RandomVariable;
using kappa::StateSpace;

namespace {

// Independent oracle: 100+ iterations of plain bisection on the residual.
double bisect_psi(Kappa k, const EnergyModel& model, double theta) {
  const auto sum_at = [&](double psi) {
    double s = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      s += kexp(k, theta * model.energy()[i] - psi);
    }
    return s;
  };
  double lo = -1.0, hi = 1.0;
  while (sum_at(lo) < 1.0) lo = 2.0 * lo - 1.0;
  while (sum_at(hi) > 1.0) hi = 2.0 * hi + 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (sum_at(mid) > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double normalization_residual(Kappa k, const EnergyModel& model, double theta, double psi) {
  kappa::detail::CompensatedSum s;
  for (std::size_t i = 0; i < model.size(); ++i) {
    s.add(kexp(k, theta * model.energy()[i] - psi));
  }
  return s.value() - 1.0;
}

}  // namespace

TEST_CASE("EnergyModel validation", "[gibbs]") {
  const auto space = StateSpace::numbered(3);
  CHECK_THROWS_AS(EnergyModel(space, RandomVariable(space, {0.0, -1.0, 2.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(EnergyModel(space, RandomVariable(space, {0.0, 0.5, 2.0}), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(EnergyModel(space, RandomVariable(space, {0.0, 1.0, 2.0}), -1.0),
                  std::invalid_argument);
  const EnergyModel ok(space, RandomVariable(space, {0.0, 0.5, 2.0}), 0.5);
  CHECK(ok.lattice_levels() == std::vector<std::int64_t>{0, 1, 4});
  const EnergyModel no_lattice(space, RandomVariable(space, {0.0, 0.3, 1.0}));
  CHECK_FALSE(no_lattice.has_lattice());
  CHECK_THROWS_AS(no_lattice.lattice_levels(), std::invalid_argument);
}

TEST_CASE("psi at theta = 0 is kln(N)", "[gibbs]") {
  const auto model = testutil::toy_model();
  CHECK_THAT(solve_psi_gibbs(Kappa(0.5), model, 0.0),
             Catch::Matchers::WithinRel(1.7888543819998317, 1e-13));
  for (double kv : {0.0, 0.25, 0.9}) {
    const Kappa k(kv);
    CHECK_THAT(solve_psi_gibbs(k, model, 0.0),
               Catch::Matchers::WithinAbs(kln(k, 5.0), 1e-13));
  }
}

TEST_CASE("classical limit is the log-partition function", "[gibbs]") {
  const auto model = testutil::toy_model();
  for (double theta : {-3.0, -1.0, 0.0, 0.5, 2.0, 10.0}) {
    std::vector<double> a(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) a[i] = theta * model.energy()[i];
    CHECK_THAT(solve_psi_gibbs(Kappa(0.0), model, theta),
               Catch::Matchers::WithinAbs(testutil::log_sum_exp(a), 1e-12));
  }
}

TEST_CASE("psi agrees with the bisection oracle", "[gibbs]") {
  const auto model = testutil::toy_model();
  const Kappa k(0.5);
  const double psi = solve_psi_gibbs(k, model, 1.0);
  CHECK_THAT(psi, Catch::Matchers::WithinAbs(bisect_psi(k, model, 1.0), 1e-11));
  CHECK_THAT(psi, Catch::Matchers::WithinAbs(3.1409517477045137, 1e-12));
  CHECK(std::abs(normalization_residual(k, model, 1.0, psi)) <= 1e-12);

  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> thetas(-5.0, 5.0);
  for (double kv : {0.25, 0.9}) {
    const Kappa kk(kv);
    for (int i = 0; i < 20; ++i) {
      const double theta = thetas(rng);
      CHECK_THAT(solve_psi_gibbs(kk, model, theta),
                 Catch::Matchers::WithinAbs(bisect_psi(kk, model, theta), 1e-11));
    }
  }
}

TEST_CASE("normalization residual across a wide theta grid", "[gibbs]") {
  const auto model = testutil::toy_model();
  for (double kv : {0.0, 0.25, 0.5, 0.9}) {
    const Kappa k(kv);
    for (double theta = -100.0; theta <= 100.0; theta += 10.0) {
      const double psi = solve_psi_gibbs(k, model, theta);
      CHECK(std::abs(normalization_residual(k, model, theta, psi)) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(solve_psi_gibbs(Kappa(0.5), model, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("the normalizer is strictly decreasing in psi", "[gibbs]") {
  const auto model = testutil::toy_model();
  const Kappa k(0.5);
  for (double theta : {-2.0, 0.5, 3.0}) {
    const double psi = solve_psi_gibbs(k, model, theta);
    CHECK(normalization_residual(k, model, theta, psi - 0.5) > 0.0);
    CHECK(normalization_residual(k, model, theta, psi + 0.5) < 0.0);
    CHECK(normalization_residual(k, model, theta, psi - 0.5) >
          normalization_residual(k, model, theta, psi - 0.25));
  }
}

TEST_CASE("gibbs_density basics", "[gibbs]") {
  const auto model = testutil::toy_model();
  const Kappa k(0.5);

  const auto at_zero = gibbs_density(k, model, 0.0);
  CHECK(kappa::total_variation(at_zero.density, kappa::uniform(model.space())) <= 1e-13);

  const auto point = gibbs_density(k, model, 1.3);
  CHECK(point.density.strict());
  CHECK(point.density[0] == point.density[1]);  // equal energies
  CHECK(point.density[3] == point.density[4]);
  // Pointwise construction invariant.
  for (std::size_t i = 0; i < model.size(); ++i) {
    CHECK(point.density[i] == kexp(k, 1.3 * model.energy()[i] - point.psi));
  }
  // Deformed-product factorization kexp(theta U) (x) kexp(-psi).
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double factored =
        kprod(k, kexp(k, 1.3 * model.energy()[i]), kexp(k, -point.psi));
    CHECK(std::abs(point.density[i] - factored) <= 1e-10 * (1.0 + factored));
  }
}

TEST_CASE("extreme theta approaches the boundary solutions", "[gibbs]") {
  const auto model = testutil::toy_model();
  const auto maximizers = kappa::uniform_on(model.space(), {3, 4});
  const auto minimizers = kappa::uniform_on(model.space(), {0, 1});
  for (double kv : {0.25, 0.5}) {
    const Kappa k(kv);
    CHECK(kappa::total_variation(gibbs_density(k, model, 1e3).density, maximizers) <= 1e-3);
    CHECK(kappa::total_variation(gibbs_density(k, model, -1e3).density, minimizers) <= 1e-3);
  }
}

TEST_CASE("psi_prime", "[gibbs]") {
  const auto model = testutil::toy_model();

  // Classical: psi' = E_theta[U].
  for (double theta : {-1.0, 0.0, 2.0}) {
    const auto point = gibbs_density(Kappa(0.0), model, theta);
    const double mean_u = expectation(point.density, model.energy());
    CHECK_THAT(psi_prime(point), Catch::Matchers::WithinAbs(mean_u, 1e-12));
  }

  // Constant energy forces psi' = c.
  const auto space = StateSpace::numbered(4);
  const EnergyModel constant(space, RandomVariable(space, {2.5, 2.5, 2.5, 2.5}));
  for (double kv : {0.0, 0.5, 0.9}) {
    CHECK_THAT(psi_prime(Kappa(kv), constant, 0.7),
               Catch::Matchers::WithinAbs(2.5, 1e-12));
  }

  // Finite-difference oracle, step 1e-5.
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> thetas(-3.0, 3.0);
  const double h = 1e-5;
  for (double kv : {0.0, 0.25, 0.5, 0.9}) {
    const Kappa k(kv);
    for (int i = 0; i < 25; ++i) {
      const double theta = thetas(rng);
      const double fd =
          (solve_psi_gibbs(k, model, theta + h) - solve_psi_gibbs(k, model, theta - h)) /
          (2.0 * h);
      CHECK(std::abs(psi_prime(k, model, theta) - fd) <= 1e-6);
    }
  }
  CHECK(std::abs(psi_prime(Kappa(0.5), model, 0.0) -
                 (solve_psi_gibbs(Kappa(0.5), model, h) -
                  solve_psi_gibbs(Kappa(0.5), model, -h)) / (2.0 * h)) <= 1e-6);
}

TEST_CASE("moment identity residual vanishes", "[gibbs]") {
  const auto model = testutil::toy_model();
  for (double kv : {0.0, 0.25, 0.5, 0.9}) {
    const Kappa k(kv);
    for (double theta : {-2.0, 0.0, 1.0, 4.0}) {
      CHECK(std::abs(moment_identity_residual(gibbs_density(k, model, theta))) <= 1e-10);
    }
  }
}

TEST_CASE("model densities satisfy the orthogonality relations", "[gibbs]") {
  const auto model = testutil::toy_model();
  const auto basis = orthogonal_lattice_basis(model);
  for (double kv : {0.25, 0.5, 0.9}) {
    const Kappa k(kv);
    for (double theta = -100.0; theta <= 100.0; theta += 12.5) {
      const auto point = gibbs_density(k, model, theta);
      for (const auto& v : basis) {
        CHECK(std::abs(kbinomial_residual(k, point.density, v)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("classical gibbs matches softmax", "[gibbs]") {
  const auto model = testutil::toy_model();
  for (double theta : {-4.0, -0.5, 0.0, 1.0, 7.0}) {
    std::vector<double> a(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) a[i] = theta * model.energy()[i];
    const auto expected = testutil::softmax(a);
    const auto point = gibbs_density(Kappa(0.0), model, theta);
    for (std::size_t i = 0; i < model.size(); ++i) {
      CHECK(std::abs(point.density[i] - expected[i]) <= 1e-12);
    }
  }
}
