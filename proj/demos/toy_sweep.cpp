// Minimal tour of the library on the five-state example: sweep the Gibbs
// family, check the lattice invariants and walk the auto-parallel curve.

#include <cstdio>

#include "kappa/kappa.hpp"

int main() {
  using namespace kappa;

  const auto space = StateSpace::numbered(5);
  const RandomVariable energy(space, {0, 0, 1, 2, 2});
  const EnergyModel model(space, energy, 1.0);
  const Kappa k(0.5);

  std::printf("theta        psi          p(1)      p(3)      p(5)      worst invariant\n");
  const auto basis = orthogonal_lattice_basis(model);
  for (double theta = -2.0; theta <= 2.0; theta += 0.5) {
    const auto point = gibbs_density(k, model, theta);
    double worst = 0.0;
    for (const auto& v : basis) {
      worst = std::max(worst, std::abs(kbinomial_residual(k, point.density, v)));
    }
    std::printf("%8.3f  %10.6f  %.6f  %.6f  %.6f  %.2e\n", theta, point.psi, point.density[0],
                point.density[2], point.density[4], worst);
  }

  const auto p0 = uniform(space);
  const auto u = TangentVector::centered(p0, energy.values());
  const std::vector<double> grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const auto path = integrate_autoparallel(k, p0, u, grid);
  std::printf("\nauto-parallel curve vs closed form (total variation):\n");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> scaled(u.values());
    for (double& x : scaled) x *= grid[i];
    const auto closed = from_coordinates(k, p0, TangentVector(p0, scaled));
    std::printf("  theta = %5.2f   tv = %.2e\n", grid[i],
                total_variation(path[i], closed.density));
  }
  return 0;
}
