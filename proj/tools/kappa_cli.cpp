// Batch front-end for the kappa-deformed exponential toolkit: loads a model
// description, sweeps parameters and emits machine-readable tables/reports.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kappa/kappa.hpp"

namespace {

struct CommonOptions {
  std::string model_path;
  std::optional<double> kappa_override;
  std::string out_path;
  double tol = 1e-6;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--model", opts.model_path, "model spec file")->required();
  cmd->add_option("--kappa", opts.kappa_override, "override the spec's kappa");
  cmd->add_option("--out", opts.out_path, "output path (default stdout)");
  cmd->add_option("--tol", opts.tol, "residual threshold for verdicts");
}

kappa::Kappa effective_kappa(const kappa::ModelSpec& spec, const CommonOptions& opts) {
  if (opts.kappa_override) {
    try {
      return kappa::Kappa(*opts.kappa_override);
    } catch (const std::invalid_argument& e) {
      throw kappa::ParseError(e.what());
    }
  }
  return spec.kappa_param();
}

void emit(const CommonOptions& opts, const std::string& text) {
  if (opts.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out_path, std::ios::binary);
  if (!out) {
    throw kappa::ParseError("cannot open output file '" + opts.out_path + "'");
  }
  out << text;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 1 || (points == 1 && lo != hi) || hi < lo) {
    throw kappa::ParseError("bad theta grid");
  }
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  return grid;
}

std::vector<kappa::LatticeVector> try_basis(const kappa::EnergyModel& model) {
  if (!model.has_lattice()) return {};
  try {
    return kappa::orthogonal_lattice_basis(model);
  } catch (const std::invalid_argument&) {
    return {};  // constant energy: no invariants to report
  }
}

// ---- gibbs: theta sweep as a CSV table ----

int run_gibbs(const CommonOptions& opts, double theta_min, double theta_max, int theta_steps) {
  const auto spec = kappa::ModelSpec::parse_file(opts.model_path);
  const auto model = spec.to_model();
  const auto k = effective_kappa(spec, opts);
  const auto basis = try_basis(model);
  const auto grid = linspace(theta_min, theta_max, theta_steps);

  std::ostringstream out;
  out << "theta,psi,psi_prime";
  for (const auto& label : model.space().labels()) out << ",p(" << label << ")";
  out << ",max_basis_residual\n";

  for (double theta : grid) {
    const auto point = kappa::gibbs_density(k, model, theta);
    out << kappa::format_double(theta) << ',' << kappa::format_double(point.psi) << ','
        << kappa::format_double(kappa::psi_prime(point));
    for (std::size_t i = 0; i < point.density.size(); ++i) {
      out << ',' << kappa::format_double(point.density[i]);
    }
    double worst = std::numeric_limits<double>::quiet_NaN();
    if (!basis.empty()) {
      worst = 0.0;
      for (const auto& v : basis) {
        worst = std::max(worst, std::abs(kappa::kbinomial_residual(k, point.density, v)));
      }
    }
    out << ',' << kappa::format_double(worst) << '\n';
  }
  emit(opts, out.str());
  return 0;
}

// ---- invariants: residual report for a stored density ----

int run_invariants(const CommonOptions& opts, const std::string& density_path) {
  const auto spec = kappa::ModelSpec::parse_file(opts.model_path);
  const auto model = spec.to_model();
  const auto k = effective_kappa(spec, opts);
  const auto p = kappa::read_density_file(density_path, model.space());
  const auto basis = kappa::orthogonal_lattice_basis(model);

  std::ostringstream out;
  out << "kappa = " << kappa::format_double(k.value()) << '\n';
  out << "positivity = " << (p.strict() ? "strict" : "boundary") << '\n';
  out << "form = " << (p.strict() ? "kln" : "binomial") << '\n';

  double worst = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    out << "vector." << j + 1 << " =";
    for (auto x : basis[j].values()) out << ' ' << x;
    out << '\n';
    const double r = p.strict() ? kappa::kbinomial_residual(k, p, basis[j])
                                : kappa::kbinomial_residual_boundary(k, p, basis[j]);
    worst = std::max(worst, std::abs(r));
    out << "residual." << j + 1 << " = " << kappa::format_double(r) << '\n';
  }
  out << "max_residual = " << kappa::format_double(worst) << '\n';

  const char* verdict = "non-member";
  if (worst <= opts.tol) {
    verdict = p.strict() ? "member" : "boundary-consistent";
  }
  out << "verdict = " << verdict << '\n';
  emit(opts, out.str());
  return 0;
}

// ---- chart: coordinates, divergences and escort of q at reference p ----

int run_chart(const CommonOptions& opts, const std::string& p_path, const std::string& q_path,
              bool with_chart) {
  const auto spec = kappa::ModelSpec::parse_file(opts.model_path);
  const auto model = spec.to_model();
  const auto k = effective_kappa(spec, opts);
  const auto p = kappa::read_density_file(p_path, model.space());
  const auto q = kappa::read_density_file(q_path, model.space());

  std::ostringstream out;
  out << "kappa = " << kappa::format_double(k.value()) << '\n';
  try {
    if (with_chart) {
      const auto cp = kappa::to_coordinates(k, p, q);
      out << "psi = " << kappa::format_double(cp.psi) << '\n';
      out << "divergence.pq = " << kappa::format_double(kappa::divergence(k, p, q)) << '\n';
      out << "divergence.qp = " << kappa::format_double(kappa::divergence(k, q, p)) << '\n';
      for (std::size_t i = 0; i < model.size(); ++i) {
        out << "u." << model.space().label(i) << " = "
            << kappa::format_double(cp.coordinates[i]) << '\n';
      }
      const auto esc = kappa::escort(k, p, q);
      for (std::size_t i = 0; i < model.size(); ++i) {
        out << "escort." << model.space().label(i) << " = " << kappa::format_double(esc[i])
            << '\n';
      }
    } else {
      out << "divergence.pq = " << kappa::format_double(kappa::divergence(k, p, q)) << '\n';
      out << "divergence.qp = " << kappa::format_double(kappa::divergence(k, q, p)) << '\n';
    }
  } catch (const std::domain_error& e) {
    throw kappa::ParseError(e.what());  // non-strict input is a usage error here
  }
  emit(opts, out.str());
  return 0;
}

// ---- ode: auto-parallel trajectory versus the closed form ----

int run_ode(const CommonOptions& opts, const std::string& u_path, double theta_max, int theta_steps,
            double step) {
  const auto spec = kappa::ModelSpec::parse_file(opts.model_path);
  const auto model = spec.to_model();
  const auto k = effective_kappa(spec, opts);
  const auto p0 = kappa::uniform(model.space());
  const auto raw = kappa::read_vector_file(u_path, model.space(), "tangent vector");

  std::optional<kappa::TangentVector> u;
  try {
    u.emplace(p0, raw);
  } catch (const std::invalid_argument& e) {
    throw kappa::ParseError(e.what());
  }

  if (!(theta_max > 0.0) || theta_steps < 3 || !(step > 0.0)) {
    throw kappa::ParseError("ode: need theta-max > 0, theta-steps >= 3, step > 0");
  }
  // Symmetric grid with an exact zero at the center.
  const int half = theta_steps / 2;
  std::vector<double> grid;
  for (int i = -half; i <= half; ++i) {
    grid.push_back(static_cast<double>(i) * (theta_max / half));
  }

  const auto path = kappa::integrate_autoparallel(k, p0, *u, grid, step);

  std::ostringstream out;
  out << "theta,tv\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> scaled(raw);
    for (double& x : scaled) x *= grid[i];
    const auto closed = kappa::from_coordinates(k, p0, kappa::TangentVector(p0, scaled));
    const double tv = kappa::total_variation(path[i], closed.density);
    worst = std::max(worst, tv);
    out << kappa::format_double(grid[i]) << ',' << kappa::format_double(tv) << '\n';
  }
  out << "# max_tv = " << kappa::format_double(worst) << '\n';
  emit(opts, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kappa-deformed exponential models: sweeps, invariants, charts"};
  app.require_subcommand(1);

  CommonOptions gibbs_opts;
  double theta_min = -2.0, theta_max = 2.0;
  int theta_steps = 9;
  auto* gibbs = app.add_subcommand("gibbs", "sweep the Gibbs family over theta");
  add_common(gibbs, gibbs_opts);
  gibbs->add_option("--theta-min", theta_min, "grid start");
  gibbs->add_option("--theta-max", theta_max, "grid end");
  gibbs->add_option("--theta-steps", theta_steps, "number of grid points");

  CommonOptions inv_opts;
  std::string density_path;
  auto* inv = app.add_subcommand("invariants", "test a density against the model invariants");
  add_common(inv, inv_opts);
  inv->add_option("--density", density_path, "density file")->required();

  CommonOptions chart_opts;
  std::string p_path, q_path;
  auto* chart = app.add_subcommand("chart", "chart coordinates of q at reference p");
  add_common(chart, chart_opts);
  chart->add_option("--p", p_path, "reference density file")->required();
  chart->add_option("--q", q_path, "represented density file")->required();

  CommonOptions div_opts;
  std::string dp_path, dq_path;
  auto* div = app.add_subcommand("divergence", "divergence between two densities");
  add_common(div, div_opts);
  div->add_option("--p", dp_path, "first density file")->required();
  div->add_option("--q", dq_path, "second density file")->required();

  CommonOptions ode_opts;
  std::string u_path;
  double ode_theta_max = 2.0, ode_step = 1e-3;
  int ode_steps = 41;
  auto* ode = app.add_subcommand("ode", "integrate the auto-parallel equation");
  add_common(ode, ode_opts);
  ode->add_option("--u", u_path, "tangent vector file (centered at uniform)")->required();
  ode->add_option("--theta-max", ode_theta_max, "integrate over [-theta-max, theta-max]");
  ode->add_option("--theta-steps", ode_steps, "number of reported grid points");
  ode->add_option("--step", ode_step, "RK4 step bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gibbs->parsed()) return run_gibbs(gibbs_opts, theta_min, theta_max, theta_steps);
    if (inv->parsed()) return run_invariants(inv_opts, density_path);
    if (chart->parsed()) return run_chart(chart_opts, p_path, q_path, true);
    if (div->parsed()) return run_chart(div_opts, dp_path, dq_path, false);
    if (ode->parsed()) return run_ode(ode_opts, u_path, ode_theta_max, ode_steps, ode_step);
  } catch (const kappa::SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
