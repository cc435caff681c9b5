#include <algorithm>
#include <cmath>
#include <limits>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "common.hpp"
#include "memheat/error.hpp"
#include "memheat/evolution.hpp"
#include "memheat/fractional.hpp"
#include "memheat/parallel.hpp"
#include "memheat/transforms.hpp"
#include "memheat/volterra.hpp"

namespace memheat::scenario::detail {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Check {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  std::string detail;
  bool pass = false;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Runs `body`; exceptions turn the check red with the message as detail.
template <class F>
Check guarded(std::string name, double tol, F&& body) {
  Check c{std::move(name), 0.0, tol, "", false};
  try {
    c.error = body(c.detail);
    c.pass = c.error <= tol;
  } catch (const std::exception& e) {
    c.error = std::numeric_limits<double>::infinity();
    c.detail = e.what();
  }
  return c;
}

MemoryKernel fractional(double a) { return MemoryKernel::power_law(a, PowerRole::K); }

std::vector<Check> run_checks(const ScenarioConfig& cfg) {
  const json& fx = oracle_fixtures();
  const MemoryKernel zero = MemoryKernel::zero();
  const MemoryKernel heat = MemoryKernel::delta(1.0);
  std::vector<Check> checks;

  checks.push_back(guarded("mittag-leffler series vs fixtures", 1e-10, [&](std::string& d) {
    double err = 0.0;
    for (const auto& row : fx["mittag_leffler_grid"]) {
      const double a = row["alpha"];
      const double z = -row["mu2"].get<double>() * std::pow(row["t"].get<double>(), a);
      err = std::max(err, rel(mittag_leffler(a, 1.0, z), row["value"]));
    }
    for (const auto& p : fx["mittag_leffler_points"]) {
      err = std::max(err, rel(mittag_leffler(p["a"], p["b"], p["z"]), p["value"]));
    }
    d = "max relative error over " + std::to_string(fx["mittag_leffler_grid"].size() + 5) + " values";
    return err;
  }));

  checks.push_back(guarded("e_n by contour vs mittag-leffler fixtures", 1e-6, [&](std::string& d) {
    const auto& grid = fx["mittag_leffler_grid"];
    std::vector<double> err(grid.size());
    std::vector<ContourSpec> specs;
    for (double a : {0.3, 0.5, 0.7}) specs.push_back(contour_for(fractional(a), zero));
    parallel_for(grid.size(), [&](std::size_t i) {
      const auto& row = grid[i];
      const double a = row["alpha"];
      const std::size_t which = a < 0.4 ? 0 : a < 0.6 ? 1 : 2;
      const double v = mode_evolution_kernel(fractional(a), zero, row["mu2"], row["t"], specs[which]).real();
      err[i] = rel(v, row["value"]);
    });
    d = "max relative error over " + std::to_string(grid.size()) + " cells";
    return *std::max_element(err.begin(), err.end());
  }));

  checks.push_back(guarded("heat closed forms", 1e-8, [&](std::string& d) {
    const ContourSpec spec = contour_for(heat, zero);
    double err = 0.0;
    for (double mu2 : {1.0, 4.0, 16.0}) {
      for (double t : {0.1, 0.5, 1.0}) {
        const double ex = std::exp(-mu2 * t);
        err = std::max(err, std::abs(mode_evolution_kernel(heat, zero, mu2, t, spec).real() - ex));
        err = std::max(err, std::abs(mode_forcing_kernel(heat, zero, mu2, t, spec).real() - ex));
      }
    }
    const EigenBasis b(std::numbers::pi, 8);
    const UniformGrid g = UniformGrid::over(1.0, 512);
    const ModalSolver solver(heat, zero, b, g, spec);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.size()), 8);
    F.col(1).setConstant(2.0);
    const SpectralField w = solver.solve_distributed(SpectralField::unit(b, 1), ControlSignal::modal(g, F), g.steps);
    err = std::max(err, std::abs(w.coeff(1) - std::exp(-1.0)));
    err = std::max(err, std::abs(w.coeff(2) - 2.0 * (1.0 - std::exp(-4.0)) / 4.0));
    d = "e_n, eps_n on 9 (mu2, t) pairs and a Duhamel solve";
    return err;
  }));

  checks.push_back(guarded("contour independence", 1e-6, [&](std::string& d) {
    const MemoryKernel k = fractional(0.5);
    const AdmissibilityReport a = verify_assumptions(k, zero, cfg.tolerances.theta_A);
    const ContourSpec base = default_contour(a.theta_max);
    ContourSpec alt = base;
    if (cfg.contour) {
      alt = cfg.contour->build(a.theta_max);
    } else {
      alt.arc_radius = 2.0 * base.arc_radius;
      alt.ray_angle = base.ray_angle - 0.05;
    }
    alt.validate(a.theta_max);
    double err = 0.0;
    for (double t : {0.5, 1.0, 2.0}) {
      for (double mu2 : {1.0, 16.0}) {
        err = std::max(err, std::abs(mode_evolution_kernel(k, zero, mu2, t, base).real() -
                                     mode_evolution_kernel(k, zero, mu2, t, alt).real()));
        err = std::max(err, std::abs(mode_forcing_kernel(k, zero, mu2, t, base).real() -
                                     mode_forcing_kernel(k, zero, mu2, t, alt).real()));
      }
      err = std::max(err, std::abs(psi(k, zero, t, base).real() - psi(k, zero, t, alt).real()));
    }
    std::ostringstream s;
    s << "angles " << base.ray_angle << " vs " << alt.ray_angle << ", radii " << base.arc_radius << " vs "
      << alt.arc_radius;
    d = s.str();
    return err;
  }));

  checks.push_back(guarded("psi closed form and reducible zero", 1e-6, [&](std::string& d) {
    const MemoryKernel k = fractional(0.5);
    const ContourSpec spec = contour_for(k, zero);
    double err = 0.0;
    for (const auto& p : fx["psi_fractional_half"]) err = std::max(err, std::abs(psi(k, zero, p["t"], spec).real() - p["value"].get<double>()));
    const MemoryKernel n = MemoryKernel::exp_sum({{1.0, 1.0}});
    const MemoryKernel kr = MemoryKernel::reducible_partner(2.0, n);
    err = std::max(err, std::abs(psi(kr, n, 0.7, contour_for(kr, n)).real()));
    d = "t^-1/2 / Gamma(1/2) at 3 times, 2(delta+N) at t = 0.7";
    return err;
  }));

  checks.push_back(guarded("exponential resolvent closed form", 1e-8, [&](std::string& d) {
    const UniformGrid g = UniformGrid::over(2.0, 512);
    const double a = 1.5, b = 0.5;
    const SampledKernel r = resolvent_kernel(MemoryKernel::exp_sum({{a, b}}), g);
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(r.value(k) - a * std::exp(-(a + b) * g.at(k))));
    d = "N = 1.5 e^{-0.5 t} on [0,2], 512 steps";
    return err;
  }));

  const MemoryKernel abel = MemoryKernel::power_law(0.5, PowerRole::N);
  const UniformGrid g2 = UniformGrid::over(2.0, 512);
  checks.push_back(guarded("Abel resolvent vs fixtures", 1e-5, [&](std::string& d) {
    const SampledKernel r = resolvent_kernel(abel, g2);
    double err = 0.0;
    for (const auto& p : fx["abel_resolvent"]) err = std::max(err, std::abs(r.value(g2.index_of(p["t"])) - p["value"].get<double>()));
    d = "t^-1/2 E_{1/2,1/2}(-t^1/2) at 4 nodes";
    return err;
  }));

  checks.push_back(guarded("inverse pair identity", 1e-5, [&](std::string& d) {
    const SampledKernel r = resolvent_kernel(abel, g2);
    d = "max |R + R*N - N| over nodes t > 0";
    return resolvent_residual(r, SampledKernel::from_kernel(abel, g2));
  }));

  checks.push_back(guarded("fractional blow-up vs quadrature", 5e-3, [&](std::string& d) {
    std::vector<double> times;
    for (const auto& p : fx["example_a2"]) times.push_back(p["t"]);
    const BlowupSamples s = example_a2_blowup(0.1, 1.0, times);
    double err = 0.0;
    for (const auto& p : fx["example_a2"]) err = std::max(err, rel(s.value_at(p["t"]), p["value"]));
    d = "max relative error at 4 times";
    return err;
  }));

  checks.push_back(guarded("fractional blow-up lower bound", 0.0, [&](std::string& d) {
    const BlowupSamples s = example_a2_blowup(0.1, 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.t.size(); ++i) worst = std::max(worst, s.lower_bound[i] - s.value[i]);
    d = "max (bound - value) over " + std::to_string(s.t.size()) + " nodes";
    return std::max(worst, 0.0);
  }));

  checks.push_back(guarded("projection round trip", 1e-8, [&](std::string& d) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    const EigenBasis b(std::numbers::pi, 8);
    SpectralField w(b);
    for (Eigen::Index i = 0; i < w.coeffs().size(); ++i) w.coeffs()(i) = normal(rng);
    const auto x = uniform_points(b, 257);
    const auto samples = synthesize(w, x);
    d = "seed " + std::to_string(cfg.seed);
    return (project(samples, x, b) - w).l2_norm();
  }));

  checks.push_back(guarded("sector bound", 0.05, [&](std::string& d) {
    const auto a = verify_assumptions(fractional(0.5), MemoryKernel::power_law(0.5, PowerRole::N), cfg.tolerances.theta_A);
    const double bound = *max_sector_angle_case3(0.5, 0.5);
    d = "theta_max " + std::to_string(a.theta_max) + " vs " + std::to_string(bound);
    return rel(a.theta_max, bound);
  }));

  checks.push_back(guarded("green lift", 1e-12, [&](std::string& d) {
    const EigenBasis b(std::numbers::pi, 16);
    const Eigen::VectorXd g = green_lift_coeffs(b, BoundarySide::Left);
    double err = std::abs(g(0) - fx["green_lift_left_first"].get<double>());
    for (Eigen::Index n = 1; n < g.size(); ++n) err = std::max(err, std::abs((n + 1) * g(n) - g(0)));
    d = "g_1 and n g_n constant";
    return err;
  }));

  return checks;
}

}  // namespace

json run_validate(const ScenarioConfig& c, const fs::path& out, RunResult& result, std::ostream& log) {
  const std::vector<Check> checks = run_checks(c);
  json list = json::array();
  bool all = true;
  auto csv = open_output(out / "checks.csv");
  csv << "name,error,tolerance,pass\n";
  log << std::left << std::setw(44) << "check" << std::setw(12) << "error" << std::setw(12) << "tolerance"
      << "result\n";
  for (const auto& ch : checks) {
    all = all && ch.pass;
    list.push_back({{"name", ch.name},
                    {"error", std::isfinite(ch.error) ? json(ch.error) : json(nullptr)},
                    {"tolerance", ch.tolerance},
                    {"pass", ch.pass},
                    {"detail", ch.detail}});
    csv << '"' << ch.name << "\"," << ch.error << ',' << ch.tolerance << ',' << (ch.pass ? 1 : 0) << '\n';
    std::ostringstream e;
    e << std::scientific << std::setprecision(2) << ch.error;
    std::ostringstream t;
    t << std::scientific << std::setprecision(1) << ch.tolerance;
    log << std::setw(44) << ch.name << std::setw(12) << e.str() << std::setw(12) << t.str()
        << (ch.pass ? "PASS" : "FAIL") << "  " << ch.detail << '\n';
  }
  result.files.push_back(out / "checks.csv");
  if (!all) result.exit_code = kFailure;
  return {{"checks", list}, {"all_passed", all}, {"seed", c.seed}};
}

}  // namespace memheat::scenario::detail
