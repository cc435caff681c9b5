// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "memheat/admissibility.hpp"
#include "memheat/controllability.hpp"
#include "memheat/error.hpp"
#include "memheat/evolution.hpp"
#include "memheat/fractional.hpp"
#include "memheat/scenario.hpp"
#include "memheat/transforms.hpp"
#include "memheat/volterra.hpp"

using namespace memheat;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
const MemoryKernel kZero = MemoryKernel::zero();
const MemoryKernel kHeat = MemoryKernel::delta(1.0);
const MemoryKernel kHalf = MemoryKernel::power_law(0.5, PowerRole::K);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Outcome ml_oracle() {
  const auto start = std::chrono::steady_clock::now();
  double err = 0.0;
  std::size_t cells = 0;
  for (double a : {0.3, 0.5, 0.7}) {
    const MemoryKernel k = MemoryKernel::power_law(a, PowerRole::K);
    const ContourSpec spec = contour_for(k, kZero);
    for (const auto& row : scenario::oracle_fixtures()["mittag_leffler_grid"]) {
      if (row["alpha"].get<double>() != a) continue;
      err = std::max(err, rel(mode_evolution_kernel(k, kZero, row["mu2"], row["t"], spec).real(), row["value"]));
      ++cells;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {err < 1e-6 && secs < 30.0 && cells == 46,
          std::to_string(cells) + " cells, max rel err " + fmt("%.2e", err) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome heat_limit() {
  const ContourSpec spec = contour_for(kHeat, kZero);
  double err = 0.0;
  for (double mu2 : {1.0, 4.0, 16.0, 64.0}) {
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      const double ex = std::exp(-mu2 * t);
      err = std::max(err, std::abs(mode_evolution_kernel(kHeat, kZero, mu2, t, spec).real() - ex));
      err = std::max(err, std::abs(mode_forcing_kernel(kHeat, kZero, mu2, t, spec).real() - ex));
    }
  }
  double lap = 0.0;
  for (double mu2 : {1.0, 4.0}) {
    for (double lambda : {1.0, 2.0, 4.0}) {
      const double v = integrate(
          [&](double t) { return t == 0.0 ? 1.0 : std::exp(-lambda * t) * mode_evolution_kernel(kHeat, kZero, mu2, t, spec).real(); },
          0.0, 40.0, 64);
      lap = std::max(lap, rel(v, 1.0 / (lambda + mu2)));
    }
  }
  return {err < 1e-8 && lap < 1e-4, "max abs err " + fmt("%.2e", err) + ", Laplace round trip " + fmt("%.2e", lap)};
}

Outcome contour_independence() {
  const AdmissibilityReport a = verify_assumptions(kHalf, kZero, kDefaultThetaA);
  const ContourSpec base = default_contour(a.theta_max);
  ContourSpec alt = base;
  alt.arc_radius = 2.0 * base.arc_radius;
  alt.ray_angle = base.ray_angle - 0.05;
  alt.validate(a.theta_max);
  double err = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    for (double mu2 : {1.0, 4.0, 16.0}) {
      err = std::max(err, std::abs(mode_evolution_kernel(kHalf, kZero, mu2, t, base).real() -
                                   mode_evolution_kernel(kHalf, kZero, mu2, t, alt).real()));
      err = std::max(err, std::abs(mode_forcing_kernel(kHalf, kZero, mu2, t, base).real() -
                                   mode_forcing_kernel(kHalf, kZero, mu2, t, alt).real()));
    }
    err = std::max(err, std::abs(psi(kHalf, kZero, t, base).real() - psi(kHalf, kZero, t, alt).real()));
  }
  return {err < 1e-6, "max difference " + fmt("%.2e", err)};
}

Outcome psi_closed_form() {
  const ContourSpec spec = contour_for(kHalf, kZero);
  double err = 0.0;
  for (double t : {0.25, 1.0, 4.0}) err = std::max(err, std::abs(psi(kHalf, kZero, t, spec).real() - 1.0 / std::sqrt(kPi * t)));
  double zero = 0.0;
  const std::vector<std::pair<double, MemoryKernel>> pairs{{2.0, MemoryKernel::exp_sum({{1.0, 1.0}})},
                                                          {3.0, MemoryKernel::exp_sum({{1.0, 2.0}})},
                                                          {0.5, MemoryKernel::exp_sum({{0.5, 1.0}, {2.0, 5.0}})}};
  for (const auto& [c, n] : pairs) {
    const MemoryKernel k = MemoryKernel::reducible_partner(c, n);
    const ContourSpec s = contour_for(k, n);
    for (double t : {0.25, 0.7, 2.0}) zero = std::max(zero, std::abs(psi(k, n, t, s).real()));
  }
  return {err < 1e-6 && zero < 1e-8, "closed form err " + fmt("%.2e", err) + ", reducible max |psi| " + fmt("%.2e", zero)};
}

Outcome initial_limit() {
  const ContourSpec spec = contour_for(kHalf, kZero);
  const EigenBasis basis(kPi, 8);
  std::vector<double> dev;
  for (double t : {1e-1, 1e-2, 1e-3}) {
    double d = 0.0;
    for (std::size_t n = 1; n <= 8; ++n) d = std::max(d, std::abs(mode_evolution_kernel(kHalf, kZero, basis.mu2(n), t, spec).real() - 1.0));
    dev.push_back(d);
  }
  const bool decreasing = dev[1] < dev[0] && dev[2] < dev[1];
  return {dev[2] < 0.02 && decreasing, "max_n |e_n - 1| at t = 0.1, 0.01, 0.001: " + fmt("%.4f", dev[0]) + ", " +
                                           fmt("%.4f", dev[1]) + ", " + fmt("%.4f", dev[2]) + " (L = pi)"};
}

Outcome resolvents() {
  const UniformGrid g = UniformGrid::over(2.0, 512);
  const double a = 1.5, b = 0.5;
  const SampledKernel re = resolvent_kernel(MemoryKernel::exp_sum({{a, b}}), g);
  double exp_err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) exp_err = std::max(exp_err, std::abs(re.value(k) - a * std::exp(-(a + b) * g.at(k))));

  const MemoryKernel abel = MemoryKernel::power_law(0.5, PowerRole::N);
  const SampledKernel ra = resolvent_kernel(abel, g);
  double abel_err = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) {
    const double t = g.at(k);
    // t^-1/2 E_{1/2,1/2}(-t^1/2) by the series
    abel_err = std::max(abel_err, std::abs(ra.value(k) - mittag_leffler(0.5, 0.5, -std::sqrt(t)) / std::sqrt(t)));
  }
  const double pair = resolvent_residual(ra, SampledKernel::from_kernel(abel, g));
  return {exp_err < 1e-8 && abel_err < 1e-5 && pair < 1e-5,
          "exponential " + fmt("%.2e", exp_err) + ", Abel " + fmt("%.2e", abel_err) + ", inverse pair " + fmt("%.2e", pair)};
}

Outcome boundary_steady_state() {
  const EigenBasis basis(kPi, 32);
  const UniformGrid g = UniformGrid::over(5.0, 5 * 512);
  const ModalSolver s(kHeat, kZero, basis, g, contour_for(kHeat, kZero));
  const ControlSignal f = ControlSignal::scalar(g, std::vector<double>(g.size(), 1.0));
  const SpectralField w = s.solve_boundary(SpectralField(basis), f, BoundarySide::Left, g.steps);
  const SpectralField lift(basis, green_lift_coeffs(basis, BoundarySide::Left));
  const double gap = (w - lift).l2_norm();
  return {gap < 1e-3, "||w_f(5) - lift|| = " + fmt("%.3e", gap) + " (mode 1 alone: g_1 e^-5 = " +
                          fmt("%.3e", lift.coeff(1) * std::exp(-5.0)) + ")"};
}

Outcome approximate_control() {
  const EigenBasis basis(kPi, 64);
  const UniformGrid g = UniformGrid::over(1.0, 512);
  const ModalSolver s(kHalf, kZero, basis, g, contour_for(kHalf, kZero));
  const ControlGeometry geo = ControlGeometry::distributed(kPi / 4, 3 * kPi / 4);
  const SpectralField target = SpectralField::unit(basis, 1);
  std::vector<double> res;
  for (std::size_t m : {2, 4, 8, 16}) res.push_back(synthesize_control(target, s, {ControlKind::Distributed, m, 4}, geo).residual);
  bool decreasing = true;
  for (std::size_t i = 1; i < res.size(); ++i) decreasing = decreasing && res[i] < res[i - 1];

  const ControlBasis small{ControlKind::Distributed, 2, 2};
  const Eigen::MatrixXd M = forward_map(s, small, geo);
  const Eigen::VectorXd c(Eigen::Vector4d(1.0, -0.5, 0.25, 2.0));
  const SynthesisResult exact = synthesize_control(SpectralField(basis, M * c), s, small, geo, 0.0);

  std::ostringstream d;
  d << "residuals";
  for (double r : res) d << ' ' << fmt("%.3e", r);
  d << ", reachable target residual " << fmt("%.1e", exact.residual);
  return {decreasing && res.back() < 1e-2 && exact.residual < 1e-8, d.str()};
}

Outcome obstruction() {
  const std::vector<double> mu2{64, 256, 1024};
  const ObstructionReport o = obstruction_ratio(kHalf, kZero, 1.0, mu2, contour_for(kHalf, kZero));
  const double r = o.ratio.back();

  const EigenBasis basis(kPi, 64);
  const UniformGrid g = UniformGrid::over(0.5, 256);
  const ControlGeometry geo = ControlGeometry::distributed(kPi / 4, 3 * kPi / 4);
  const SpectralField w0 = SpectralField::from_sequence(basis, [](std::size_t n) { return 1.0 / double(n); });
  const std::vector<std::size_t> m{4, 8, 16, 32};
  const ModalSolver frac(kHalf, kZero, basis, g, contour_for(kHalf, kZero));
  const ModalSolver heat(kHeat, kZero, basis, g, contour_for(kHeat, kZero));
  const NullControlReport nf = null_control_certificate(w0, frac, geo, m);
  const NullControlReport nh = null_control_certificate(w0, heat, geo, m);
  bool heat_down = true;
  for (std::size_t i = 1; i < nh.residuals.size(); ++i) heat_down = heat_down && nh.residuals[i] < nh.residuals[i - 1];
  const double floor_ratio = nf.residuals.back() / nh.residuals.back();
  return {std::abs(r - 1.0) < 0.05 && nf.obstructed && floor_ratio > 10.0 && heat_down,
          "r at mu^2 = 1024: " + fmt("%.6f", r) + ", fractional floor " + fmt("%.3e", nf.residuals.back()) +
              " vs heat " + fmt("%.3e", nh.residuals.back()) + " (x" + fmt("%.0f", floor_ratio) + ")"};
}

Outcome sector_bound() {
  double worst = 0.0;
  std::ostringstream d;
  for (auto [a, g] : {std::pair{0.5, 0.5}, {0.9, 0.9}, {0.7, 0.3}}) {
    const AdmissibilityReport r = verify_assumptions(MemoryKernel::power_law(a, PowerRole::K),
                                                     MemoryKernel::power_law(g, PowerRole::N), kDefaultThetaA);
    const double bound = *max_sector_angle_case3(a, g);
    const double gap = std::abs(r.theta_max - bound) / bound;
    worst = std::max(worst, gap);
    d << '(' << a << ',' << g << ") " << fmt("%.4f", r.theta_max) << '/' << fmt("%.4f", bound) << "  ";
  }
  d << "max gap " << fmt("%.2e", worst);
  return {worst < 0.05, d.str()};
}

Outcome blowup() {
  const std::vector<double> times{0.9999};
  const BlowupSamples s = example_a2_blowup(0.1, 1.0, times);
  const double v = s.value_at(0.9999);
  return {s.bound_holds() && v > 6.0, "value at 1 - 1e-4: " + fmt("%.4f", v) + ", bound " +
                                          fmt("%.4f", s.lower_bound[s.index_of(0.9999)]) + " over " +
                                          std::to_string(s.t.size()) + " nodes"};
}

Outcome reducibility_matrix() {
  const MemoryKernel e11 = MemoryKernel::exp_sum({{1.0, 1.0}});
  const MemoryKernel e12 = MemoryKernel::exp_sum({{1.0, 2.0}});
  const std::vector<std::pair<MemoryKernel, MemoryKernel>> pairs{
      {kHeat, kZero},
      {MemoryKernel::reducible_partner(2.0, e11), e11},
      {MemoryKernel::reducible_partner(3.0, e12), e12},
      {kHalf, kZero},
      {kHeat, e11},
      {MemoryKernel(1.0, ExpSum{{{2.0, 1.0}}}), MemoryKernel::exp_sum({{1.0, 0.5}})},
  };
  std::size_t agree = 0;
  std::string marks;
  for (const auto& [k, n] : pairs) {
    const ContourSpec spec = contour_for(k, n);
    const bool reducible = reducibility_test(k, n, sector_samples(verify_assumptions(k, n, kDefaultThetaA).theta_max)).has_value();
    const bool zero = z_set_scan(k, n, 0.1, 10.0, 64, spec).identically_zero;
    agree += reducible == zero;
    marks += reducible ? 'R' : '-';
  }
  return {agree == pairs.size(), std::to_string(agree) + "/" + std::to_string(pairs.size()) + " agree, pattern " + marks};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"mittag-leffler oracle agreement", ml_oracle},
      {"heat-limit exactness", heat_limit},
      {"contour independence", contour_independence},
      {"psi closed form", psi_closed_form},
      {"initial-condition limit", initial_limit},
      {"resolvent identities", resolvents},
      {"boundary steady state", boundary_steady_state},
      {"approximate controllability surrogate", approximate_control},
      {"obstruction dichotomy", obstruction},
      {"sector bound agreement", sector_bound},
      {"fractional integral blow-up", blowup},
      {"reducibility and z-set consistency", reducibility_matrix},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %2zu %-40s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
