#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "common.hpp"
#include "memheat/controllability.hpp"
#include "memheat/error.hpp"
#include "memheat/evolution.hpp"
#include "memheat/fractional.hpp"
#include "memheat/transforms.hpp"

namespace memheat::scenario {

using nlohmann::json;
namespace fs = std::filesystem;

namespace detail {

PreparedPair prepare(const ScenarioConfig& c) {
  PreparedPair p{parse_kernel(c.kernels.K), parse_kernel(c.kernels.N), {}, {}};
  p.admissibility = verify_assumptions(p.k, p.n, c.tolerances.theta_A);
  if (!p.admissibility.admissible) {
    std::string what = "kernel pair (" + c.kernels.K + ", " + c.kernels.N + ") is not admissible";
    if (!p.admissibility.failures.empty()) what += ": " + to_string(p.admissibility.failures.front().item);
    throw AdmissibilityError(what);
  }
  const double theta = p.admissibility.theta_max;
  p.spec = c.contour ? c.contour->build(theta) : default_contour(theta);
  p.spec.validate(theta);
  return p;
}

InversionOptions inversion_options(const ScenarioConfig& c) {
  InversionOptions o;
  o.rel_tol = c.tolerances.rel_tol;
  return o;
}

std::size_t steps_for(const ScenarioConfig& c) {
  return std::max<std::size_t>(8, static_cast<std::size_t>(std::lround(c.time.T * static_cast<double>(c.time.steps_per_unit))));
}

json contour_json(const ContourSpec& s) {
  const char* scaling = s.t_scaling == TimeScaling::Always ? "always" : s.t_scaling == TimeScaling::Never ? "never" : "auto";
  return {{"arc_radius", s.arc_radius}, {"ray_angle", s.ray_angle}, {"truncation", s.truncation},
          {"ray_nodes", s.ray_nodes},   {"arc_nodes", s.arc_nodes}, {"t_scaling", scaling}};
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path.string() + "'");
  out.precision(17);
  return out;
}

void write_json(const fs::path& path, const json& j, RunResult& result) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  result.files.push_back(path);
}

}  // namespace detail

namespace {

using detail::open_output;
using detail::prepare;

json coeff_list(const SpectralField& f, std::size_t count) {
  json a = json::array();
  for (std::size_t n = 1; n <= std::min(count, f.basis().modes()); ++n) a.push_back(f.coeff(n));
  return a;
}

SolverOptions solver_options(const ScenarioConfig& c) {
  SolverOptions o;
  o.inversion = detail::inversion_options(c);
  o.convolution_tol = c.tolerances.convolution_tol;
  return o;
}

ModalSolver make_solver(const ScenarioConfig& c, const detail::PreparedPair& p) {
  return ModalSolver(p.k, p.n, c.eigen_basis(), UniformGrid::over(c.time.T, detail::steps_for(c)), p.spec,
                     solver_options(c));
}

json pair_json(const detail::PreparedPair& p) {
  return {{"K", p.k.to_string()}, {"N", p.n.to_string()}, {"theta_max", p.admissibility.theta_max},
          {"contour", detail::contour_json(p.spec)}};
}

json simulate(const ScenarioConfig& c, const fs::path& out, RunResult& result) {
  const auto p = prepare(c);
  const ModalSolver solver = make_solver(c, p);
  const EigenBasis& basis = solver.basis();
  const UniformGrid& grid = solver.grid();
  const SpectralField w0 = c.initial.build(basis);

  std::vector<TrajectorySample> traj;
  if (c.forcing.kind == "distributed") {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()),
                                              static_cast<Eigen::Index>(basis.modes()));
    F.col(static_cast<Eigen::Index>(c.forcing.mode - 1)).setConstant(c.forcing.value);
    traj = solver.trajectory_distributed(w0, ControlSignal::modal(grid, F), c.time.stride);
  } else if (c.forcing.kind == "boundary") {
    const auto f = ControlSignal::scalar(grid, std::vector<double>(grid.size(), c.forcing.value));
    const BoundarySide side = c.forcing.side == "left" ? BoundarySide::Left : BoundarySide::Right;
    traj = solver.trajectory_boundary(w0, f, side, c.time.stride);
  } else {
    traj = solver.trajectory_free(w0, c.time.stride);
  }

  {
    auto csv = open_output(out / "trajectory.csv");
    write_trajectory_csv(csv, traj);
    result.files.push_back(out / "trajectory.csv");
  }
  {
    auto csv = open_output(out / "snapshots.csv");
    write_snapshot_csv(csv, traj, c.time.snapshot_points);
    result.files.push_back(out / "snapshots.csv");
  }

  json r = pair_json(p);
  r["T"] = c.time.T;
  r["steps"] = grid.steps;
  r["forcing"] = c.forcing.kind;
  r["table_error"] = solver.table_error();
  r["table_imag_residual"] = solver.table_imag_residual();
  r["final_coefficients"] = coeff_list(traj.back().state, 8);
  r["final_l2_norm"] = traj.back().state.l2_norm();
  return r;
}

json verify(const ScenarioConfig& c, const fs::path& out, RunResult& result, int& exit_code) {
  const MemoryKernel k = parse_kernel(c.kernels.K);
  const MemoryKernel n = parse_kernel(c.kernels.N);
  const AdmissibilityReport a = verify_assumptions(k, n, c.tolerances.theta_A);

  json r{{"K", k.to_string()},
         {"N", n.to_string()},
         {"theta_A", c.tolerances.theta_A},
         {"admissible", a.admissible},
         {"theta_max", a.theta_max},
         {"j_nonvanishing", a.j_nonvanishing},
         {"asymptotics",
          {{"k_limit", a.asymptotics.k_limit},
           {"k_growth", a.asymptotics.k_growth},
           {"k_vanish_at_zero", a.asymptotics.k_vanish_at_zero},
           {"n_decay", a.asymptotics.n_decay}}},
         {"growth_exponent", a.growth_exponent},
         {"samples_used", a.samples_used},
         {"failure_count", a.failures.size()}};

  // Closed-form sector bound when K and N are the pure power-law pair.
  const auto* pk = std::get_if<PowerLaw>(&k.singular_part());
  const auto* pn = std::get_if<PowerLaw>(&n.singular_part());
  if (pk && pn && k.delta_weight() == 0.0 && n.delta_weight() == 0.0 && pk->role == PowerRole::K &&
      pn->role == PowerRole::N) {
    if (auto bound = max_sector_angle_case3(pk->exponent, pn->exponent)) {
      r["closed_form_bound"] = *bound;
      r["relative_gap"] = std::abs(a.theta_max - *bound) / *bound;
    }
  }

  auto csv = open_output(out / "failures.csv");
  csv << "re,im,item\n";
  for (const auto& f : a.failures) csv << f.lambda.real() << ',' << f.lambda.imag() << ',' << to_string(f.item) << '\n';
  result.files.push_back(out / "failures.csv");

  if (!a.admissible) exit_code = kAdmissibility;
  return r;
}

json control(const ScenarioConfig& c, const fs::path& out, RunResult& result) {
  const auto p = prepare(c);
  const ModalSolver solver = make_solver(c, p);
  const ControlGeometry geometry = c.geometry.build();
  const SpectralField target = c.target.build(solver.basis());

  json curve = json::array();
  auto csv = open_output(out / "residual_curve.csv");
  csv << "time_atoms,size,residual,control_norm,gram_condition\n";
  bool decreasing = true;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t m : c.basis.time_atoms) {
    ControlBasis b{geometry.is_distributed() ? ControlKind::Distributed : ControlKind::Boundary, m,
                   c.basis.space_atoms};
    const SynthesisResult s = synthesize_control(target, solver, b, geometry, c.tolerances.rho);
    decreasing = decreasing && s.residual < previous;
    previous = s.residual;
    curve.push_back({{"time_atoms", m},
                     {"size", b.size()},
                     {"residual", s.residual},
                     {"control_norm", s.control_norm},
                     {"gram_condition", s.gram_condition},
                     {"rho", s.rho},
                     {"eigen_fallback", s.used_eigen_fallback}});
    csv << m << ',' << b.size() << ',' << s.residual << ',' << s.control_norm << ',' << s.gram_condition << '\n';
  }
  result.files.push_back(out / "residual_curve.csv");

  json r = pair_json(p);
  r["T"] = c.time.T;
  r["target_norm"] = target.l2_norm();
  r["residual_curve"] = curve;
  r["strictly_decreasing"] = decreasing;
  return r;
}

json zset_json(const ZSetScan& z, std::optional<double> reducible) {
  return {{"reducible", reducible.has_value()},
          {"c", reducible ? json(*reducible) : json(nullptr)},
          {"psi", z.identically_zero ? "identically-zero" : "zeros"},
          {"zeros", z.zeros},
          {"consistent", reducible.has_value() == z.identically_zero}};
}

void write_psi_csv(const fs::path& path, const ZSetScan& z, RunResult& result) {
  auto csv = open_output(path);
  csv << "t,psi\n";
  for (std::size_t i = 0; i < z.times.size(); ++i) csv << z.times[i] << ',' << z.values[i] << '\n';
  result.files.push_back(path);
}

json zset(const ScenarioConfig& c, const fs::path& out, RunResult& result) {
  const auto p = prepare(c);
  const auto samples = sector_samples(p.admissibility.theta_max);
  const auto red = reducibility_test(p.k, p.n, samples);
  const ZSetScan z = z_set_scan(p.k, p.n, c.zset.t_lo, c.zset.t_hi, c.zset.points, p.spec, c.tolerances.zero_tol);
  write_psi_csv(out / "psi.csv", z, result);
  json r = zset_json(z, red);
  r["K"] = p.k.to_string();
  r["N"] = p.n.to_string();
  return r;
}

json obstruction(const ScenarioConfig& c, const fs::path& out, RunResult& result) {
  const auto p = prepare(c);
  const ObstructionReport o = obstruction_ratio(p.k, p.n, c.time.T, c.obstruction.mu2, p.spec, c.tolerances.psi_tol);
  json ratios{{"obstructed", o.obstructed}, {"psi_T", o.psi_T}, {"mu2", o.mu2}, {"ratio", o.ratio}};
  if (!o.obstructed) ratios["note"] = "no obstruction at this T";

  const auto samples = sector_samples(p.admissibility.theta_max);
  const auto red = reducibility_test(p.k, p.n, samples);
  const ZSetScan z = z_set_scan(p.k, p.n, c.zset.t_lo, c.zset.t_hi, c.zset.points, p.spec, c.tolerances.zero_tol);
  write_psi_csv(out / "psi.csv", z, result);

  const ModalSolver solver = make_solver(c, p);
  const SpectralField w0 = c.initial.build(solver.basis());
  const NullControlReport nc =
      null_control_certificate(w0, solver, c.geometry.build(), c.basis.time_atoms, c.basis.space_atoms);
  json curve{{"applicable", nc.applicable},
             {"initial_dom_a_growth", nc.initial_dom_a.growth},
             {"free_dom_a2_growth", nc.free_dom_a2.growth},
             {"free_in_dom_a2", nc.free_dom_a2.member},
             {"psi_T", nc.psi_T},
             {"tail_ratio", nc.tail_ratio},
             {"basis_sizes", nc.basis_sizes},
             {"residuals", nc.residuals},
             {"relative_residuals", nc.relative_residuals},
             {"residual_floor", nc.residual_floor},
             {"obstructed", nc.obstructed}};
  if (!nc.applicable) curve["note"] = "test inapplicable, w0 in Dom A";

  auto csv = open_output(out / "ratio_sequence.csv");
  csv << "mu2,ratio\n";
  for (std::size_t i = 0; i < o.ratio.size(); ++i) csv << o.mu2[i] << ',' << o.ratio[i] << '\n';
  result.files.push_back(out / "ratio_sequence.csv");
  auto rc = open_output(out / "residual_curve.csv");
  rc << "time_atoms,residual,relative_residual\n";
  for (std::size_t i = 0; i < nc.residuals.size(); ++i) {
    rc << nc.basis_sizes[i] << ',' << nc.residuals[i] << ',' << nc.relative_residuals[i] << '\n';
  }
  result.files.push_back(out / "residual_curve.csv");

  json r = pair_json(p);
  r["T"] = c.time.T;
  r["residual_curve"] = curve;
  r["ratio_sequence"] = ratios;
  r["reducibility"] = {{"reducible", red.has_value()}, {"c", red ? json(*red) : json(nullptr)}};
  r["zset"] = zset_json(z, red);
  return r;
}

json example_a2(const ScenarioConfig& c, const fs::path& out, RunResult& result) {
  const auto& e = c.example_a2;
  const BlowupSamples s = example_a2_blowup(e.eps, c.time.T, e.times, e.steps, e.extra_nodes);
  auto csv = open_output(out / "blowup.csv");
  csv << "t,value,value_rl,lower_bound\n";
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    csv << s.t[i] << ',' << s.value[i] << ',' << s.value_rl[i] << ',' << s.lower_bound[i] << '\n';
  }
  result.files.push_back(out / "blowup.csv");

  json at = json::array();
  for (double t : e.times) {
    const std::size_t i = s.index_of(t);
    at.push_back({{"t", s.t[i]}, {"value", s.value[i]}, {"value_rl", s.value_rl[i]}, {"lower_bound", s.lower_bound[i]}});
  }
  return {{"eps", e.eps},      {"gamma", s.gamma}, {"T", c.time.T},
          {"nodes", s.t.size()}, {"bound_holds", s.bound_holds()}, {"samples", at}};
}

}  // namespace

RunResult run(const ScenarioConfig& config, const fs::path& out_dir, std::ostream& log) {
  RunResult result;
  const std::string name = to_string(config.experiment);
  json report;
  try {
    fs::create_directories(out_dir);
    switch (config.experiment) {
      case Experiment::Simulate: report = simulate(config, out_dir, result); break;
      case Experiment::Verify: report = verify(config, out_dir, result, result.exit_code); break;
      case Experiment::Control: report = control(config, out_dir, result); break;
      case Experiment::Obstruction: report = obstruction(config, out_dir, result); break;
      case Experiment::ZSet: report = zset(config, out_dir, result); break;
      case Experiment::ExampleA2: report = example_a2(config, out_dir, result); break;
      case Experiment::Validate: report = detail::run_validate(config, out_dir, result, log); break;
    }
  } catch (const AdmissibilityError& e) {
    result.exit_code = kAdmissibility;
    report = {{"error", e.what()}};
    log << name << ": admissibility failure: " << e.what() << '\n';
  } catch (const NumericalError& e) {
    result.exit_code = kNumerical;
    report = {{"error", e.what()}};
    log << name << ": numerical failure: " << e.what() << '\n';
  } catch (const DomainError& e) {
    result.exit_code = kFailure;
    report = {{"error", e.what()}};
    log << name << ": " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    result.exit_code = kFailure;
    report = {{"error", e.what()}};
    log << name << ": " << e.what() << '\n';
  }

  static constexpr const char* kStatus[] = {"ok", "failed", "admissibility failure", "numerical failure"};
  report["experiment"] = name;
  report["status"] = kStatus[result.exit_code];
  report["config"] = to_json(config);
  result.report = report;
  std::error_code ec;
  if (fs::is_directory(out_dir, ec)) detail::write_json(out_dir / (name + ".json"), report, result);
  return result;
}

}  // namespace memheat::scenario
