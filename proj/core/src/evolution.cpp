#include "memheat/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "memheat/error.hpp"
#include "memheat/parallel.hpp"
#include "memheat/transforms.hpp"

namespace memheat {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::vector<double> mode_eigenvalues(const EigenBasis& basis) {
  std::vector<double> mu2(basis.modes());
  for (std::size_t n = 1; n <= basis.modes(); ++n) mu2[n - 1] = basis.mu2(n);
  return mu2;
}

// Components: [e_n | F/lambda | F/lambda^2] with F = 1/(lambda K^ + mu^2 J).
VectorIntegrand table_integrand(const MemoryKernel& k, const MemoryKernel& n, std::vector<double> mu2) {
  return [k, n, mu2 = std::move(mu2)](cplx lambda, std::span<cplx> out) {
    const std::size_t m = mu2.size();
    const cplx kh = laplace_transform(k, lambda);
    const cplx j = j_factor(n, lambda);
    const cplx lk = lambda * kh;
    const cplx inv = 1.0 / lambda;
    for (std::size_t c = 0; c < m; ++c) {
      const cplx f = 1.0 / (lk + mu2[c] * j);
      out[c] = kh * f;
      out[m + c] = f * inv;
      out[2 * m + c] = f * inv * inv;
    }
  };
}

}  // namespace

ControlSignal::ControlSignal(UniformGrid grid, std::variant<std::vector<double>, Eigen::MatrixXd> payload)
    : grid_(grid), payload_(std::move(payload)) {}

ControlSignal ControlSignal::scalar(UniformGrid grid, std::vector<double> samples) {
  if (samples.size() != grid.size()) throw DomainError("control samples do not match the grid");
  return {grid, std::move(samples)};
}

ControlSignal ControlSignal::modal(UniformGrid grid, Eigen::MatrixXd samples) {
  if (static_cast<std::size_t>(samples.rows()) != grid.size()) throw DomainError("control samples do not match the grid");
  return {grid, std::move(samples)};
}

const std::vector<double>& ControlSignal::scalar_samples() const {
  const auto* s = std::get_if<std::vector<double>>(&payload_);
  if (!s) throw DomainError("control signal is not scalar");
  return *s;
}

const Eigen::MatrixXd& ControlSignal::modal_samples() const {
  const auto* s = std::get_if<Eigen::MatrixXd>(&payload_);
  if (!s) throw DomainError("control signal is not modal");
  return *s;
}

bool ControlSignal::vanishes_at_ends(double tol) const {
  if (is_scalar()) {
    const auto& s = scalar_samples();
    return std::abs(s.front()) <= tol && std::abs(s.back()) <= tol;
  }
  const auto& m = modal_samples();
  return m.row(0).cwiseAbs().maxCoeff() <= tol && m.row(m.rows() - 1).cwiseAbs().maxCoeff() <= tol;
}

ModalSolver::ModalSolver(MemoryKernel k, MemoryKernel n, EigenBasis basis, UniformGrid grid, ContourSpec spec,
                         SolverOptions opts)
    : k_(std::move(k)), n_(std::move(n)), basis_(basis), grid_(grid), spec_(spec), opts_(opts) {
  spec_.validate();
  const std::size_t m = basis_.modes();
  std::vector<double> times(grid_.steps);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = grid_.at(i + 1);
  const InversionTable table = invert_table(table_integrand(k_, n_, mode_eigenvalues(basis_)), 3 * m, times, spec_,
                                            opts_.inversion);
  table_error_ = table.est_error;
  table_imag_ = table.max_imag_residual;

  const Eigen::Index rows = idx(grid_.size());
  e_ = Eigen::MatrixXd::Zero(rows, idx(m));
  e1_ = Eigen::MatrixXd::Zero(rows, idx(m));
  e2_ = Eigen::MatrixXd::Zero(rows, idx(m));
  e_.row(0).setOnes();
  const Eigen::Index r = idx(grid_.steps);
  e_.bottomRows(r) = table.values.leftCols(idx(m));
  e1_.bottomRows(r) = table.values.middleCols(idx(m), idx(m));
  e2_.bottomRows(r) = table.values.rightCols(idx(m));
}

std::vector<CellMoments> ModalSolver::forcing_moments(std::size_t mode, std::size_t stride) const {
  if (mode == 0 || mode > basis_.modes()) throw DomainError("mode index out of range");
  if (stride == 0) throw DomainError("stride must be positive");
  const Eigen::Index c = idx(mode - 1);
  const std::size_t cells = grid_.steps / stride;
  const double H = grid_.step * static_cast<double>(stride);
  std::vector<CellMoments> m(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const Eigen::Index a = idx(i * stride);
    const Eigen::Index b = idx((i + 1) * stride);
    m[i].m0 = e1_(b, c) - e1_(a, c);
    m[i].m1 = e1_(b, c) - (e2_(b, c) - e2_(a, c)) / H;
  }
  return m;
}

std::vector<double> ModalSolver::forcing_convolution(std::size_t mode, std::span<const double> u) const {
  if (u.size() != grid_.size()) throw DomainError("signal length does not match the grid");
  return convolve(forcing_moments(mode), u);
}

double ModalSolver::forcing_convolution_at(std::size_t mode, std::span<const double> u, std::size_t k) const {
  if (u.size() != grid_.size()) throw DomainError("signal length does not match the grid");
  if (k >= grid_.size()) throw DomainError("node index out of range");
  const auto m = forcing_moments(mode);
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += (m[i].m0 - m[i].m1) * u[k - i] + m[i].m1 * u[k - i - 1];
  return acc;
}

void ModalSolver::check_resolution(std::size_t mode, std::span<const double> u, std::size_t k, double fine) const {
  if (!(opts_.convolution_tol > 0.0) || k < 4 || k % 2 != 0) return;
  const auto m = forcing_moments(mode, 2);
  const std::size_t kc = k / 2;
  double coarse = 0.0;
  for (std::size_t i = 0; i < kc; ++i) {
    coarse += (m[i].m0 - m[i].m1) * u[2 * (kc - i)] + m[i].m1 * u[2 * (kc - i - 1)];
  }
  double umax = 0.0;
  for (std::size_t i = 0; i <= k; ++i) umax = std::max(umax, std::abs(u[i]));
  const double scale = std::abs(fine) + umax * std::abs(e1_(idx(k), idx(mode - 1)));
  const double est = std::abs(fine - coarse) / 3.0;
  if (est > opts_.convolution_tol * scale) {
    throw NumericalError("time grid too coarse for the forcing convolution (mode " + std::to_string(mode) + ")");
  }
}

std::vector<double> ModalSolver::memory_transform(std::span<const double> f) const {
  if (f.size() != grid_.size()) throw DomainError("signal length does not match the grid");
  if (n_.is_zero()) return {f.begin(), f.end()};
  return apply_memory(n_, grid_, f);
}

void ModalSolver::check_field(const SpectralField& w0) const {
  if (!(w0.basis() == basis_)) throw DomainError("initial state lives on a different basis");
}

void ModalSolver::check_signal(const ControlSignal& s, bool scalar) const {
  if (!(s.grid() == grid_)) throw DomainError("control signal lives on a different grid");
  if (s.is_scalar() != scalar) throw DomainError(scalar ? "boundary control must be scalar" : "distributed control must be modal");
  if (!scalar && static_cast<std::size_t>(s.modal_samples().cols()) != basis_.modes()) {
    throw DomainError("distributed control has the wrong number of modes");
  }
}

SpectralField ModalSolver::evolve_free(const SpectralField& w0, std::size_t k) const {
  check_field(w0);
  if (k >= grid_.size()) throw DomainError("node index out of range");
  if (k == 0) return w0;
  return SpectralField(basis_, e_.row(idx(k)).transpose().cwiseProduct(w0.coeffs()));
}

SpectralField ModalSolver::solve_distributed(const SpectralField& w0, const ControlSignal& F, std::size_t k) const {
  check_signal(F, false);
  SpectralField out = evolve_free(w0, k);
  if (k == 0) return out;
  const Eigen::MatrixXd& s = F.modal_samples();
  std::vector<double> add(basis_.modes(), 0.0);
  parallel_for(basis_.modes(), [&](std::size_t c) {
    std::vector<double> u(grid_.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = s(idx(i), idx(c));
    const double v = forcing_convolution_at(c + 1, u, k);
    check_resolution(c + 1, u, k, v);
    add[c] = v;
  });
  for (std::size_t c = 0; c < add.size(); ++c) out.coeffs()(idx(c)) += add[c];
  return out;
}

SpectralField ModalSolver::solve_boundary(const SpectralField& w0, const ControlSignal& f, BoundarySide side,
                                          std::size_t k) const {
  check_signal(f, true);
  SpectralField out = evolve_free(w0, k);
  if (k == 0) return out;
  const std::vector<double> g = memory_transform(f.scalar_samples());
  const Eigen::VectorXd lift = green_lift_coeffs(basis_, side);
  std::vector<double> add(basis_.modes(), 0.0);
  parallel_for(basis_.modes(), [&](std::size_t c) {
    const double v = forcing_convolution_at(c + 1, g, k);
    check_resolution(c + 1, g, k, v);
    add[c] = basis_.mu2(c + 1) * lift(idx(c)) * v;
  });
  for (std::size_t c = 0; c < add.size(); ++c) out.coeffs()(idx(c)) += add[c];
  return out;
}

std::vector<std::size_t> ModalSolver::sample_nodes(std::size_t stride) const {
  if (stride == 0) throw DomainError("stride must be positive");
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k <= grid_.steps; k += stride) nodes.push_back(k);
  if (nodes.back() != grid_.steps) nodes.push_back(grid_.steps);
  return nodes;
}

std::vector<TrajectorySample> ModalSolver::trajectory_free(const SpectralField& w0, std::size_t stride) const {
  std::vector<TrajectorySample> out;
  for (std::size_t k : sample_nodes(stride)) out.push_back({grid_.at(k), evolve_free(w0, k)});
  return out;
}

std::vector<TrajectorySample> ModalSolver::trajectory_distributed(const SpectralField& w0, const ControlSignal& F,
                                                                  std::size_t stride) const {
  check_field(w0);
  check_signal(F, false);
  const auto nodes = sample_nodes(stride);
  const std::size_t m = basis_.modes();
  std::vector<std::vector<double>> conv(m);
  parallel_for(m, [&](std::size_t c) {
    std::vector<double> u(grid_.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = F.modal_samples()(idx(i), idx(c));
    conv[c] = forcing_convolution(c + 1, u);
  });
  std::vector<TrajectorySample> out;
  for (std::size_t k : nodes) {
    SpectralField s = evolve_free(w0, k);
    for (std::size_t c = 0; c < m; ++c) s.coeffs()(idx(c)) += conv[c][k];
    out.push_back({grid_.at(k), std::move(s)});
  }
  return out;
}

std::vector<TrajectorySample> ModalSolver::trajectory_boundary(const SpectralField& w0, const ControlSignal& f,
                                                               BoundarySide side, std::size_t stride) const {
  check_field(w0);
  check_signal(f, true);
  const auto nodes = sample_nodes(stride);
  const std::size_t m = basis_.modes();
  const std::vector<double> g = memory_transform(f.scalar_samples());
  const Eigen::VectorXd lift = green_lift_coeffs(basis_, side);
  std::vector<std::vector<double>> conv(m);
  parallel_for(m, [&](std::size_t c) { conv[c] = forcing_convolution(c + 1, g); });
  std::vector<TrajectorySample> out;
  for (std::size_t k : nodes) {
    SpectralField s = evolve_free(w0, k);
    for (std::size_t c = 0; c < m; ++c) s.coeffs()(idx(c)) += basis_.mu2(c + 1) * lift(idx(c)) * conv[c][k];
    out.push_back({grid_.at(k), std::move(s)});
  }
  return out;
}

SpectralField evolve_free(const SpectralField& w0, double t, const MemoryKernel& k, const MemoryKernel& n,
                          const ContourSpec& spec, const InversionOptions& opts) {
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  if (t == 0.0) return w0;
  const auto& basis = w0.basis();
  const auto r = invert(evolution_integrand(k, n, mode_eigenvalues(basis)), basis.modes(), t, spec, opts);
  SpectralField out(basis);
  for (std::size_t c = 0; c < basis.modes(); ++c) out.coeffs()(idx(c)) = r[c].real() * w0.coeffs()(idx(c));
  return out;
}

SpectralField solve_distributed(const SpectralField& w0, const ControlSignal& F, double t, const MemoryKernel& k,
                                const MemoryKernel& n, const ContourSpec& spec) {
  const ModalSolver solver(k, n, w0.basis(), F.grid(), spec);
  return solver.solve_distributed(w0, F, F.grid().index_of(t));
}

SpectralField solve_boundary(const SpectralField& w0, const ControlSignal& f, const ControlGeometry& geometry,
                             double t, const MemoryKernel& k, const MemoryKernel& n, const ContourSpec& spec) {
  const ModalSolver solver(k, n, w0.basis(), f.grid(), spec);
  return solver.solve_boundary(w0, f, geometry.side(), f.grid().index_of(t));
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> samples) {
  out << "t,n,coeff\n";
  out.precision(17);
  for (const auto& s : samples) {
    for (std::size_t n = 1; n <= s.state.basis().modes(); ++n) out << s.t << ',' << n << ',' << s.state.coeff(n) << '\n';
  }
}

void write_snapshot_csv(std::ostream& out, std::span<const TrajectorySample> samples, std::size_t points) {
  out << "t,x,w\n";
  out.precision(17);
  for (const auto& s : samples) {
    const auto x = uniform_points(s.state.basis(), points);
    const auto w = synthesize(s.state, x);
    for (std::size_t i = 0; i < points; ++i) out << s.t << ',' << x[i] << ',' << w[i] << '\n';
  }
}

}  // namespace memheat
