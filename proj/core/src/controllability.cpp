#include "memheat/controllability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "memheat/error.hpp"
#include "memheat/parallel.hpp"
#include "memheat/transforms.hpp"

namespace memheat {

namespace {

constexpr double kMaxCondition = 1e12;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double legendre(std::size_t j, double x) {
  double p0 = 1.0;
  if (j == 0) return p0;
  double p1 = x;
  for (std::size_t k = 2; k <= j; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double bump(std::size_t j, double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double b = s * (1.0 - s);
  return 64.0 * b * b * b * legendre(j, 2.0 * s - 1.0);
}

std::vector<double> atom_samples(std::size_t j, const UniformGrid& grid) {
  std::vector<double> u(grid.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = ControlBasis::time_atom(j, grid.at(k), grid.end());
  return u;
}

std::vector<SpectralField> space_injections(const ControlBasis& basis, const ControlGeometry& geometry,
                                            const EigenBasis& eb) {
  const auto& r = geometry.region();
  std::vector<SpectralField> out;
  for (std::size_t i = 0; i < basis.space_atoms; ++i) {
    out.push_back(distributed_injection([&](double x) { return ControlBasis::space_atom(i, x, r.a, r.b); }, geometry, eb));
  }
  return out;
}

void check_kind(const ControlBasis& basis, const ControlGeometry& geometry) {
  const bool distributed = basis.kind == ControlKind::Distributed;
  if (distributed != geometry.is_distributed()) throw DomainError("control basis kind does not match the geometry");
  if (basis.time_atoms == 0 || (distributed && basis.space_atoms == 0)) throw DomainError("control basis is empty");
}

// L2 Gram matrix of `count` bumps on an interval of length `len`.
Eigen::MatrixXd bump_gram(std::size_t count, double len) {
  Eigen::MatrixXd g(idx(count), idx(count));
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = a; b < count; ++b) {
      const double v = len * integrate([&](double s) { return bump(a, s) * bump(b, s); }, 0.0, 1.0, 16);
      g(idx(a), idx(b)) = g(idx(b), idx(a)) = v;
    }
  }
  return g;
}

double control_norm(const Eigen::VectorXd& c, const ControlBasis& basis, const ControlGeometry& geometry, double T) {
  const Eigen::MatrixXd gt = bump_gram(basis.time_atoms, T);
  if (basis.kind == ControlKind::Boundary) return std::sqrt(std::max(0.0, c.dot(gt * c)));
  const auto& r = geometry.region();
  const Eigen::MatrixXd gs = bump_gram(basis.space_atoms, r.b - r.a);
  const std::size_t p = basis.space_atoms;
  double s = 0.0;
  for (std::size_t j = 0; j < basis.time_atoms; ++j) {
    for (std::size_t k = 0; k < basis.time_atoms; ++k) {
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t l = 0; l < p; ++l) {
          s += c(idx(j * p + i)) * c(idx(k * p + l)) * gt(idx(j), idx(k)) * gs(idx(i), idx(l));
        }
      }
    }
  }
  return std::sqrt(std::max(0.0, s));
}

}  // namespace

double ControlBasis::time_atom(std::size_t j, double t, double T) {
  if (!(T > 0.0)) throw DomainError("control horizon must be positive");
  return bump(j, t / T);
}

double ControlBasis::space_atom(std::size_t i, double x, double a, double b) {
  if (!(b > a)) throw DomainError("space atom needs a < b");
  return bump(i, (x - a) / (b - a));
}

Eigen::MatrixXd forward_map(const ModalSolver& solver, const ControlBasis& basis, const ControlGeometry& geometry) {
  check_kind(basis, geometry);
  const EigenBasis& eb = solver.basis();
  const UniformGrid& grid = solver.grid();
  const std::size_t modes = eb.modes();
  const std::size_t m = basis.time_atoms;
  const bool boundary = basis.kind == ControlKind::Boundary;

  // C(n, j) = (eps_n * atom_j)(T), with the memory transform applied for boundary data.
  Eigen::MatrixXd C(idx(modes), idx(m));
  std::vector<std::vector<double>> signals(m);
  for (std::size_t j = 0; j < m; ++j) {
    signals[j] = atom_samples(j, grid);
    if (boundary) signals[j] = solver.memory_transform(signals[j]);
  }
  parallel_for(modes, [&](std::size_t c) {
    const auto mom = solver.forcing_moments(c + 1);
    const std::size_t K = grid.steps;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& u = signals[j];
      double acc = 0.0;
      for (std::size_t i = 0; i < K; ++i) acc += (mom[i].m0 - mom[i].m1) * u[K - i] + mom[i].m1 * u[K - i - 1];
      C(idx(c), idx(j)) = acc;
    }
  });

  if (boundary) {
    const Eigen::VectorXd lift = green_lift_coeffs(eb, geometry.side());
    Eigen::MatrixXd M(idx(modes), idx(m));
    for (std::size_t c = 0; c < modes; ++c) M.row(idx(c)) = eb.mu2(c + 1) * lift(idx(c)) * C.row(idx(c));
    return M;
  }
  geometry.validate(eb);
  const auto inj = space_injections(basis, geometry, eb);
  const std::size_t p = basis.space_atoms;
  Eigen::MatrixXd M(idx(modes), idx(m * p));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < p; ++i) M.col(idx(j * p + i)) = inj[i].coeffs().cwiseProduct(C.col(idx(j)));
  }
  return M;
}

SynthesisResult least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& target, std::optional<double> rho) {
  if (M.rows() != target.size()) throw DomainError("target size does not match the forward map");
  SynthesisResult out;
  const Eigen::MatrixXd G = M.transpose() * M;
  const Eigen::VectorXd rhs = M.transpose() * target;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  out.gram_condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (rho.has_value()) {
    if (!(*rho >= 0.0)) throw DomainError("regularization must be nonnegative");
    if (*rho == 0.0 && !(out.gram_condition <= kMaxCondition)) {
      throw DomainError("Gram matrix condition exceeds 1e12; a positive regularization is required");
    }
    out.rho = *rho;
  } else {
    out.rho = 1e-10 * lmax;
  }

  Eigen::MatrixXd A = G;
  A.diagonal().array() += out.rho;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (ok) {
    out.coefficients = ldlt.solve(rhs);
    ok = out.coefficients.allFinite() && (A * out.coefficients - rhs).norm() <= 1e-8 * (rhs.norm() + 1e-300) + 1e-300;
  }
  if (!ok) {
    out.used_eigen_fallback = true;
    const Eigen::VectorXd ev = eig.eigenvalues().array() + out.rho;
    const double cut = 1e-14 * ev.maxCoeff();
    Eigen::VectorXd proj = eig.eigenvectors().transpose() * rhs;
    for (Eigen::Index i = 0; i < proj.size(); ++i) proj(i) = ev(i) > cut ? proj(i) / ev(i) : 0.0;
    out.coefficients = eig.eigenvectors() * proj;
  }
  out.residual = (M * out.coefficients - target).norm();
  return out;
}

SynthesisResult synthesize_control(const SpectralField& target, const ModalSolver& solver, const ControlBasis& basis,
                                   const ControlGeometry& geometry, std::optional<double> rho) {
  if (!(target.basis() == solver.basis())) throw DomainError("target lives on a different basis");
  const Eigen::MatrixXd M = forward_map(solver, basis, geometry);
  SynthesisResult r = least_squares(M, target.coeffs(), rho);
  r.control_norm = control_norm(r.coefficients, basis, geometry, solver.grid().end());
  return r;
}

SynthesisResult synthesize_control(const SpectralField& target, double T, const ControlBasis& basis,
                                   const ControlGeometry& geometry, const MemoryKernel& k, const MemoryKernel& n,
                                   const ContourSpec& spec, std::optional<double> rho) {
  if (!(T > 0.0)) throw DomainError("control horizon must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(512.0 * T));
  const ModalSolver solver(k, n, target.basis(), UniformGrid::over(T, std::max<std::size_t>(steps, 16)), spec);
  return synthesize_control(target, solver, basis, geometry, rho);
}

ControlSignal realize_control(const Eigen::VectorXd& c, const ModalSolver& solver, const ControlBasis& basis,
                              const ControlGeometry& geometry) {
  check_kind(basis, geometry);
  if (static_cast<std::size_t>(c.size()) != basis.size()) throw DomainError("coefficient count does not match the basis");
  const UniformGrid& grid = solver.grid();
  if (basis.kind == ControlKind::Boundary) {
    std::vector<double> f(grid.size(), 0.0);
    for (std::size_t j = 0; j < basis.time_atoms; ++j) {
      const auto u = atom_samples(j, grid);
      for (std::size_t k = 0; k < f.size(); ++k) f[k] += c(idx(j)) * u[k];
    }
    return ControlSignal::scalar(grid, std::move(f));
  }
  const auto inj = space_injections(basis, geometry, solver.basis());
  const std::size_t p = basis.space_atoms;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(idx(grid.size()), idx(solver.basis().modes()));
  for (std::size_t j = 0; j < basis.time_atoms; ++j) {
    const auto u = atom_samples(j, grid);
    Eigen::VectorXd profile = Eigen::VectorXd::Zero(idx(solver.basis().modes()));
    for (std::size_t i = 0; i < p; ++i) profile += c(idx(j * p + i)) * inj[i].coeffs();
    for (std::size_t k = 0; k < grid.size(); ++k) F.row(idx(k)) += u[k] * profile.transpose();
  }
  return ControlSignal::modal(grid, std::move(F));
}

ObstructionReport obstruction_ratio(const MemoryKernel& k, const MemoryKernel& n, double T,
                                    std::span<const double> mu2_values, const ContourSpec& spec, double psi_tol) {
  if (!(T > 0.0)) throw DomainError("T must be positive");
  ObstructionReport report;
  report.psi_T = psi(k, n, T, spec).real();
  report.obstructed = std::abs(report.psi_T) >= psi_tol;
  if (!report.obstructed) return report;
  report.mu2.assign(mu2_values.begin(), mu2_values.end());
  const auto e = invert(evolution_integrand(k, n, report.mu2), report.mu2.size(), T, spec);
  for (std::size_t i = 0; i < report.mu2.size(); ++i) report.ratio.push_back(report.mu2[i] * e[i].real() / report.psi_T);
  return report;
}

NullControlReport null_control_certificate(const SpectralField& w0, const ModalSolver& solver,
                                           const ControlGeometry& geometry, std::span<const std::size_t> time_atoms,
                                           std::size_t space_atoms) {
  if (time_atoms.empty()) throw DomainError("need at least one basis size");
  if (geometry.is_distributed() && !geometry.leaves_complement(solver.basis())) {
    throw DomainError("the obstruction test needs Omega minus the control region to be nonempty");
  }
  NullControlReport report;
  report.initial_dom_a = dom_membership(w0, 1.0);
  report.applicable = !report.initial_dom_a.member;
  const std::size_t K = solver.grid().steps;
  const SpectralField free = solver.evolve_free(w0, K);
  report.free_dom_a2 = dom_membership(free, 2.0);
  report.psi_T = psi(solver.k(), solver.n(), solver.grid().end(), solver.spec()).real();

  const std::size_t top = solver.basis().modes();
  if (std::abs(report.psi_T) > 1e-8 && w0.coeff(top) != 0.0) {
    report.tail_ratio = solver.basis().mu2(top) * free.coeff(top) / (w0.coeff(top) * report.psi_T);
  }
  if (!report.applicable) return report;

  ControlBasis basis;
  basis.kind = geometry.is_distributed() ? ControlKind::Distributed : ControlKind::Boundary;
  basis.space_atoms = space_atoms;
  basis.time_atoms = *std::max_element(time_atoms.begin(), time_atoms.end());
  const Eigen::MatrixXd M = forward_map(solver, basis, geometry);
  const Eigen::VectorXd target = -free.coeffs();
  const double scale = free.l2_norm();
  const std::size_t per_time = basis.kind == ControlKind::Boundary ? 1 : space_atoms;
  for (std::size_t m : time_atoms) {
    const SynthesisResult r = least_squares(M.leftCols(idx(m * per_time)), target);
    report.basis_sizes.push_back(m);
    report.residuals.push_back(r.residual);
    report.relative_residuals.push_back(scale > 0.0 ? r.residual / scale : 0.0);
  }
  report.residual_floor = report.residuals.back() > 0.5 * report.residuals.front();
  report.obstructed = report.residual_floor && !report.free_dom_a2.member;
  return report;
}

std::vector<cplx> sector_samples(double theta, std::size_t count) {
  if (count < 16) throw DomainError("need at least 16 sector samples");
  if (!(theta >= 0.0 && theta < std::numbers::pi / 2)) throw DomainError("theta must lie in [0, pi/2)");
  const double half = 0.95 * (theta + std::numbers::pi / 2);
  const std::size_t rays = 8;
  const std::size_t radii = (count + rays - 1) / rays;
  std::vector<cplx> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double arg = -half + 2.0 * half * static_cast<double>(i % rays) / static_cast<double>(rays - 1);
    const double lr = -2.0 + 4.0 * static_cast<double>(i / rays) / static_cast<double>(std::max<std::size_t>(radii - 1, 1));
    out.push_back(std::polar(std::pow(10.0, lr), arg));
  }
  return out;
}

std::optional<double> reducibility_test(const MemoryKernel& k, const MemoryKernel& n, std::span<const cplx> samples) {
  if (samples.size() < 16) throw DomainError("reducibility test needs at least 16 samples");
  std::vector<cplx> r;
  r.reserve(samples.size());
  cplx mean(0.0);
  for (cplx lambda : samples) {
    r.push_back(laplace_transform(k, lambda) / j_factor(n, lambda));
    mean += r.back();
  }
  mean /= static_cast<double>(r.size());
  double dev = 0.0;
  for (cplx v : r) dev = std::max(dev, std::abs(v - mean));
  if (!(dev < 1e-10 * std::max(1.0, std::abs(mean)))) return std::nullopt;
  if (!(mean.real() > 0.0) || std::abs(mean.imag()) > 1e-10 * std::max(1.0, std::abs(mean))) return std::nullopt;
  return mean.real();
}

}  // namespace memheat
