#pragma once

// Mode-wise solutions assembled from the contour kernels: free evolution,
// distributed control and boundary control.

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "memheat/contour.hpp"
#include "memheat/kernel.hpp"
#include "memheat/spectral.hpp"
#include "memheat/volterra.hpp"

namespace memheat {

/// Time-sampled control: scalar (boundary) or per-mode coefficients (distributed).
class ControlSignal {
 public:
  static ControlSignal scalar(UniformGrid grid, std::vector<double> samples);
  /// samples: rows are grid nodes, columns are modes.
  static ControlSignal modal(UniformGrid grid, Eigen::MatrixXd samples);

  const UniformGrid& grid() const noexcept { return grid_; }
  bool is_scalar() const noexcept { return std::holds_alternative<std::vector<double>>(payload_); }
  const std::vector<double>& scalar_samples() const;
  const Eigen::MatrixXd& modal_samples() const;

  /// |payload| <= tol at t = 0 and t = T.
  bool vanishes_at_ends(double tol = 1e-12) const;

 private:
  ControlSignal(UniformGrid grid, std::variant<std::vector<double>, Eigen::MatrixXd> payload);
  UniformGrid grid_;
  std::variant<std::vector<double>, Eigen::MatrixXd> payload_;
};

struct TrajectorySample {
  double t = 0.0;
  SpectralField state;
};

struct SolverOptions {
  InversionOptions inversion;
  /// Relative tolerance of the h vs 2h convolution comparison; <= 0 disables the check.
  double convolution_tol = 1e-3;
};

/// Tabulates e_n and the antiderivatives of eps_n on a uniform grid once and
/// reuses them for every solve on that grid.
class ModalSolver {
 public:
  ModalSolver(MemoryKernel k, MemoryKernel n, EigenBasis basis, UniformGrid grid, ContourSpec spec,
              SolverOptions opts = {});

  const EigenBasis& basis() const noexcept { return basis_; }
  const UniformGrid& grid() const noexcept { return grid_; }
  const MemoryKernel& k() const noexcept { return k_; }
  const MemoryKernel& n() const noexcept { return n_; }
  const ContourSpec& spec() const noexcept { return spec_; }

  /// e_n(t_k); rows are nodes, columns modes. Row 0 is exactly 1.
  const Eigen::MatrixXd& evolution_table() const noexcept { return e_; }
  /// int_0^t eps_n and int_0^t int_0^s eps_n at the nodes.
  const Eigen::MatrixXd& forcing_first_integral() const noexcept { return e1_; }
  const Eigen::MatrixXd& forcing_second_integral() const noexcept { return e2_; }
  /// Quadrature diagnostics of the tables.
  double table_error() const noexcept { return table_error_; }
  double table_imag_residual() const noexcept { return table_imag_; }

  /// Exact cell moments of eps_n (1-based mode) on the grid, or on every
  /// `stride`-th node for the coarse comparison.
  std::vector<CellMoments> forcing_moments(std::size_t mode, std::size_t stride = 1) const;

  /// (eps_n * u)(t_k) for every node.
  std::vector<double> forcing_convolution(std::size_t mode, std::span<const double> u) const;
  /// (eps_n * u)(t_k) at one node.
  double forcing_convolution_at(std::size_t mode, std::span<const double> u, std::size_t k) const;

  /// g = f + N * f on the grid.
  std::vector<double> memory_transform(std::span<const double> f) const;

  SpectralField evolve_free(const SpectralField& w0, std::size_t k) const;
  SpectralField solve_distributed(const SpectralField& w0, const ControlSignal& F, std::size_t k) const;
  SpectralField solve_boundary(const SpectralField& w0, const ControlSignal& f, BoundarySide side,
                               std::size_t k) const;

  /// States at every `stride`-th node (and the last one).
  std::vector<TrajectorySample> trajectory_free(const SpectralField& w0, std::size_t stride = 1) const;
  std::vector<TrajectorySample> trajectory_distributed(const SpectralField& w0, const ControlSignal& F,
                                                       std::size_t stride = 1) const;
  std::vector<TrajectorySample> trajectory_boundary(const SpectralField& w0, const ControlSignal& f,
                                                    BoundarySide side, std::size_t stride = 1) const;

 private:
  void check_field(const SpectralField& w0) const;
  void check_signal(const ControlSignal& s, bool scalar) const;
  void check_resolution(std::size_t mode, std::span<const double> u, std::size_t k, double fine) const;
  std::vector<std::size_t> sample_nodes(std::size_t stride) const;

  MemoryKernel k_;
  MemoryKernel n_;
  EigenBasis basis_;
  UniformGrid grid_;
  ContourSpec spec_;
  SolverOptions opts_;
  Eigen::MatrixXd e_;
  Eigen::MatrixXd e1_;
  Eigen::MatrixXd e2_;
  double table_error_ = 0.0;
  double table_imag_ = 0.0;
};

/// e_n(t) w0_n by direct contour quadrature; t = 0 returns w0.
SpectralField evolve_free(const SpectralField& w0, double t, const MemoryKernel& k, const MemoryKernel& n,
                          const ContourSpec& spec, const InversionOptions& opts = {});

/// t must be a node of the signal grid.
SpectralField solve_distributed(const SpectralField& w0, const ControlSignal& F, double t, const MemoryKernel& k,
                                const MemoryKernel& n, const ContourSpec& spec);
SpectralField solve_boundary(const SpectralField& w0, const ControlSignal& f, const ControlGeometry& geometry,
                             double t, const MemoryKernel& k, const MemoryKernel& n, const ContourSpec& spec);

/// Rows "t,n,coeff".
void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> samples);
/// Rows "t,x,w" on `points` uniform x nodes.
void write_snapshot_csv(std::ostream& out, std::span<const TrajectorySample> samples, std::size_t points);

}  // namespace memheat
