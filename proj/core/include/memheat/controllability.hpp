#pragma once

// Least-squares reachability experiments and the null-controllability obstruction.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "memheat/contour.hpp"
#include "memheat/evolution.hpp"
#include "memheat/kernel.hpp"
#include "memheat/spectral.hpp"

namespace memheat {

enum class ControlKind { Distributed, Boundary };

/// Time atoms t^3 (T-t)^3 P_j(2t/T - 1) (scaled to O(1)), space atoms the same
/// bump shape on Omega_a. Columns are ordered time-major, so raising time_atoms
/// only appends columns (nested bases).
struct ControlBasis {
  ControlKind kind = ControlKind::Distributed;
  std::size_t time_atoms = 8;
  std::size_t space_atoms = 4;  // distributed only

  std::size_t size() const noexcept { return kind == ControlKind::Boundary ? time_atoms : time_atoms * space_atoms; }

  static double time_atom(std::size_t j, double t, double T);
  static double space_atom(std::size_t i, double x, double a, double b);
};

/// Columns: w(T) coefficients produced by each atom from w0 = 0.
Eigen::MatrixXd forward_map(const ModalSolver& solver, const ControlBasis& basis, const ControlGeometry& geometry);

struct SynthesisResult {
  Eigen::VectorXd coefficients;
  double residual = 0.0;      // ||M c - target||
  double control_norm = 0.0;  // L2 norm of the realized control over (0,T) (x Omega_a)
  double gram_condition = 0.0;
  double rho = 0.0;
  bool used_eigen_fallback = false;
};

/// min ||M c - target||^2 + rho ||c||^2 by normal equations (LDLT, symmetric
/// eigen fallback). rho defaults to 1e-10 ||M||^2. An explicit rho = 0 with
/// Gram condition above 1e12 throws DomainError.
SynthesisResult least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& target, std::optional<double> rho = {});

/// Control whose state at T (from w0 = 0) approximates `target`. The solver's grid end is T.
SynthesisResult synthesize_control(const SpectralField& target, const ModalSolver& solver, const ControlBasis& basis,
                                   const ControlGeometry& geometry, std::optional<double> rho = {});
/// Builds its own solver on a 512-steps-per-unit grid.
SynthesisResult synthesize_control(const SpectralField& target, double T, const ControlBasis& basis,
                                   const ControlGeometry& geometry, const MemoryKernel& k, const MemoryKernel& n,
                                   const ContourSpec& spec, std::optional<double> rho = {});

/// Control samples on the solver grid for coefficients c.
ControlSignal realize_control(const Eigen::VectorXd& c, const ModalSolver& solver, const ControlBasis& basis,
                              const ControlGeometry& geometry);

struct ObstructionReport {
  bool obstructed = false;  // false means Psi(T) = 0: no obstruction at this T
  double psi_T = 0.0;
  std::vector<double> mu2;
  std::vector<double> ratio;  // mu^2 e_n(T) / Psi(T)
};

/// |Psi(T)| below psi_tol is reported as no obstruction.
ObstructionReport obstruction_ratio(const MemoryKernel& k, const MemoryKernel& n, double T,
                                    std::span<const double> mu2_values, const ContourSpec& spec,
                                    double psi_tol = 1e-8);

struct NullControlReport {
  bool applicable = false;           // w0 outside Dom A
  MembershipTest initial_dom_a;      // w0 in Dom A?
  MembershipTest free_dom_a2;        // E(T) w0 in Dom A^2?
  double psi_T = 0.0;
  double tail_ratio = 0.0;           // n mu_n^2 (E(T) w0)_n / (w0_n n Psi(T)) at the top mode
  std::vector<std::size_t> basis_sizes;
  std::vector<double> residuals;     // ||w(T; w0, F_m)|| for each basis size
  std::vector<double> relative_residuals;  // residual / ||E(T) w0||
  bool residual_floor = false;       // last residual above half the first
  bool obstructed = false;           // floor and tail diagnostics agree
};

/// Best-effort null controls for w0 with growing time-atom counts.
NullControlReport null_control_certificate(const SpectralField& w0, const ModalSolver& solver,
                                           const ControlGeometry& geometry, std::span<const std::size_t> time_atoms,
                                           std::size_t space_atoms = 4);

/// Fan of lambda samples inside Sigma_{theta + pi/2}.
std::vector<cplx> sector_samples(double theta, std::size_t count = 32);

/// c when K^/J is constant (max deviation below 1e-10 relative) and positive.
std::optional<double> reducibility_test(const MemoryKernel& k, const MemoryKernel& n, std::span<const cplx> samples);

}  // namespace memheat
