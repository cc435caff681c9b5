#pragma once

// Product integration on uniform grids and second-kind Volterra equations
// x + k * x = f with weakly singular kernels.
//
// A SampledKernel keeps its singular behaviour in closed form (power terms
// c t^(o-1)/Gamma(o) and exponentials) and stores only the regular remainder as
// grid samples; convolutions between closed-form parts stay closed-form.

#include <cstddef>
#include <span>
#include <vector>

#include "memheat/kernel.hpp"

namespace memheat {

/// t_k = k * step, k = 0..steps.
struct UniformGrid {
  double step = 0.0;
  std::size_t steps = 0;

  UniformGrid() = default;
  UniformGrid(double step, std::size_t steps);
  static UniformGrid over(double t_end, std::size_t steps) { return {t_end / static_cast<double>(steps), steps}; }

  double at(std::size_t k) const noexcept { return step * static_cast<double>(k); }
  double end() const noexcept { return at(steps); }
  std::size_t size() const noexcept { return steps + 1; }
  UniformGrid refined(std::size_t factor) const { return {step / static_cast<double>(factor), steps * factor}; }
  /// Index of the node equal to t (to relative 1e-9); throws DomainError otherwise.
  std::size_t index_of(double t) const;

  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;
};

/// coeff * t^(order-1) / Gamma(order)
struct PowerTerm {
  double coeff = 0.0;
  double order = 1.0;
};

class SampledKernel {
 public:
  SampledKernel() = default;
  explicit SampledKernel(UniformGrid grid);

  static SampledKernel from_kernel(const MemoryKernel& kernel, UniformGrid grid);
  static SampledKernel from_samples(UniformGrid grid, std::vector<double> samples);

  const UniformGrid& grid() const noexcept { return grid_; }
  const std::vector<PowerTerm>& power_terms() const noexcept { return power_; }
  const std::vector<ExpTerm>& exp_terms() const noexcept { return exp_; }
  const std::vector<double>& smooth() const noexcept { return smooth_; }

  void add_power(PowerTerm term);
  void add_exp(ExpTerm term);
  void add_smooth(std::span<const double> samples, double factor = 1.0);

  bool singular_at_origin() const noexcept;
  /// Smallest power order present, or +inf.
  double min_order() const noexcept;

  /// Value at node k. Throws DomainError at k = 0 when singular there.
  double value(std::size_t k) const;
  /// Values at all nodes; node 0 is +-inf when singular.
  std::vector<double> samples() const;

  /// Moments over [t_i, t_{i+1}]; see CellMoments.
  CellMoments cell_moments(std::size_t i) const;
  std::vector<CellMoments> all_cell_moments() const;

  SampledKernel& operator+=(const SampledKernel& other);
  SampledKernel& operator*=(double c);
  friend SampledKernel operator-(SampledKernel a) { return a *= -1.0; }

 private:
  UniformGrid grid_;
  std::vector<PowerTerm> power_;
  std::vector<ExpTerm> exp_;    // weights may be negative here
  std::vector<double> smooth_;  // size grid.size(), piecewise linear
};

/// (k * u)(t_j) for a piecewise-linear signal u, product trapezoidal rule with the
/// kernel's exact cell moments. Weight of the unknown at the current node is m0-m1 of cell 0.
std::vector<double> convolve(std::span<const CellMoments> moments, std::span<const double> signal);
std::vector<double> convolve(const SampledKernel& k, std::span<const double> signal);
std::vector<double> convolve(const MemoryKernel& k, UniformGrid grid, std::span<const double> signal);

SampledKernel convolve(const SampledKernel& a, const SampledKernel& b);

struct VolterraOptions {
  /// Neumann terms are peeled off until every remaining power term has order >= this.
  double smooth_order = 3.0;
  std::size_t max_neumann_terms = 64;
  /// Internal refinement of the grid; 0 disables Richardson extrapolation.
  std::size_t refinement = 2;
};

/// Solves x + k * x = f on k's grid. Closed-form inputs (power and exponential
/// parts only) are solved on refined grids with Richardson extrapolation.
SampledKernel solve_second_kind(const SampledKernel& k, const SampledKernel& f, const VolterraOptions& opts = {});

/// R with R + N * R = N. N must have no delta part.
SampledKernel resolvent_kernel(const MemoryKernel& n, UniformGrid grid, const VolterraOptions& opts = {});

/// Resolvent of an already sampled kernel (used for the inverse-pair identity).
SampledKernel resolvent_kernel(const SampledKernel& n, const VolterraOptions& opts = {});

/// max_k |R + N*R - N| over nodes k >= 1.
double resolvent_residual(const SampledKernel& r, const SampledKernel& n);

/// g = f + N * f on the grid (the boundary-data transformation).
std::vector<double> apply_memory(const MemoryKernel& n, UniformGrid grid, std::span<const double> f);
/// f = g - R * g, the inverse of apply_memory.
std::vector<double> remove_memory(const SampledKernel& r, std::span<const double> g);

}  // namespace memheat
