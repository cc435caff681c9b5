#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "memheat/kernel.hpp"

namespace memheat {

/// Sampling layout for the sector checks.
struct SectorGrid {
  double min_modulus = 1e-6;
  double max_modulus = 1e6;
  int moduli_per_ray = 40;
  /// Rays per sector, evenly spread over [-(theta+pi/2), theta+pi/2] (boundary rays included)
  /// for the asymptotic checks; the sector-map walk uses 4x as many angles.
  int fan_rays = 9;
  double theta_tolerance = 1e-3;
  /// Largest candidate theta; theta must stay below pi/2.
  double theta_cap = std::numbers::pi / 2 - 1e-3;
};

enum class AssumptionItem {
  JNonvanishing,   // J(lambda) != 0 on the sector
  SectorMapping,   // lambda K^/J maps the sector into Sigma_{theta_A + pi/2}
  KLimit,          // K^(lambda) -> k0 at infinity
  KGrowth,         // |lambda K^| > M |lambda|^gamma0 at infinity
  KVanishAtZero,   // lambda K^ -> 0 at the origin
  NDecay,          // N^(lambda) -> 0 at infinity
};

std::string to_string(AssumptionItem item);

struct SampleFailure {
  std::complex<double> lambda;
  AssumptionItem item;
};

struct AsymptoticFlags {
  bool k_limit = false;
  bool k_growth = false;
  bool k_vanish_at_zero = false;
  bool n_decay = false;

  bool all() const noexcept { return k_limit && k_growth && k_vanish_at_zero && n_decay; }
};

struct AdmissibilityReport {
  double theta_max = 0.0;  // radians, in [0, pi/2)
  bool admissible = false;
  bool j_nonvanishing = false;
  AsymptoticFlags asymptotics;
  /// Log-slope of |lambda K^| over the top decade of sampled moduli (estimate of gamma0).
  double growth_exponent = 0.0;
  int samples_used = 0;
  std::vector<SampleFailure> failures;
};

/// Largest theta (up to `grid.theta_cap`, resolved to `grid.theta_tolerance`) for
/// which every sampled lambda in Sigma_{theta+pi/2} passes the J and sector-map
/// checks, followed by the asymptotic checks on that sector. Never throws on
/// inadmissible kernels; failures are recorded in the report.
AdmissibilityReport verify_assumptions(const MemoryKernel& k, const MemoryKernel& n, double theta_a,
                                       const SectorGrid& grid = {});

/// Closed-form sector bound for K = t^-alpha/Gamma(1-alpha), N = t^(gamma-1)/Gamma(gamma):
/// theta0 = (2 - (alpha+gamma)) / (alpha+gamma), capped at 1, returned as theta0 * pi/2.
std::optional<double> max_sector_angle_case3(double alpha, double gamma);

/// Default theta_A for the Dirichlet Laplacian.
inline constexpr double kDefaultThetaA = std::numbers::pi / 2 - 1e-3;

}  // namespace memheat
