#pragma once

// Scalar inverse transforms used by the solution theory:
//   e_n  = L^-1[ K^ / (lambda K^ + mu^2 J) ]
//   eps_n = L^-1[ 1 / (lambda K^ + mu^2 J) ]
//   Psi  = L^-1[ K^ / J ],   Phi = L^-1[ K^ / (lambda^2 J) ]

#include <cstddef>
#include <vector>

#include "memheat/admissibility.hpp"
#include "memheat/contour.hpp"
#include "memheat/kernel.hpp"

namespace memheat {

/// Runs verify_assumptions and returns default_contour(theta_max).
/// Throws AdmissibilityError for inadmissible pairs.
ContourSpec contour_for(const MemoryKernel& k, const MemoryKernel& n, double theta_a = kDefaultThetaA);

InversionResult mode_evolution_kernel(const MemoryKernel& k, const MemoryKernel& n, double mu2, double t,
                                      const ContourSpec& spec, const InversionOptions& opts = {});
InversionResult mode_forcing_kernel(const MemoryKernel& k, const MemoryKernel& n, double mu2, double t,
                                    const ContourSpec& spec, const InversionOptions& opts = {});
/// Continuous part for t > 0 (a delta contribution at t = 0 is not represented).
InversionResult psi(const MemoryKernel& k, const MemoryKernel& n, double t, const ContourSpec& spec,
                    const InversionOptions& opts = {});
InversionResult phi(const MemoryKernel& k, const MemoryKernel& n, double t, const ContourSpec& spec,
                    const InversionOptions& opts = {});

/// Vector integrands over many modes at once; component c corresponds to mu2[c].
/// `divide_power` multiplies every component by lambda^-p (p = 0, 1, 2).
VectorIntegrand evolution_integrand(const MemoryKernel& k, const MemoryKernel& n, std::vector<double> mu2,
                                    int divide_power = 0);
VectorIntegrand forcing_integrand(const MemoryKernel& k, const MemoryKernel& n, std::vector<double> mu2,
                                  int divide_power = 0);

struct ZSetScan {
  bool identically_zero = false;
  std::vector<double> zeros;
  std::vector<double> times;  // sample points (log-spaced)
  std::vector<double> values;
};

/// Sign-change bracketing of Psi on n_points log-spaced samples of [t_lo, t_hi],
/// each bracket refined by bisection to 1e-10. When |Psi| < zero_tol at every
/// sample the scan reports identically_zero instead.
ZSetScan z_set_scan(const MemoryKernel& k, const MemoryKernel& n, double t_lo, double t_hi, std::size_t n_points,
                    const ContourSpec& spec, double zero_tol = 1e-8);

}  // namespace memheat
