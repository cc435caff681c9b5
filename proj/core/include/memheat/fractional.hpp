#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "memheat/volterra.hpp"

namespace memheat {

/// (J^sigma u)(t_k), sigma in (0, 1), product integration of the piecewise-linear
/// signal against exact moments of t^(sigma-1)/Gamma(sigma).
std::vector<double> riemann_liouville(double sigma, std::span<const double> signal, UniformGrid grid);

/// E_{a,b}(z) = sum z^k / Gamma(a k + b) for |z| <= 80. Uses the compensated
/// series; on the negative axis with 0 < a < 1 and b <= 1 + a, when the series
/// loses too many digits to cancellation, switches to the real-axis integral
/// representation. Throws DomainError outside the envelope and NumericalError
/// when neither route is accurate.
double mittag_leffler(double a, double b, double z);

struct BlowupSamples {
  double gamma = 0.0;               // eps + 1/2
  std::vector<double> t;            // mesh nodes in [0, T)
  std::vector<double> value;        // (1/Gamma(gamma)) int_0^t (t-s)^-gamma F(s) ds
  std::vector<double> value_rl;     // the same with 1/Gamma(1-gamma), i.e. J^{1-gamma} F
  std::vector<double> lower_bound;  // (1/Gamma(gamma)) (log T - log(T - t))

  /// value >= lower_bound at every node.
  bool bound_holds() const;
  /// value at the node closest to t.
  double value_at(double t) const;
  std::size_t index_of(double t) const;
};

/// F(s) = (T - s)^(eps - 1/2) sampled on a uniform mesh of `steps` cells plus
/// `extra_nodes` geometric nodes toward T (and any requested times), and the
/// fractional integral evaluated at every mesh node.
BlowupSamples example_a2_blowup(double eps, double T, std::span<const double> times = {}, std::size_t steps = 512,
                                std::size_t extra_nodes = 64);

}  // namespace memheat
