#pragma once

// Hankel-type path G_eps: two rays lambda = s e^{+-i alpha} joined by the arc
// |lambda| = eps, and vector-valued quadrature of (1/2 pi i) int e^{lambda t} F(lambda) dlambda.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace memheat {

using cplx = std::complex<double>;

enum class TimeScaling {
  Auto,    // substitute zeta = lambda t for t < 1
  Always,
  Never,
};

struct ContourSpec {
  double arc_radius = 1.0;
  double ray_angle = 2.0;     // alpha, radians in (pi/2, pi/2 + theta)
  double truncation = 1e8;    // R_max on |lambda|
  std::size_t ray_nodes = 32;  // per ray, rounded up to whole 8-point panels
  std::size_t arc_nodes = 16;
  TimeScaling t_scaling = TimeScaling::Auto;

  /// Throws DomainError unless pi/2 < alpha < pi/2 + theta, eps < R_max and node counts >= 8.
  void validate(double theta) const;
  /// Same with theta = pi/2.
  void validate() const;
  /// Node counts multiplied by 2^level.
  ContourSpec refined(unsigned level) const;
};

/// alpha = pi/2 + 0.6 theta.
ContourSpec default_contour(double theta);

struct ContourNode {
  cplx lambda;
  cplx weight;  // includes dlambda / (2 pi i)
};

/// Nodes in the order: lower ray (inward), arc, upper ray (outward), truncated at R_max.
std::vector<ContourNode> build_contour(const ContourSpec& spec);
/// The path used at time t: truncated where |e^{lambda t}| < 1e-16 and, when
/// scaling applies, built in zeta = lambda t and mapped back.
std::vector<ContourNode> build_contour(const ContourSpec& spec, double t);

bool uses_scaling(const ContourSpec& spec, double t) noexcept;

struct InversionResult {
  cplx value;
  double imag_residual = 0.0;
  std::size_t nodes_used = 0;
  double est_error = 0.0;

  double real() const noexcept { return value.real(); }
};

struct InversionOptions {
  /// Converged when |v_fine - v_coarse| <= rel_tol (|v_fine| + l1_floor * int |e^{lambda t} F| |dlambda|).
  double rel_tol = 1e-8;
  double l1_floor = 1e-6;
  std::size_t max_nodes = std::size_t{1} << 14;
};

/// Fills out[c] = F_c(lambda) for every component.
using VectorIntegrand = std::function<void(cplx lambda, std::span<cplx> out)>;

/// Inverse transforms of all components at time t > 0, doubling node counts until converged.
/// Throws QuadratureError when the node cap is reached first.
std::vector<InversionResult> invert(const VectorIntegrand& f, std::size_t dim, double t, const ContourSpec& spec,
                                    const InversionOptions& opts = {});
InversionResult invert(const std::function<cplx(cplx)>& f, double t, const ContourSpec& spec,
                       const InversionOptions& opts = {});

/// Real parts at many times on one fixed node layout (chosen by refining at the
/// extreme and middle times), so tabulated values vary smoothly in t.
struct InversionTable {
  std::vector<double> times;
  Eigen::MatrixXd values;  // times x components
  double est_error = 0.0;
  double max_imag_residual = 0.0;
  std::size_t nodes_used = 0;
};

InversionTable invert_table(const VectorIntegrand& f, std::size_t dim, std::span<const double> times,
                            const ContourSpec& spec, const InversionOptions& opts = {});

/// Rows "re,im,weight_re,weight_im".
void write_csv(std::ostream& out, std::span<const ContourNode> nodes);

}  // namespace memheat
