#pragma once

// Memory kernels K and N: a Dirac weight plus one weakly singular or smooth
// integrable part, evaluable in time and in the Laplace domain.

#include <complex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace memheat {

using cplx = std::complex<double>;

/// Which normalization a power law uses.
///   K: scale * t^(-p) / Gamma(1-p)   (transform scale * lambda^(p-1))
///   N: scale * t^(p-1) / Gamma(p)    (transform scale * lambda^(-p))
enum class PowerRole { K, N };

struct PowerLaw {
  double exponent = 0.5;
  double scale = 1.0;
  PowerRole role = PowerRole::K;

  /// Both roles are scale * t^(order-1) / Gamma(order) with this order.
  double order() const noexcept { return role == PowerRole::K ? 1.0 - exponent : exponent; }

  friend bool operator==(const PowerLaw&, const PowerLaw&) = default;
};

struct ExpTerm {
  double weight = 0.0;  // a_j >= 0
  double rate = 1.0;    // b_j > 0

  friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

struct ExpSum {
  std::vector<ExpTerm> terms;

  friend bool operator==(const ExpSum&, const ExpSum&) = default;
};

struct ZeroPart {
  friend bool operator==(const ZeroPart&, const ZeroPart&) = default;
};

using SingularPart = std::variant<ZeroPart, PowerLaw, ExpSum>;

/// Integral of the singular part over a cell [u0, u1] and its first moment
/// about u0, normalized by the cell width:
///   m0 = int k(u) du,   m1 = int k(u) (u - u0) / (u1 - u0) du.
struct CellMoments {
  double m0 = 0.0;
  double m1 = 0.0;
};

/// K(t) = k0 * delta(t) + K0(t). Immutable once constructed.
class MemoryKernel {
 public:
  MemoryKernel() = default;
  MemoryKernel(double delta_weight, SingularPart part);

  static MemoryKernel zero() { return {}; }
  static MemoryKernel delta(double k0 = 1.0) { return {k0, ZeroPart{}}; }
  static MemoryKernel power_law(double exponent, PowerRole role, double scale = 1.0);
  static MemoryKernel exp_sum(std::vector<ExpTerm> terms);

  double delta_weight() const noexcept { return delta_weight_; }
  const SingularPart& singular_part() const noexcept { return part_; }

  bool is_zero() const noexcept;
  bool has_singular_part() const noexcept { return !std::holds_alternative<ZeroPart>(part_); }
  /// True when the time-domain part is unbounded at t = 0.
  bool singular_at_origin() const noexcept;

  /// Value of the regular part K0(t), t > 0.
  double operator()(double t) const;

  /// k0 + (Laplace transform of K0)(lambda), principal branch.
  cplx laplace(cplx lambda) const;

  CellMoments cell_moments(double u0, double u1) const;

  /// c * K (both the delta weight and the regular part).
  MemoryKernel scaled(double c) const;
  /// c * (delta + *this); the reducible partner of an N kernel.
  static MemoryKernel reducible_partner(double c, const MemoryKernel& n);

  /// Grammar form, e.g. "delta(1) + powerlaw(kind=K, exp=0.5)".
  std::string to_string() const;

  friend bool operator==(const MemoryKernel&, const MemoryKernel&) = default;

 private:
  double delta_weight_ = 0.0;
  SingularPart part_ = ZeroPart{};
};

/// Parses the kernel grammar:
///   zero
///   delta(k0)
///   powerlaw(kind=K|N, exp=alpha[, scale=c])
///   expsum([(a1,b1),(a2,b2),...])
/// joined by '+' with at most one delta term and one regular term.
MemoryKernel parse_kernel(std::string_view text);

/// Throws DomainError for lambda = 0 or lambda on the closed negative axis.
cplx laplace_transform(const MemoryKernel& kernel, cplx lambda);

/// J(lambda) = 1 + N^(lambda).
cplx j_factor(const MemoryKernel& n, cplx lambda);

/// lambda K^(lambda) / J(lambda); throws JVanishingError when |J| underflows.
cplx symbol_ratio(const MemoryKernel& k, const MemoryKernel& n, cplx lambda);

}  // namespace memheat
