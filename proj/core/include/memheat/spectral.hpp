#pragma once

// Dirichlet eigenstructure of the Laplacian on (0, L) and the modal form of
// the control operators.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

namespace memheat {

/// mu_n = n pi / L, phi_n(x) = sqrt(2/L) sin(n pi x / L), n = 1..modes.
class EigenBasis {
 public:
  explicit EigenBasis(double length = std::numbers::pi, std::size_t modes = 64);

  double length() const noexcept { return length_; }
  std::size_t modes() const noexcept { return modes_; }

  double mu(std::size_t n) const noexcept { return static_cast<double>(n) * std::numbers::pi / length_; }
  double mu2(std::size_t n) const noexcept { return mu(n) * mu(n); }
  double phi(std::size_t n, double x) const noexcept;

  /// mu_n^2 for n = 1..modes.
  Eigen::VectorXd eigenvalues() const;

  EigenBasis with_modes(std::size_t modes) const { return EigenBasis(length_, modes); }

  friend bool operator==(const EigenBasis&, const EigenBasis&) = default;

 private:
  double length_;
  std::size_t modes_;
};

/// Truncated coefficients; coeffs()[n-1] multiplies phi_n.
class SpectralField {
 public:
  explicit SpectralField(EigenBasis basis);
  SpectralField(EigenBasis basis, Eigen::VectorXd coeffs);

  static SpectralField unit(EigenBasis basis, std::size_t n);
  /// w_n = f(n) for n = 1..modes.
  static SpectralField from_sequence(EigenBasis basis, const std::function<double(std::size_t)>& f);

  const EigenBasis& basis() const noexcept { return basis_; }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  Eigen::VectorXd& coeffs() noexcept { return coeffs_; }
  /// 1-based.
  double coeff(std::size_t n) const { return coeffs_(static_cast<Eigen::Index>(n - 1)); }

  double l2_norm() const { return coeffs_.norm(); }

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double c);
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double c, SpectralField a) { return a *= c; }

 private:
  EigenBasis basis_;
  Eigen::VectorXd coeffs_;
};

enum class BoundarySide { Left, Right };

struct DistributedRegion {
  double a = 0.0;
  double b = 0.0;
};

struct BoundaryRegion {
  BoundarySide side = BoundarySide::Left;
};

class ControlGeometry {
 public:
  static ControlGeometry distributed(double a, double b);
  static ControlGeometry boundary(BoundarySide side);

  bool is_distributed() const noexcept { return std::holds_alternative<DistributedRegion>(region_); }
  bool is_boundary() const noexcept { return !is_distributed(); }
  const DistributedRegion& region() const;
  BoundarySide side() const;

  /// Checks 0 <= a < b <= L for distributed geometries.
  void validate(const EigenBasis& basis) const;
  /// Omega minus the closure of Omega_a is nonempty (always true for boundary control).
  bool leaves_complement(const EigenBasis& basis) const;

 private:
  explicit ControlGeometry(std::variant<DistributedRegion, BoundaryRegion> r) : region_(r) {}
  std::variant<DistributedRegion, BoundaryRegion> region_;
};

/// Projects samples on a uniform grid covering [0, L] (first node 0, last node L).
/// The grid needs at least 8 points per shortest wavelength 2L/modes.
SpectralField project(std::span<const double> samples, std::span<const double> x, const EigenBasis& basis);
SpectralField project(const std::function<double(double)>& w, const EigenBasis& basis, std::size_t points = 0);

std::vector<double> synthesize(const SpectralField& field, std::span<const double> x);
double synthesize(const SpectralField& field, double x);

/// Uniform grid of `points` nodes on [0, L].
std::vector<double> uniform_points(const EigenBasis& basis, std::size_t points);

/// (sum mu_n^(4 sigma) w_n^2)^(1/2)
double frac_power_norm(const SpectralField& field, double sigma);

struct MembershipTest {
  double half_sum = 0.0;  // partial sum with modes/2 terms
  double full_sum = 0.0;
  double growth = 0.0;    // full/half - 1
  bool member = false;    // growth < 1%
};

/// Dom(-A)^sigma membership surrogate: the squared partial sum grows by less
/// than 1% from modes/2 to modes.
MembershipTest dom_membership(const SpectralField& field, double sigma);

/// Coefficients of the harmonic lift of unit data on one side.
Eigen::VectorXd green_lift_coeffs(const EigenBasis& basis, BoundarySide side);

/// Extension by zero of a profile on Omega_a, projected.
SpectralField distributed_injection(const std::function<double(double)>& profile, const ControlGeometry& geometry,
                                    const EigenBasis& basis);

/// Rows "n,coeff".
void write_csv(std::ostream& out, const SpectralField& field);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(std::size_t order);

/// Composite Gauss-Legendre over [a, b] with `panels` panels.
double integrate(const std::function<double(double)>& f, double a, double b, std::size_t panels, std::size_t order = 8);

}  // namespace memheat
