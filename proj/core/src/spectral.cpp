#include "memheat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>

#include "memheat/error.hpp"

namespace memheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kPointsPerWavelength = 8;

GaussRule make_rule(std::size_t order) {
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t i = 0; i < order; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(order) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[order - 1 - i] = x;
    rule.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t order) {
  if (order < 2) throw DomainError("Gauss-Legendre order must be at least 2");
  static std::mutex mutex;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_rule(order)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, std::size_t panels, std::size_t order) {
  if (panels == 0) throw DomainError("need at least one panel");
  const GaussRule& rule = gauss_legendre(order);
  const double w = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * w;
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + 0.5 * w * rule.nodes[i]);
    sum += 0.5 * w * s;
  }
  return sum;
}

EigenBasis::EigenBasis(double length, std::size_t modes) : length_(length), modes_(modes) {
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("domain length must be positive");
  if (modes == 0) throw DomainError("mode count must be positive");
}

double EigenBasis::phi(std::size_t n, double x) const noexcept {
  return std::sqrt(2.0 / length_) * std::sin(mu(n) * x);
}

Eigen::VectorXd EigenBasis::eigenvalues() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(modes_));
  for (std::size_t n = 1; n <= modes_; ++n) out(static_cast<Eigen::Index>(n - 1)) = mu2(n);
  return out;
}

SpectralField::SpectralField(EigenBasis basis)
    : basis_(basis), coeffs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.modes()))) {}

SpectralField::SpectralField(EigenBasis basis, Eigen::VectorXd coeffs) : basis_(basis), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != basis_.modes()) throw DomainError("coefficient count does not match basis");
}

SpectralField SpectralField::unit(EigenBasis basis, std::size_t n) {
  if (n == 0 || n > basis.modes()) throw DomainError("mode index out of range");
  SpectralField f(basis);
  f.coeffs_(static_cast<Eigen::Index>(n - 1)) = 1.0;
  return f;
}

SpectralField SpectralField::from_sequence(EigenBasis basis, const std::function<double(std::size_t)>& f) {
  SpectralField out(basis);
  for (std::size_t n = 1; n <= basis.modes(); ++n) out.coeffs_(static_cast<Eigen::Index>(n - 1)) = f(n);
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!(basis_ == other.basis_)) throw DomainError("fields live on different bases");
  coeffs_ += other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (!(basis_ == other.basis_)) throw DomainError("fields live on different bases");
  coeffs_ -= other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator*=(double c) {
  coeffs_ *= c;
  return *this;
}

ControlGeometry ControlGeometry::distributed(double a, double b) {
  if (!(a >= 0.0 && b > a)) throw DomainError("distributed region needs 0 <= a < b");
  return ControlGeometry(DistributedRegion{a, b});
}

ControlGeometry ControlGeometry::boundary(BoundarySide side) { return ControlGeometry(BoundaryRegion{side}); }

const DistributedRegion& ControlGeometry::region() const {
  const auto* r = std::get_if<DistributedRegion>(&region_);
  if (!r) throw DomainError("geometry is not distributed");
  return *r;
}

BoundarySide ControlGeometry::side() const {
  const auto* r = std::get_if<BoundaryRegion>(&region_);
  if (!r) throw DomainError("geometry is not a boundary");
  return r->side;
}

void ControlGeometry::validate(const EigenBasis& basis) const {
  if (const auto* r = std::get_if<DistributedRegion>(&region_)) {
    if (!(r->a >= 0.0 && r->a < r->b && r->b <= basis.length() * (1.0 + 1e-12))) {
      throw DomainError("distributed region must satisfy 0 <= a < b <= L");
    }
  }
}

bool ControlGeometry::leaves_complement(const EigenBasis& basis) const {
  if (const auto* r = std::get_if<DistributedRegion>(&region_)) {
    return r->a > 0.0 || r->b < basis.length();
  }
  return true;
}

std::vector<double> uniform_points(const EigenBasis& basis, std::size_t points) {
  if (points < 2) throw DomainError("need at least two grid points");
  std::vector<double> x(points);
  for (std::size_t i = 0; i < points; ++i) {
    x[i] = basis.length() * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return x;
}

SpectralField project(std::span<const double> samples, std::span<const double> x, const EigenBasis& basis) {
  if (samples.size() != x.size()) throw DomainError("sample and grid sizes differ");
  const std::size_t points = x.size();
  const double L = basis.length();
  if (points < 3 || std::abs(x.front()) > 1e-12 * L || std::abs(x.back() - L) > 1e-12 * L) {
    throw DomainError("projection grid must cover [0, L]");
  }
  const std::size_t cells = points - 1;
  const double h = L / static_cast<double>(cells);
  for (std::size_t i = 0; i < points; ++i) {
    if (std::abs(x[i] - h * static_cast<double>(i)) > 1e-9 * L) throw DomainError("projection grid must be uniform");
  }
  const double wavelength = 2.0 * L / static_cast<double>(basis.modes());
  if (wavelength / h < static_cast<double>(kPointsPerWavelength)) {
    throw DomainError("grid under-resolves the highest mode");
  }
  // Simpson when the cell count is even, trapezoid otherwise.
  std::vector<double> w(points, h);
  if (cells % 2 == 0) {
    for (std::size_t i = 0; i < points; ++i) w[i] = h / 3.0 * (i == 0 || i == cells ? 1.0 : (i % 2 ? 4.0 : 2.0));
  } else {
    w.front() = w.back() = 0.5 * h;
  }
  SpectralField out(basis);
  for (std::size_t n = 1; n <= basis.modes(); ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < points; ++i) s += w[i] * samples[i] * basis.phi(n, x[i]);
    out.coeffs()(static_cast<Eigen::Index>(n - 1)) = s;
  }
  return out;
}

SpectralField project(const std::function<double(double)>& w, const EigenBasis& basis, std::size_t points) {
  if (points == 0) points = 32 * basis.modes() + 1;
  const auto x = uniform_points(basis, points);
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) v[i] = w(x[i]);
  return project(v, x, basis);
}

double synthesize(const SpectralField& field, double x) {
  double s = 0.0;
  const auto& c = field.coeffs();
  for (std::size_t n = 1; n <= field.basis().modes(); ++n) s += c(static_cast<Eigen::Index>(n - 1)) * field.basis().phi(n, x);
  return s;
}

std::vector<double> synthesize(const SpectralField& field, std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = synthesize(field, x[i]);
  return out;
}

double frac_power_norm(const SpectralField& field, double sigma) {
  if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
  double s = 0.0;
  for (std::size_t n = 1; n <= field.basis().modes(); ++n) {
    const double w = field.coeff(n);
    s += std::pow(field.basis().mu2(n), 2.0 * sigma) * w * w;
  }
  return std::sqrt(s);
}

MembershipTest dom_membership(const SpectralField& field, double sigma) {
  if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
  const std::size_t modes = field.basis().modes();
  if (modes < 2) throw DomainError("membership test needs at least two modes");
  MembershipTest t;
  for (std::size_t n = 1; n <= modes; ++n) {
    const double w = field.coeff(n);
    const double term = std::pow(field.basis().mu2(n), 2.0 * sigma) * w * w;
    if (n <= modes / 2) t.half_sum += term;
    t.full_sum += term;
  }
  if (t.half_sum > 0.0) {
    t.growth = t.full_sum / t.half_sum - 1.0;
  } else {
    t.growth = t.full_sum > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  t.member = t.growth < 0.01;
  return t;
}

Eigen::VectorXd green_lift_coeffs(const EigenBasis& basis, BoundarySide side) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(basis.modes()));
  const double c = std::sqrt(2.0 * basis.length()) / kPi;
  for (std::size_t n = 1; n <= basis.modes(); ++n) {
    const double base = c / static_cast<double>(n);
    const double sign = side == BoundarySide::Left ? 1.0 : (n % 2 ? 1.0 : -1.0);
    g(static_cast<Eigen::Index>(n - 1)) = sign * base;
  }
  return g;
}

SpectralField distributed_injection(const std::function<double(double)>& profile, const ControlGeometry& geometry,
                                    const EigenBasis& basis) {
  if (!geometry.is_distributed()) throw DomainError("distributed injection needs a distributed geometry");
  geometry.validate(basis);
  const auto& r = geometry.region();
  const std::size_t panels = std::max<std::size_t>(16, 2 * basis.modes());
  SpectralField out(basis);
  for (std::size_t n = 1; n <= basis.modes(); ++n) {
    out.coeffs()(static_cast<Eigen::Index>(n - 1)) =
        integrate([&](double x) { return profile(x) * basis.phi(n, x); }, r.a, r.b, panels);
  }
  return out;
}

void write_csv(std::ostream& out, const SpectralField& field) {
  out << "n,coeff\n";
  out.precision(17);
  for (std::size_t n = 1; n <= field.basis().modes(); ++n) out << n << ',' << field.coeff(n) << '\n';
}

}  // namespace memheat
