#include "memheat/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "memheat/error.hpp"

namespace memheat {

namespace {

cplx power_divisor(cplx lambda, int p) {
  switch (p) {
    case 0: return 1.0;
    case 1: return 1.0 / lambda;
    case 2: return 1.0 / (lambda * lambda);
    default: throw DomainError("divide_power must be 0, 1 or 2");
  }
}

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("transform time must be positive");
}

}  // namespace

ContourSpec contour_for(const MemoryKernel& k, const MemoryKernel& n, double theta_a) {
  const AdmissibilityReport report = verify_assumptions(k, n, theta_a);
  if (!report.admissible) {
    std::string why = "kernel pair is not admissible";
    if (!report.failures.empty()) why += " (" + to_string(report.failures.front().item) + ")";
    throw AdmissibilityError(why);
  }
  return default_contour(report.theta_max);
}

VectorIntegrand evolution_integrand(const MemoryKernel& k, const MemoryKernel& n, std::vector<double> mu2,
                                    int divide_power) {
  power_divisor(1.0, divide_power);
  return [k, n, mu2 = std::move(mu2), divide_power](cplx lambda, std::span<cplx> out) {
    const cplx kh = laplace_transform(k, lambda);
    const cplx j = j_factor(n, lambda);
    const cplx lk = lambda * kh;
    const cplx d = power_divisor(lambda, divide_power);
    for (std::size_t c = 0; c < mu2.size(); ++c) out[c] = d * kh / (lk + mu2[c] * j);
  };
}

VectorIntegrand forcing_integrand(const MemoryKernel& k, const MemoryKernel& n, std::vector<double> mu2,
                                  int divide_power) {
  power_divisor(1.0, divide_power);
  return [k, n, mu2 = std::move(mu2), divide_power](cplx lambda, std::span<cplx> out) {
    const cplx lk = lambda * laplace_transform(k, lambda);
    const cplx j = j_factor(n, lambda);
    const cplx d = power_divisor(lambda, divide_power);
    for (std::size_t c = 0; c < mu2.size(); ++c) out[c] = d / (lk + mu2[c] * j);
  };
}

InversionResult mode_evolution_kernel(const MemoryKernel& k, const MemoryKernel& n, double mu2, double t,
                                      const ContourSpec& spec, const InversionOptions& opts) {
  require_time(t);
  if (!(mu2 >= 0.0)) throw DomainError("mu^2 must be nonnegative");
  return invert(evolution_integrand(k, n, {mu2}), 1, t, spec, opts).front();
}

InversionResult mode_forcing_kernel(const MemoryKernel& k, const MemoryKernel& n, double mu2, double t,
                                    const ContourSpec& spec, const InversionOptions& opts) {
  require_time(t);
  if (!(mu2 >= 0.0)) throw DomainError("mu^2 must be nonnegative");
  return invert(forcing_integrand(k, n, {mu2}), 1, t, spec, opts).front();
}

InversionResult psi(const MemoryKernel& k, const MemoryKernel& n, double t, const ContourSpec& spec,
                    const InversionOptions& opts) {
  require_time(t);
  return invert([&](cplx lambda) { return laplace_transform(k, lambda) / j_factor(n, lambda); }, t, spec, opts);
}

InversionResult phi(const MemoryKernel& k, const MemoryKernel& n, double t, const ContourSpec& spec,
                    const InversionOptions& opts) {
  require_time(t);
  return invert(
      [&](cplx lambda) { return laplace_transform(k, lambda) / (lambda * lambda * j_factor(n, lambda)); }, t, spec,
      opts);
}

ZSetScan z_set_scan(const MemoryKernel& k, const MemoryKernel& n, double t_lo, double t_hi, std::size_t n_points,
                    const ContourSpec& spec, double zero_tol) {
  if (!(t_lo > 0.0 && t_hi > t_lo)) throw DomainError("z-set range must satisfy 0 < t_lo < t_hi");
  if (n_points < 2) throw DomainError("z-set scan needs at least two points");
  ZSetScan scan;
  scan.times.resize(n_points);
  scan.values.resize(n_points);
  const double r = std::log(t_hi / t_lo);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double t = t_lo * std::exp(r * static_cast<double>(i) / static_cast<double>(n_points - 1));
    scan.times[i] = t;
    scan.values[i] = psi(k, n, t, spec).real();
  }
  scan.identically_zero =
      std::all_of(scan.values.begin(), scan.values.end(), [zero_tol](double v) { return std::abs(v) < zero_tol; });
  if (scan.identically_zero) return scan;

  for (std::size_t i = 0; i + 1 < n_points; ++i) {
    double a = scan.times[i];
    double b = scan.times[i + 1];
    double fa = scan.values[i];
    const double fb = scan.values[i + 1];
    if (fa == 0.0) {
      scan.zeros.push_back(a);
      continue;
    }
    if ((fa < 0.0) == (fb < 0.0) || fb == 0.0) continue;
    while (b - a > 1e-10) {
      const double m = 0.5 * (a + b);
      const double fm = psi(k, n, m, spec).real();
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    scan.zeros.push_back(0.5 * (a + b));
  }
  if (scan.values.back() == 0.0) scan.zeros.push_back(scan.times.back());
  return scan;
}

}  // namespace memheat
