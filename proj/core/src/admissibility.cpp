#include "memheat/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memheat/error.hpp"

namespace memheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJFloor = 1e-12;
constexpr double kMinSlope = 0.01;
constexpr double kNegligible = 1e-10;

std::vector<double> log_moduli(const SectorGrid& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.moduli_per_ray));
  const double lo = std::log(grid.min_modulus);
  const double hi = std::log(grid.max_modulus);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(out.size() - 1));
  }
  return out;
}

std::vector<double> fan(double theta, int rays) {
  const double half = theta + kPi / 2;
  std::vector<double> out(static_cast<std::size_t>(rays));
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = -half + 2.0 * half * static_cast<double>(j) / static_cast<double>(out.size() - 1);
  }
  return out;
}

struct SectorCheck {
  bool j_ok = true;
  bool map_ok = true;
  int samples = 0;
  std::vector<SampleFailure> failures;

  bool ok() const noexcept { return j_ok && map_ok; }
};

// arg(lambda K^/J) is unwrapped along each arc |lambda| = r from the positive
// axis, where the symbol is positive; std::arg alone folds angles beyond pi back.
SectorCheck check_sector(const MemoryKernel& k, const MemoryKernel& n, double theta_a, double theta,
                         const SectorGrid& grid, const std::vector<double>& moduli) {
  SectorCheck check;
  const double limit = theta_a + kPi / 2;
  const double half = theta + kPi / 2;
  const int steps = 4 * std::max(grid.fan_rays - 1, 2);
  for (double r : moduli) {
    for (double side : {1.0, -1.0}) {
      double unwrapped = 0.0;
      double previous = 0.0;
      for (int i = 0; i <= steps; ++i) {
        const cplx lambda = std::polar(r, side * half * static_cast<double>(i) / steps);
        ++check.samples;
        const cplx j = j_factor(n, lambda);
        if (std::abs(j) < kJFloor) {
          check.j_ok = false;
          check.failures.push_back({lambda, AssumptionItem::JNonvanishing});
          break;
        }
        const cplx z = lambda * laplace_transform(k, lambda) / j;
        if (z == cplx(0.0) || !std::isfinite(std::abs(z))) {
          check.map_ok = false;
          check.failures.push_back({lambda, AssumptionItem::SectorMapping});
          break;
        }
        const double a = std::arg(z);
        unwrapped = i == 0 ? a : unwrapped + std::remainder(a - previous, 2.0 * kPi);
        previous = a;
        if (!(std::abs(unwrapped) < limit + 1e-9)) {
          check.map_ok = false;
          check.failures.push_back({lambda, AssumptionItem::SectorMapping});
          break;
        }
      }
    }
  }
  return check;
}

double log_slope(double lo_value, double hi_value, double lo_r, double hi_r) {
  if (lo_value <= 0.0 || hi_value <= 0.0) return 0.0;
  return std::log(hi_value / lo_value) / std::log(hi_r / lo_r);
}

}  // namespace

std::string to_string(AssumptionItem item) {
  switch (item) {
    case AssumptionItem::JNonvanishing: return "J nonvanishing";
    case AssumptionItem::SectorMapping: return "sector mapping";
    case AssumptionItem::KLimit: return "K limit at infinity";
    case AssumptionItem::KGrowth: return "K growth at infinity";
    case AssumptionItem::KVanishAtZero: return "lambda K vanishes at zero";
    case AssumptionItem::NDecay: return "N decay at infinity";
  }
  return "unknown";
}

AdmissibilityReport verify_assumptions(const MemoryKernel& k, const MemoryKernel& n, double theta_a,
                                       const SectorGrid& grid) {
  if (!(theta_a > 0.0 && theta_a < kPi / 2)) throw DomainError("theta_A must lie in (0, pi/2)");
  if (grid.moduli_per_ray < 4 || grid.fan_rays < 2 || !(grid.min_modulus > 0.0) ||
      !(grid.max_modulus > 100.0 * grid.min_modulus) || !(grid.theta_cap > 0.0 && grid.theta_cap < kPi / 2)) {
    throw DomainError("invalid sector grid");
  }

  AdmissibilityReport report;
  const auto moduli = log_moduli(grid);

  auto probe = [&](double theta) {
    SectorCheck c = check_sector(k, n, theta_a, theta, grid, moduli);
    report.samples_used += c.samples;
    return c;
  };

  // Largest feasible theta. Feasibility shrinks monotonically with theta, so bisect.
  std::optional<double> theta_found;
  SectorCheck final_check = probe(grid.theta_cap);
  if (final_check.ok()) {
    theta_found = grid.theta_cap;
  } else {
    SectorCheck at_zero = probe(0.0);
    if (at_zero.ok()) {
      double lo = 0.0;
      double hi = grid.theta_cap;
      while (hi - lo > grid.theta_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid).ok()) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      theta_found = lo;
      final_check = probe(lo);
    } else {
      final_check = std::move(at_zero);
    }
  }
  const double theta_eval = theta_found.value_or(0.0);
  report.j_nonvanishing = final_check.j_ok;

  // Asymptotic items on the verified sector, two decades at each end.
  const std::size_t last = moduli.size() - 1;
  std::size_t top = last;
  while (top > 0 && moduli[top] > moduli[last] / 100.0) --top;
  std::size_t bottom = 0;
  while (bottom < last && moduli[bottom] < moduli[0] * 100.0) ++bottom;

  AsymptoticFlags flags{true, true, true, true};
  report.growth_exponent = std::numeric_limits<double>::infinity();
  const double k0 = k.delta_weight();
  for (double arg : fan(theta_eval, grid.fan_rays)) {
    const cplx l_hi = std::polar(moduli[last], arg);
    const cplx l_top = std::polar(moduli[top], arg);
    const cplx l_lo = std::polar(moduli[0], arg);
    const cplx l_bottom = std::polar(moduli[bottom], arg);
    report.samples_used += 4;

    const double dk_hi = std::abs(laplace_transform(k, l_hi) - k0);
    const double dk_top = std::abs(laplace_transform(k, l_top) - k0);
    if (!(dk_hi <= kNegligible * std::max(1.0, k0) || dk_hi < dk_top)) {
      flags.k_limit = false;
      report.failures.push_back({l_hi, AssumptionItem::KLimit});
    }

    const double g_hi = std::abs(l_hi * laplace_transform(k, l_hi));
    const double g_top = std::abs(l_top * laplace_transform(k, l_top));
    const double slope = log_slope(g_top, g_hi, moduli[top], moduli[last]);
    report.growth_exponent = std::min(report.growth_exponent, slope);
    if (!(slope >= kMinSlope)) {
      flags.k_growth = false;
      report.failures.push_back({l_hi, AssumptionItem::KGrowth});
    }

    const double v_lo = std::abs(l_lo * laplace_transform(k, l_lo));
    const double v_bottom = std::abs(l_bottom * laplace_transform(k, l_bottom));
    if (!(v_lo <= kNegligible || log_slope(v_lo, v_bottom, moduli[0], moduli[bottom]) >= kMinSlope)) {
      flags.k_vanish_at_zero = false;
      report.failures.push_back({l_lo, AssumptionItem::KVanishAtZero});
    }

    const double n_hi = std::abs(laplace_transform(n, l_hi));
    const double n_top = std::abs(laplace_transform(n, l_top));
    if (!(n_hi <= kNegligible || (n_hi < n_top && n_hi < 0.5))) {
      flags.n_decay = false;
      report.failures.push_back({l_hi, AssumptionItem::NDecay});
    }
  }
  report.asymptotics = flags;

  report.admissible = theta_found.has_value() && theta_eval > 0.0 && flags.all();
  if (report.admissible) {
    report.theta_max = theta_eval;
  } else {
    report.theta_max = 0.0;
    report.failures.insert(report.failures.end(), final_check.failures.begin(), final_check.failures.end());
  }
  return report;
}

std::optional<double> max_sector_angle_case3(double alpha, double gamma) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("sector bound needs exponents in (0,1)");
  }
  const double s = alpha + gamma;
  if (!(s < 2.0)) return std::nullopt;
  const double theta0 = std::min(1.0, (2.0 - s) / s);
  return theta0 * kPi / 2;
}

}  // namespace memheat
