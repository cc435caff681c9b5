#include "memheat/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "memheat/error.hpp"
#include "moments.hpp"

namespace memheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEnvelope = 80.0;
// Largest tolerated ratio max|term| / |sum| in the series.
constexpr double kCancellation = 1e2;

struct SeriesResult {
  double sum = 0.0;
  double max_term = 0.0;
  bool converged = false;
};

SeriesResult ml_series(double a, double b, double z) {
  SeriesResult r;
  const double logz = std::log(std::abs(z));
  double sum = 0.0;
  double comp = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double arg = a * k + b;
    double mag = std::exp(k * logz - std::lgamma(arg));
    double term = (z < 0.0 && (k % 2)) ? -mag : mag;
    // Neumaier
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
    r.max_term = std::max(r.max_term, mag);
    // Only stop once the terms are past their peak.
    if (arg > std::pow(std::abs(z), 1.0 / a) + 2.0 && mag < 1e-18 * std::abs(sum + comp)) {
      r.converged = true;
      break;
    }
    if (mag == 0.0 && arg > 2.0) {
      r.converged = true;
      break;
    }
  }
  r.sum = sum + comp;
  return r;
}

// E_{a,b}(-x), 0 < a < 1, b < 1 + a, x > 0:
// (1/(a pi)) int_0^inf r^((1-b)/a) e^{-r^(1/a)} [r sin(pi(1-b)) + x sin(pi(1-b+a))] / (r^2 + 2 r x cos(a pi) + x^2) dr,
// trapezoid in y = log r.
double ml_negative_integral(double a, double b, double x) {
  const double c = (1.0 - b) / a + 1.0;
  const double s1 = std::sin(kPi * (1.0 - b));
  const double s2 = std::sin(kPi * (1.0 - b + a));
  const double ca = std::cos(a * kPi);
  auto g = [&](double y) {
    const double r = std::exp(y);
    const double e = std::exp(c * y - std::exp(y / a));
    return e * (r * s1 + x * s2) / (r * r + 2.0 * r * x * ca + x * x);
  };
  const double strip = 0.9 * std::min(kPi * (1.0 - a), 0.5 * a * kPi);
  const double h = 2.0 * kPi * strip / 42.0;
  const double y_lo = std::min(std::log(x), 0.0) - 42.0 / std::max(c, 1e-3);
  const double y_hi = a * std::log(45.0) + 1.0;
  double sum = 0.0;
  for (double y = y_lo; y <= y_hi; y += h) sum += g(y);
  return h * sum / (a * kPi);
}

}  // namespace

std::vector<double> riemann_liouville(double sigma, std::span<const double> signal, UniformGrid grid) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("fractional order must lie in (0,1)");
  SampledKernel w(grid);
  w.add_power({1.0, sigma});
  return convolve(w, signal);
}

double mittag_leffler(double a, double b, double z) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("Mittag-Leffler parameters must be positive");
  if (!(std::abs(z) <= kEnvelope)) throw DomainError("Mittag-Leffler argument outside |z| <= 80");
  if (z == 0.0) return 1.0 / std::tgamma(b);
  if (a == 1.0 && b == 1.0) return std::exp(z);

  const SeriesResult s = ml_series(a, b, z);
  const bool accurate = s.converged && s.max_term <= kCancellation * std::abs(s.sum);
  if (accurate) return s.sum;

  if (z < 0.0 && a < 1.0) {
    if (std::abs(b - (1.0 + a)) < 1e-14) return (mittag_leffler(a, 1.0, z) - 1.0) / z;
    if (b < 1.0 + a) return ml_negative_integral(a, b, -z);
  }
  throw NumericalError("Mittag-Leffler series lost accuracy to cancellation");
}

bool BlowupSamples::bound_holds() const {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(value[i] >= lower_bound[i])) return false;
  }
  return true;
}

std::size_t BlowupSamples::index_of(double tq) const {
  if (t.empty()) throw DomainError("no samples");
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs(t[i] - tq) < std::abs(t[best] - tq)) best = i;
  }
  return best;
}

double BlowupSamples::value_at(double tq) const { return value[index_of(tq)]; }

BlowupSamples example_a2_blowup(double eps, double T, std::span<const double> times, std::size_t steps,
                                std::size_t extra_nodes) {
  if (!(eps > 0.0 && eps < 0.25)) throw DomainError("eps must lie in (0, 1/4)");
  if (!(T > 0.0)) throw DomainError("T must be positive");
  if (steps < 2) throw DomainError("need at least two uniform steps");
  const double gamma = eps + 0.5;
  const double h = T / static_cast<double>(steps);

  std::vector<double> mesh;
  for (std::size_t k = 0; k < steps; ++k) mesh.push_back(h * static_cast<double>(k));
  const double closest = 1e-6 * T;
  if (extra_nodes > 0) {
    const double q = std::pow(closest / h, 1.0 / static_cast<double>(extra_nodes));
    for (std::size_t j = 1; j <= extra_nodes; ++j) mesh.push_back(T - h * std::pow(q, static_cast<double>(j)));
  }
  for (double tq : times) {
    if (!(tq >= 0.0 && tq < T)) throw DomainError("sample times must lie in [0, T)");
    mesh.push_back(tq);
  }
  std::sort(mesh.begin(), mesh.end());
  mesh.erase(std::unique(mesh.begin(), mesh.end(), [T](double x, double y) { return std::abs(x - y) <= 1e-14 * T; }),
             mesh.end());

  const std::size_t m = mesh.size();
  std::vector<double> f(m);
  for (std::size_t i = 0; i < m; ++i) f[i] = std::pow(T - mesh[i], gamma - 1.0);

  BlowupSamples out;
  out.gamma = gamma;
  out.t = mesh;
  out.value.assign(m, 0.0);
  out.value_rl.assign(m, 0.0);
  out.lower_bound.assign(m, 0.0);
  const double order = 1.0 - gamma;
  const double to_gamma = std::tgamma(order) / std::tgamma(gamma);
  for (std::size_t k = 1; k < m; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double u0 = mesh[k] - mesh[j + 1];
      const double u1 = mesh[k] - mesh[j];
      const CellMoments c = detail::power_moments(order, u0, u1);
      acc += c.m1 * f[j] + (c.m0 - c.m1) * f[j + 1];
    }
    if (!std::isfinite(acc)) throw NumericalError("fractional integral overflowed near T");
    out.value_rl[k] = acc;
    out.value[k] = acc * to_gamma;
    out.lower_bound[k] = (std::log(T) - std::log(T - mesh[k])) / std::tgamma(gamma);
  }
  return out;
}

}  // namespace memheat
