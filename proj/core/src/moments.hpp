#pragma once

// Exact cell moments of the closed-form kernel families.

#include <cmath>

#include "memheat/kernel.hpp"

namespace memheat::detail {

/// Moments of t^(o-1)/Gamma(o) over [u0, u1].
inline CellMoments power_moments(double order, double u0, double u1) {
  const double h = u1 - u0;
  const double g = std::tgamma(order);
  if (u0 <= 0.0) {
    const double b_o = std::pow(u1, order);
    return {b_o / (order * g), b_o / ((order + 1.0) * g)};
  }
  const double x = h / u0;
  const double a_o = std::pow(u0, order);
  const double m0 = a_o * std::expm1(order * std::log1p(x)) / (order * g);
  // int_0^x (1+v)^(o-1) v dv
  double first;
  if (x <= 0.5) {
    double binom = 1.0;  // C(o-1, k)
    double xp = x * x;   // x^(k+2)
    first = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double term = binom * xp / (k + 2.0);
      first += term;
      if (std::abs(term) < 1e-18 * std::abs(first)) break;
      binom *= (order - 1.0 - k) / (k + 1.0);
      xp *= x;
    }
  } else {
    first = std::expm1((order + 1.0) * std::log1p(x)) / (order + 1.0) - std::expm1(order * std::log1p(x)) / order;
  }
  const double m1 = a_o * u0 * first / (g * h);
  return {m0, m1};
}

/// int_0^h v e^{-b v} dv / h
inline double exp_first_moment(double b, double h) {
  const double x = b * h;
  if (std::abs(x) < 1e-3) return h * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0);
  return h * (1.0 - std::exp(-x) * (1.0 + x)) / (x * x);
}

/// Moments of e^{-b u} over [u0, u1].
inline CellMoments exp_moments(double rate, double u0, double u1) {
  const double h = u1 - u0;
  const double decay = std::exp(-rate * u0);
  const double m0 = std::abs(rate * h) < 1e-12 ? h : -std::expm1(-rate * h) / rate;
  return {decay * m0, decay * exp_first_moment(rate, h)};
}

/// Moments of the linear interpolant of (s0, s1) over a cell of width h.
inline CellMoments linear_moments(double s0, double s1, double h) {
  return {0.5 * h * (s0 + s1), h * (s0 / 6.0 + s1 / 3.0)};
}

}  // namespace memheat::detail
