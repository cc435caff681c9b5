#include "memheat/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "memheat/error.hpp"
#include "memheat/parallel.hpp"
#include "memheat/spectral.hpp"

namespace memheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kPanel = 8;
// |e^{lambda t}| < 1e-16 beyond this value of |Re lambda t|.
const double kDecay = -std::log(1e-16);
const cplx kTwoPiI(0.0, 2.0 * kPi);

std::size_t panels_for(std::size_t nodes) { return std::max<std::size_t>(1, (nodes + kPanel - 1) / kPanel); }

// Path in a variable whose rays may run out to s_max.
std::vector<ContourNode> path(double eps, double alpha, double s_max, std::size_t ray_nodes, std::size_t arc_nodes) {
  const GaussRule& rule = gauss_legendre(kPanel);
  eps = std::min(eps, s_max / 4.0);
  const double u_max = std::log(s_max / eps);
  const std::size_t ray_panels = panels_for(ray_nodes);
  const std::size_t arc_panels = panels_for(arc_nodes);

  std::vector<ContourNode> upper;
  upper.reserve(ray_panels * kPanel);
  const cplx dir = std::polar(1.0, alpha);
  const double du = u_max / static_cast<double>(ray_panels);
  for (std::size_t p = 0; p < ray_panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * du;
    for (std::size_t i = 0; i < kPanel; ++i) {
      const double u = mid + 0.5 * du * rule.nodes[i];
      const double s = eps * std::exp(u);
      upper.push_back({s * dir, dir * s * 0.5 * du * rule.weights[i] / kTwoPiI});
    }
  }

  std::vector<ContourNode> nodes;
  nodes.reserve(2 * upper.size() + arc_panels * kPanel);
  for (auto it = upper.rbegin(); it != upper.rend(); ++it) {
    // lower ray traversed inward: lambda = conj, dlambda = -conj(dir) ds
    nodes.push_back({std::conj(it->lambda), -std::conj(dir) * std::abs(it->weight * kTwoPiI) / kTwoPiI});
  }
  const double dtau = 2.0 * alpha / static_cast<double>(arc_panels);
  for (std::size_t p = 0; p < arc_panels; ++p) {
    const double mid = -alpha + (static_cast<double>(p) + 0.5) * dtau;
    for (std::size_t i = 0; i < kPanel; ++i) {
      const double tau = mid + 0.5 * dtau * rule.nodes[i];
      const cplx lambda = std::polar(eps, tau);
      nodes.push_back({lambda, cplx(0.0, 1.0) * lambda * 0.5 * dtau * rule.weights[i] / kTwoPiI});
    }
  }
  nodes.insert(nodes.end(), upper.begin(), upper.end());
  return nodes;
}

struct Pass {
  std::vector<cplx> value;
  std::vector<double> l1;
  std::size_t nodes = 0;
};

Pass integrate_path(const VectorIntegrand& f, std::size_t dim, double t, const std::vector<ContourNode>& nodes) {
  Pass pass;
  pass.value.assign(dim, cplx(0.0));
  pass.l1.assign(dim, 0.0);
  pass.nodes = nodes.size();
  std::vector<cplx> buf(dim);
  for (const auto& node : nodes) {
    f(node.lambda, buf);
    const cplx w = node.weight * std::exp(node.lambda * t);
    const double aw = std::abs(w);
    for (std::size_t c = 0; c < dim; ++c) {
      pass.value[c] += w * buf[c];
      pass.l1[c] += aw * std::abs(buf[c]);
    }
  }
  for (std::size_t c = 0; c < dim; ++c) {
    if (!std::isfinite(pass.value[c].real()) || !std::isfinite(pass.value[c].imag())) {
      throw QuadratureError("non-finite contour integrand", std::numeric_limits<double>::infinity());
    }
  }
  return pass;
}

struct Refined {
  Pass fine;
  std::vector<double> delta;
  unsigned level = 0;
};

bool converged(const Pass& fine, const std::vector<double>& delta, const InversionOptions& opts) {
  for (std::size_t c = 0; c < delta.size(); ++c) {
    if (!(delta[c] <= opts.rel_tol * (std::abs(fine.value[c]) + opts.l1_floor * fine.l1[c]))) return false;
  }
  return true;
}

Refined refine(const VectorIntegrand& f, std::size_t dim, double t, const ContourSpec& spec,
               const InversionOptions& opts) {
  Pass coarse = integrate_path(f, dim, t, build_contour(spec, t));
  for (unsigned level = 1;; ++level) {
    const auto nodes = build_contour(spec.refined(level), t);
    Pass fine = integrate_path(f, dim, t, nodes);
    std::vector<double> delta(dim);
    for (std::size_t c = 0; c < dim; ++c) delta[c] = std::abs(fine.value[c] - coarse.value[c]);
    if (converged(fine, delta, opts)) return {std::move(fine), std::move(delta), level};
    if (2 * nodes.size() > opts.max_nodes) {
      throw QuadratureError("contour quadrature did not converge within the node cap",
                            *std::max_element(delta.begin(), delta.end()));
    }
    coarse = std::move(fine);
  }
}

}  // namespace

void ContourSpec::validate(double theta) const {
  if (!(theta > 0.0 && theta < kPi / 2)) throw DomainError("sector angle theta must lie in (0, pi/2)");
  if (!(ray_angle > kPi / 2 && ray_angle < kPi / 2 + theta)) {
    throw DomainError("ray angle must lie strictly between pi/2 and pi/2 + theta");
  }
  if (!(arc_radius > 0.0) || !(truncation > arc_radius) || !std::isfinite(truncation)) {
    throw DomainError("contour needs 0 < eps < R_max");
  }
  if (ray_nodes < kPanel || arc_nodes < kPanel) throw DomainError("contour node counts must be at least 8");
}

void ContourSpec::validate() const {
  if (!(ray_angle > kPi / 2 && ray_angle < kPi)) throw DomainError("ray angle must lie strictly between pi/2 and pi");
  validate(kPi / 2 - 1e-15);
}

ContourSpec ContourSpec::refined(unsigned level) const {
  ContourSpec s = *this;
  s.ray_nodes <<= level;
  s.arc_nodes <<= level;
  return s;
}

ContourSpec default_contour(double theta) {
  if (!(theta > 0.0 && theta < kPi / 2)) throw DomainError("sector angle theta must lie in (0, pi/2)");
  ContourSpec spec;
  spec.ray_angle = kPi / 2 + 0.6 * theta;
  return spec;
}

std::vector<ContourNode> build_contour(const ContourSpec& spec) {
  spec.validate();
  return path(spec.arc_radius, spec.ray_angle, spec.truncation, spec.ray_nodes, spec.arc_nodes);
}

bool uses_scaling(const ContourSpec& spec, double t) noexcept {
  return spec.t_scaling == TimeScaling::Always || (spec.t_scaling == TimeScaling::Auto && t < 1.0);
}

std::vector<ContourNode> build_contour(const ContourSpec& spec, double t) {
  spec.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("contour time must be positive");
  const double c = std::abs(std::cos(spec.ray_angle));
  if (uses_scaling(spec, t)) {
    const double s_max = std::min(spec.truncation * t, kDecay / c);
    auto nodes = path(spec.arc_radius, spec.ray_angle, s_max, spec.ray_nodes, spec.arc_nodes);
    for (auto& n : nodes) {
      n.lambda /= t;
      n.weight /= t;
    }
    return nodes;
  }
  const double s_max = std::min(spec.truncation, kDecay / (c * t));
  return path(spec.arc_radius, spec.ray_angle, s_max, spec.ray_nodes, spec.arc_nodes);
}

std::vector<InversionResult> invert(const VectorIntegrand& f, std::size_t dim, double t, const ContourSpec& spec,
                                    const InversionOptions& opts) {
  const Refined r = refine(f, dim, t, spec, opts);
  std::vector<InversionResult> out(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    out[c] = {r.fine.value[c], std::abs(r.fine.value[c].imag()), r.fine.nodes, r.delta[c]};
  }
  return out;
}

InversionResult invert(const std::function<cplx(cplx)>& f, double t, const ContourSpec& spec,
                       const InversionOptions& opts) {
  auto vf = [&f](cplx lambda, std::span<cplx> out) { out[0] = f(lambda); };
  return invert(vf, 1, t, spec, opts).front();
}

InversionTable invert_table(const VectorIntegrand& f, std::size_t dim, std::span<const double> times,
                            const ContourSpec& spec, const InversionOptions& opts) {
  InversionTable table;
  table.times.assign(times.begin(), times.end());
  table.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(dim));
  if (times.empty()) return table;
  for (double t : times) {
    if (!(t > 0.0)) throw DomainError("tabulated times must be positive");
  }
  ContourSpec fixed = spec;
  if (fixed.t_scaling == TimeScaling::Auto) fixed.t_scaling = TimeScaling::Always;

  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  const double probes[] = {*lo, std::sqrt(*lo * *hi), *hi};
  unsigned level = 0;
  for (double t : probes) {
    const Refined r = refine(f, dim, t, fixed, opts);
    level = std::max(level, r.level);
    table.est_error = std::max(table.est_error, *std::max_element(r.delta.begin(), r.delta.end()));
  }
  const ContourSpec use = fixed.refined(level);

  std::vector<double> imag(times.size(), 0.0);
  std::vector<std::size_t> counts(times.size(), 0);
  parallel_for(times.size(), [&](std::size_t k) {
    const Pass p = integrate_path(f, dim, times[k], build_contour(use, times[k]));
    for (std::size_t c = 0; c < dim; ++c) {
      table.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = p.value[c].real();
      imag[k] = std::max(imag[k], std::abs(p.value[c].imag()));
    }
    counts[k] = p.nodes;
  });
  table.max_imag_residual = *std::max_element(imag.begin(), imag.end());
  table.nodes_used = *std::max_element(counts.begin(), counts.end());
  return table;
}

void write_csv(std::ostream& out, std::span<const ContourNode> nodes) {
  out << "re,im,weight_re,weight_im\n";
  out.precision(17);
  for (const auto& n : nodes) {
    out << n.lambda.real() << ',' << n.lambda.imag() << ',' << n.weight.real() << ',' << n.weight.imag() << '\n';
  }
}

}  // namespace memheat
