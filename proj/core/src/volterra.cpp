#include "memheat/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memheat/error.hpp"
#include "moments.hpp"

namespace memheat {

namespace {

constexpr double kOrderMerge = 1e-14;
constexpr double kRateMerge = 1e-14;
// Below this relative rate gap the exp*exp closed form cancels badly.
constexpr double kRateGap = 1e-3;

void require_same_grid(const UniformGrid& a, const UniformGrid& b) {
  if (!(a == b)) throw DomainError("kernels live on different grids");
}

double power_value(const PowerTerm& p, double t) {
  if (t > 0.0) return p.coeff * std::pow(t, p.order - 1.0) / std::tgamma(p.order);
  if (p.order > 1.0) return 0.0;
  if (p.order == 1.0) return p.coeff;
  return p.coeff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

// Moments of the closed-form part only.
CellMoments closed_moments(const SampledKernel& k, std::size_t i) {
  const double h = k.grid().step;
  const double u0 = h * static_cast<double>(i);
  const double u1 = u0 + h;
  CellMoments m;
  for (const auto& p : k.power_terms()) {
    const CellMoments c = detail::power_moments(p.order, u0, u1);
    m.m0 += p.coeff * c.m0;
    m.m1 += p.coeff * c.m1;
  }
  for (const auto& e : k.exp_terms()) {
    const CellMoments c = detail::exp_moments(e.rate, u0, u1);
    m.m0 += e.weight * c.m0;
    m.m1 += e.weight * c.m1;
  }
  return m;
}

std::vector<CellMoments> moments_of(const SampledKernel& k, bool closed, bool smooth) {
  const auto& g = k.grid();
  std::vector<CellMoments> out(g.steps);
  const auto& s = k.smooth();
  for (std::size_t i = 0; i < g.steps; ++i) {
    CellMoments m;
    if (closed) m = closed_moments(k, i);
    if (smooth) {
      const CellMoments l = detail::linear_moments(s[i], s[i + 1], g.step);
      m.m0 += l.m0;
      m.m1 += l.m1;
    }
    out[i] = m;
  }
  return out;
}

bool has_smooth(const SampledKernel& k) {
  return std::any_of(k.smooth().begin(), k.smooth().end(), [](double v) { return v != 0.0; });
}

bool has_closed(const SampledKernel& k) { return !k.power_terms().empty() || !k.exp_terms().empty(); }

std::vector<double> solve_trapezoid(std::span<const CellMoments> m, std::span<const double> rhs) {
  const std::size_t n = rhs.size();
  std::vector<double> v(n, 0.0);
  if (n == 0) return v;
  v[0] = rhs[0];
  const double diag = 1.0 + m[0].m0 - m[0].m1;
  if (!(std::abs(diag) > 1e-14)) throw VolterraError("singular product-integration diagonal", 1);
  for (std::size_t k = 1; k < n; ++k) {
    double acc = rhs[k] - m[0].m1 * v[k - 1];
    for (std::size_t i = 1; i < k; ++i) {
      acc -= (m[i].m0 - m[i].m1) * v[k - i] + m[i].m1 * v[k - i - 1];
    }
    v[k] = acc / diag;
    if (!std::isfinite(v[k])) throw VolterraError("non-finite Volterra solution", k);
  }
  return v;
}

SampledKernel solve_direct(const SampledKernel& k, const SampledKernel& f, const VolterraOptions& opts) {
  SampledKernel x(k.grid());
  SampledKernel term = f;
  std::size_t peeled = 0;
  while (term.min_order() < opts.smooth_order && peeled < opts.max_neumann_terms) {
    x += term;
    term = -convolve(k, term);
    ++peeled;
  }
  if (term.min_order() < 1.0) throw VolterraError("Neumann peeling left a singular remainder", 0);
  const auto rhs = term.samples();
  const auto moments = k.all_cell_moments();
  x.add_smooth(solve_trapezoid(moments, rhs));
  return x;
}

SampledKernel on_grid(const SampledKernel& k, UniformGrid grid) {
  SampledKernel out(grid);
  for (const auto& p : k.power_terms()) out.add_power(p);
  for (const auto& e : k.exp_terms()) out.add_exp(e);
  return out;
}

}  // namespace

UniformGrid::UniformGrid(double step_, std::size_t steps_) : step(step_), steps(steps_) {
  if (!(step > 0.0) || !std::isfinite(step) || steps == 0) throw DomainError("grid needs a positive step and steps >= 1");
}

std::size_t UniformGrid::index_of(double t) const {
  const double k = std::round(t / step);
  if (k < 0.0 || k > static_cast<double>(steps) || std::abs(k * step - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    throw DomainError("time " + std::to_string(t) + " is not a grid node");
  }
  return static_cast<std::size_t>(k);
}

SampledKernel::SampledKernel(UniformGrid grid) : grid_(grid), smooth_(grid.size(), 0.0) {}

SampledKernel SampledKernel::from_kernel(const MemoryKernel& kernel, UniformGrid grid) {
  if (kernel.delta_weight() != 0.0) throw DomainError("sampled kernels cannot carry a delta part");
  SampledKernel out(grid);
  if (const auto* p = std::get_if<PowerLaw>(&kernel.singular_part())) {
    out.add_power({p->scale, p->order()});
  } else if (const auto* e = std::get_if<ExpSum>(&kernel.singular_part())) {
    for (const auto& t : e->terms) out.add_exp(t);
  }
  return out;
}

SampledKernel SampledKernel::from_samples(UniformGrid grid, std::vector<double> samples) {
  if (samples.size() != grid.size()) throw DomainError("sample count does not match grid");
  SampledKernel out(grid);
  out.smooth_ = std::move(samples);
  return out;
}

void SampledKernel::add_power(PowerTerm term) {
  if (!(term.order > 0.0)) throw DomainError("power term order must be positive");
  if (term.coeff == 0.0) return;
  for (auto it = power_.begin(); it != power_.end(); ++it) {
    if (std::abs(it->order - term.order) <= kOrderMerge * term.order) {
      it->coeff += term.coeff;
      if (it->coeff == 0.0) power_.erase(it);
      return;
    }
  }
  power_.push_back(term);
}

void SampledKernel::add_exp(ExpTerm term) {
  if (term.weight == 0.0) return;
  for (auto it = exp_.begin(); it != exp_.end(); ++it) {
    if (std::abs(it->rate - term.rate) <= kRateMerge * std::max(1.0, std::abs(term.rate))) {
      it->weight += term.weight;
      if (it->weight == 0.0) exp_.erase(it);
      return;
    }
  }
  exp_.push_back(term);
}

void SampledKernel::add_smooth(std::span<const double> samples, double factor) {
  if (samples.size() != smooth_.size()) throw DomainError("sample count does not match grid");
  for (std::size_t i = 0; i < smooth_.size(); ++i) smooth_[i] += factor * samples[i];
}

bool SampledKernel::singular_at_origin() const noexcept {
  return std::any_of(power_.begin(), power_.end(), [](const PowerTerm& p) { return p.order < 1.0; });
}

double SampledKernel::min_order() const noexcept {
  double o = std::numeric_limits<double>::infinity();
  for (const auto& p : power_) o = std::min(o, p.order);
  return o;
}

double SampledKernel::value(std::size_t k) const {
  if (k >= grid_.size()) throw DomainError("node index out of range");
  if (k == 0 && singular_at_origin()) throw DomainError("kernel is singular at t = 0");
  const double t = grid_.at(k);
  double v = smooth_[k];
  for (const auto& p : power_) v += power_value(p, t);
  for (const auto& e : exp_) v += e.weight * std::exp(-e.rate * t);
  return v;
}

std::vector<double> SampledKernel::samples() const {
  std::vector<double> out(grid_.size());
  for (std::size_t k = 1; k < out.size(); ++k) out[k] = value(k);
  if (singular_at_origin()) {
    const auto worst = std::min_element(power_.begin(), power_.end(),
                                        [](const PowerTerm& a, const PowerTerm& b) { return a.order < b.order; });
    out[0] = power_value(*worst, 0.0);
  } else {
    out[0] = value(0);
  }
  return out;
}

CellMoments SampledKernel::cell_moments(std::size_t i) const {
  if (i >= grid_.steps) throw DomainError("cell index out of range");
  CellMoments m = closed_moments(*this, i);
  const CellMoments l = detail::linear_moments(smooth_[i], smooth_[i + 1], grid_.step);
  return {m.m0 + l.m0, m.m1 + l.m1};
}

std::vector<CellMoments> SampledKernel::all_cell_moments() const { return moments_of(*this, true, true); }

SampledKernel& SampledKernel::operator+=(const SampledKernel& other) {
  require_same_grid(grid_, other.grid_);
  for (const auto& p : other.power_) add_power(p);
  for (const auto& e : other.exp_) add_exp(e);
  add_smooth(other.smooth_);
  return *this;
}

SampledKernel& SampledKernel::operator*=(double c) {
  if (c == 0.0) {
    power_.clear();
    exp_.clear();
    std::fill(smooth_.begin(), smooth_.end(), 0.0);
    return *this;
  }
  for (auto& p : power_) p.coeff *= c;
  for (auto& e : exp_) e.weight *= c;
  for (auto& s : smooth_) s *= c;
  return *this;
}

std::vector<double> convolve(std::span<const CellMoments> moments, std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n == 0) return {};
  if (moments.size() + 1 < n) throw DomainError("not enough cell moments for the signal length");
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      acc += (moments[i].m0 - moments[i].m1) * signal[k - i] + moments[i].m1 * signal[k - i - 1];
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> convolve(const SampledKernel& k, std::span<const double> signal) {
  if (signal.size() != k.grid().size()) throw DomainError("signal length does not match grid");
  return convolve(k.all_cell_moments(), signal);
}

std::vector<double> convolve(const MemoryKernel& k, UniformGrid grid, std::span<const double> signal) {
  if (signal.size() != grid.size()) throw DomainError("signal length does not match grid");
  std::vector<double> out(signal.size(), 0.0);
  if (k.has_singular_part()) out = convolve(SampledKernel::from_kernel(MemoryKernel(0.0, k.singular_part()), grid), signal);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += k.delta_weight() * signal[i];
  return out;
}

SampledKernel convolve(const SampledKernel& a, const SampledKernel& b) {
  require_same_grid(a.grid(), b.grid());
  const UniformGrid& g = a.grid();
  SampledKernel out(g);

  for (const auto& p : a.power_terms()) {
    for (const auto& q : b.power_terms()) out.add_power({p.coeff * q.coeff, p.order + q.order});
  }
  for (const auto& e : a.exp_terms()) {
    for (const auto& f : b.exp_terms()) {
      const double w = e.weight * f.weight;
      const double d = e.rate - f.rate;
      if (std::abs(d) >= kRateGap * std::max(std::abs(e.rate), std::abs(f.rate))) {
        out.add_exp({-w / d, e.rate});
        out.add_exp({w / d, f.rate});
      } else {
        // int_0^t e^{-r1(t-s)} e^{-r2 s} ds = e^{-r1 t} t expm1(d t)/(d t)
        std::vector<double> s(g.size(), 0.0);
        for (std::size_t k = 1; k < s.size(); ++k) {
          const double t = g.at(k);
          const double x = d * t;
          const double ratio = x == 0.0 ? 1.0 : std::expm1(x) / x;
          s[k] = w * std::exp(-e.rate * t) * t * ratio;
        }
        out.add_smooth(s);
      }
    }
  }

  // Mixed power/exp products, and anything touching a smooth part, via product integration.
  if (!a.power_terms().empty() && !b.exp_terms().empty()) {
    SampledKernel pa(g), eb(g);
    for (const auto& p : a.power_terms()) pa.add_power(p);
    for (const auto& e : b.exp_terms()) eb.add_exp(e);
    out.add_smooth(convolve(moments_of(pa, true, false), eb.samples()));
  }
  if (!a.exp_terms().empty() && !b.power_terms().empty()) {
    SampledKernel ea(g), pb(g);
    for (const auto& e : a.exp_terms()) ea.add_exp(e);
    for (const auto& p : b.power_terms()) pb.add_power(p);
    out.add_smooth(convolve(moments_of(pb, true, false), ea.samples()));
  }
  const bool a_smooth = has_smooth(a);
  const bool b_smooth = has_smooth(b);
  if (a_smooth && has_closed(b)) out.add_smooth(convolve(moments_of(b, true, false), a.smooth()));
  if (b_smooth && has_closed(a)) out.add_smooth(convolve(moments_of(a, true, false), b.smooth()));
  if (a_smooth && b_smooth) out.add_smooth(convolve(moments_of(a, false, true), b.smooth()));
  return out;
}

SampledKernel solve_second_kind(const SampledKernel& k, const SampledKernel& f, const VolterraOptions& opts) {
  require_same_grid(k.grid(), f.grid());
  if (opts.refinement == 0 || has_smooth(k) || has_smooth(f)) return solve_direct(k, f, opts);

  VolterraOptions inner = opts;
  inner.refinement = 0;
  const std::size_t r = opts.refinement;
  const UniformGrid g1 = k.grid().refined(r);
  const UniformGrid g2 = k.grid().refined(2 * r);
  const SampledKernel x1 = solve_direct(on_grid(k, g1), on_grid(f, g1), inner);
  const SampledKernel x2 = solve_direct(on_grid(k, g2), on_grid(f, g2), inner);

  SampledKernel x = on_grid(x1, k.grid());
  std::vector<double> s(k.grid().size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    s[j] = (4.0 * x2.smooth()[2 * r * j] - x1.smooth()[r * j]) / 3.0;
  }
  x.add_smooth(s);
  return x;
}

SampledKernel resolvent_kernel(const MemoryKernel& n, UniformGrid grid, const VolterraOptions& opts) {
  const SampledKernel nk = SampledKernel::from_kernel(n, grid);
  return solve_second_kind(nk, nk, opts);
}

SampledKernel resolvent_kernel(const SampledKernel& n, const VolterraOptions& opts) {
  return solve_second_kind(n, n, opts);
}

double resolvent_residual(const SampledKernel& r, const SampledKernel& n) {
  SampledKernel d = r;
  d += convolve(n, r);
  d += -n;
  double worst = 0.0;
  for (std::size_t k = 1; k < d.grid().size(); ++k) worst = std::max(worst, std::abs(d.value(k)));
  return worst;
}

std::vector<double> apply_memory(const MemoryKernel& n, UniformGrid grid, std::span<const double> f) {
  std::vector<double> g = convolve(n, grid, f);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += f[i];
  return g;
}

std::vector<double> remove_memory(const SampledKernel& r, std::span<const double> g) {
  std::vector<double> f = convolve(r, g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = g[i] - f[i];
  return f;
}

}  // namespace memheat
