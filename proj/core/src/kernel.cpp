#include "memheat/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "memheat/error.hpp"
#include "moments.hpp"

namespace memheat {

JVanishingError::JVanishingError(cplx lambda)
    : AdmissibilityError("J(lambda) = 1 + N(lambda) vanishes at lambda = (" +
                         std::to_string(lambda.real()) + ", " + std::to_string(lambda.imag()) + ")"),
      lambda_(lambda) {}

QuadratureError::QuadratureError(const std::string& what, double est_error)
    : NumericalError(what), est_error_(est_error) {}

VolterraError::VolterraError(const std::string& what, std::size_t index)
    : NumericalError(what + " (grid index " + std::to_string(index) + ")"), index_(index) {}

namespace {

constexpr double kJFloor = 1e-12;

void validate(double delta_weight, const SingularPart& part) {
  if (!(delta_weight >= 0.0) || !std::isfinite(delta_weight)) {
    throw DomainError("kernel delta weight must be finite and nonnegative");
  }
  if (const auto* p = std::get_if<PowerLaw>(&part)) {
    if (!(p->exponent > 0.0 && p->exponent < 1.0)) {
      throw DomainError("power-law exponent must lie strictly inside (0,1)");
    }
    if (!(p->scale > 0.0) || !std::isfinite(p->scale)) {
      throw DomainError("power-law scale must be positive");
    }
  } else if (const auto* e = std::get_if<ExpSum>(&part)) {
    for (const auto& term : e->terms) {
      if (!(term.weight >= 0.0) || !std::isfinite(term.weight)) {
        throw DomainError("exponential-sum weights must be nonnegative");
      }
      if (!(term.rate > 0.0) || !std::isfinite(term.rate)) {
        throw DomainError("exponential-sum rates must be strictly positive");
      }
    }
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    char trial[64];
    std::snprintf(trial, sizeof trial, "%.*g", prec, v);
    if (std::strtod(trial, nullptr) == v) return trial;
  }
  return buf;
}

}  // namespace

MemoryKernel::MemoryKernel(double delta_weight, SingularPart part)
    : delta_weight_(delta_weight), part_(std::move(part)) {
  validate(delta_weight_, part_);
  if (auto* e = std::get_if<ExpSum>(&part_); e && e->terms.empty()) part_ = ZeroPart{};
}

MemoryKernel MemoryKernel::power_law(double exponent, PowerRole role, double scale) {
  return {0.0, PowerLaw{exponent, scale, role}};
}

MemoryKernel MemoryKernel::exp_sum(std::vector<ExpTerm> terms) { return {0.0, ExpSum{std::move(terms)}}; }

bool MemoryKernel::is_zero() const noexcept {
  if (delta_weight_ != 0.0) return false;
  if (std::holds_alternative<ZeroPart>(part_)) return true;
  if (const auto* e = std::get_if<ExpSum>(&part_)) {
    return std::all_of(e->terms.begin(), e->terms.end(), [](const ExpTerm& t) { return t.weight == 0.0; });
  }
  return false;
}

bool MemoryKernel::singular_at_origin() const noexcept {
  const auto* p = std::get_if<PowerLaw>(&part_);
  return p != nullptr && p->order() < 1.0;
}

double MemoryKernel::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("kernel evaluation requires t > 0");
  return std::visit(
      [t](const auto& part) -> double {
        using T = std::decay_t<decltype(part)>;
        if constexpr (std::is_same_v<T, ZeroPart>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          const double o = part.order();
          return part.scale * std::pow(t, o - 1.0) / std::tgamma(o);
        } else {
          double s = 0.0;
          for (const auto& term : part.terms) s += term.weight * std::exp(-term.rate * t);
          return s;
        }
      },
      part_);
}

cplx MemoryKernel::laplace(cplx lambda) const {
  return laplace_transform(*this, lambda);
}

CellMoments MemoryKernel::cell_moments(double u0, double u1) const {
  const double h = u1 - u0;
  if (!(h > 0.0) || u0 < 0.0) throw DomainError("cell moments need 0 <= u0 < u1");
  return std::visit(
      [&](const auto& part) -> CellMoments {
        using T = std::decay_t<decltype(part)>;
        if constexpr (std::is_same_v<T, ZeroPart>) {
          return {};
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          const CellMoments m = detail::power_moments(part.order(), u0, u1);
          return {part.scale * m.m0, part.scale * m.m1};
        } else {
          CellMoments m;
          for (const auto& term : part.terms) {
            const CellMoments e = detail::exp_moments(term.rate, u0, u1);
            m.m0 += term.weight * e.m0;
            m.m1 += term.weight * e.m1;
          }
          return m;
        }
      },
      part_);
}

MemoryKernel MemoryKernel::scaled(double c) const {
  if (!(c >= 0.0)) throw DomainError("kernel scale factor must be nonnegative");
  SingularPart part = std::visit(
      [c](const auto& p) -> SingularPart {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ZeroPart>) {
          return p;
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          if (c == 0.0) return ZeroPart{};
          PowerLaw q = p;
          q.scale *= c;
          return q;
        } else {
          ExpSum q = p;
          for (auto& term : q.terms) term.weight *= c;
          return q;
        }
      },
      part_);
  return {delta_weight_ * c, std::move(part)};
}

MemoryKernel MemoryKernel::reducible_partner(double c, const MemoryKernel& n) {
  if (n.delta_weight() != 0.0) throw DomainError("N must not carry a delta part");
  MemoryKernel k = n.scaled(c);
  return {c, k.singular_part()};
}

std::string MemoryKernel::to_string() const {
  std::vector<std::string> terms;
  if (delta_weight_ != 0.0) terms.push_back("delta(" + format_number(delta_weight_) + ")");
  if (const auto* p = std::get_if<PowerLaw>(&part_)) {
    std::string s = "powerlaw(kind=";
    s += p->role == PowerRole::K ? "K" : "N";
    s += ", exp=" + format_number(p->exponent);
    if (p->scale != 1.0) s += ", scale=" + format_number(p->scale);
    s += ")";
    terms.push_back(std::move(s));
  } else if (const auto* e = std::get_if<ExpSum>(&part_)) {
    std::string s = "expsum([";
    for (std::size_t i = 0; i < e->terms.size(); ++i) {
      if (i) s += ",";
      s += "(" + format_number(e->terms[i].weight) + "," + format_number(e->terms[i].rate) + ")";
    }
    s += "])";
    terms.push_back(std::move(s));
  }
  if (terms.empty()) return "zero";
  std::string out = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) out += " + " + terms[i];
  return out;
}

// ---------------------------------------------------------------------------
// grammar

namespace {

class KernelParser {
 public:
  explicit KernelParser(std::string_view text) : text_(text) {}

  MemoryKernel parse() {
    double delta = 0.0;
    bool have_delta = false;
    SingularPart part = ZeroPart{};
    bool have_part = false;
    bool saw_zero = false;
    do {
      skip_ws();
      const std::string name = identifier();
      if (name == "zero") {
        saw_zero = true;
      } else if (name == "delta") {
        if (have_delta) fail("duplicate delta term");
        expect('(');
        delta = number();
        expect(')');
        have_delta = true;
      } else if (name == "powerlaw") {
        if (have_part) fail("at most one regular term is allowed");
        part = power_law_args();
        have_part = true;
      } else if (name == "expsum") {
        if (have_part) fail("at most one regular term is allowed");
        part = exp_sum_args();
        have_part = true;
      } else {
        fail("unknown kernel term '" + name + "'");
      }
      skip_ws();
    } while (accept('+'));
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    if (saw_zero && (have_delta || have_part)) fail("'zero' cannot be combined with other terms");
    return {delta, std::move(part)};
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw DomainError("kernel grammar: " + msg + " at offset " + std::to_string(pos_) + " in '" +
                      std::string(text_) + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_ws();
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("expected number");
    }
    pos_ += used;
    return v;
  }

  PowerLaw power_law_args() {
    expect('(');
    PowerLaw p;
    bool have_kind = false;
    bool have_exp = false;
    do {
      const std::string key = identifier();
      expect('=');
      if (key == "kind") {
        const std::string v = identifier();
        if (v == "K") {
          p.role = PowerRole::K;
        } else if (v == "N") {
          p.role = PowerRole::N;
        } else {
          fail("kind must be K or N");
        }
        have_kind = true;
      } else if (key == "exp") {
        p.exponent = number();
        have_exp = true;
      } else if (key == "scale") {
        p.scale = number();
      } else {
        fail("unknown powerlaw argument '" + key + "'");
      }
    } while (accept(','));
    expect(')');
    if (!have_kind || !have_exp) fail("powerlaw needs kind= and exp=");
    return p;
  }

  ExpSum exp_sum_args() {
    expect('(');
    expect('[');
    ExpSum e;
    if (!accept(']')) {
      do {
        expect('(');
        ExpTerm term;
        term.weight = number();
        expect(',');
        term.rate = number();
        expect(')');
        e.terms.push_back(term);
      } while (accept(','));
      expect(']');
    }
    expect(')');
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

MemoryKernel parse_kernel(std::string_view text) { return KernelParser(text).parse(); }

cplx laplace_transform(const MemoryKernel& kernel, cplx lambda) {
  if (lambda == cplx(0.0, 0.0)) throw DomainError("Laplace transform requested at lambda = 0");
  if (lambda.imag() == 0.0 && lambda.real() < 0.0) {
    throw DomainError("Laplace transform requested on the negative real axis (branch cut)");
  }
  cplx value = kernel.delta_weight();
  std::visit(
      [&](const auto& part) {
        using T = std::decay_t<decltype(part)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          const double power = part.role == PowerRole::K ? part.exponent - 1.0 : -part.exponent;
          value += part.scale * std::pow(lambda, power);
        } else if constexpr (std::is_same_v<T, ExpSum>) {
          for (const auto& term : part.terms) value += term.weight / (lambda + term.rate);
        }
      },
      kernel.singular_part());
  return value;
}

cplx j_factor(const MemoryKernel& n, cplx lambda) { return 1.0 + laplace_transform(n, lambda); }

cplx symbol_ratio(const MemoryKernel& k, const MemoryKernel& n, cplx lambda) {
  const cplx j = j_factor(n, lambda);
  if (std::abs(j) < kJFloor) throw JVanishingError(lambda);
  return lambda * laplace_transform(k, lambda) / j;
}

}  // namespace memheat
