#include <doctest.h>

#include <cmath>
#include <numbers>

#include "memheat/admissibility.hpp"
#include "memheat/error.hpp"
#include "memheat/kernel.hpp"
#include "memheat/spectral.hpp"

using namespace memheat;
using doctest::Approx;

namespace {

const MemoryKernel kHalfK = MemoryKernel::power_law(0.5, PowerRole::K);
const MemoryKernel kHalfN = MemoryKernel::power_law(0.5, PowerRole::N);

// int_0^inf e^{-lambda t} k(t) dt for real lambda, split at t = 1 with u = t^2 near the origin.
double numeric_laplace(const MemoryKernel& k, double lambda) {
  const double head = integrate([&](double u) { return 2.0 * u * std::exp(-lambda * u * u) * k(u * u); }, 0.0, 1.0, 64);
  const double tail = integrate([&](double t) { return std::exp(-lambda * t) * k(t); }, 1.0, 60.0, 256);
  return head + tail;
}

}  // namespace

TEST_SUITE("kernel") {
  TEST_CASE("power law transforms on the principal branch") {
    CHECK(laplace_transform(kHalfK, {1.0, 0.0}).real() == Approx(1.0));
    CHECK(laplace_transform(kHalfK, {4.0, 0.0}).real() == Approx(0.5));
    CHECK(numeric_laplace(kHalfK, 4.0) == Approx(0.5).epsilon(1e-8));
    CHECK(laplace_transform(kHalfN, {4.0, 0.0}).real() == Approx(0.5));
    const cplx l(-1.0, 1.0);
    const cplx v = laplace_transform(kHalfK, l);
    CHECK(std::abs(v - std::pow(l, -0.5)) < 1e-15);
  }

  TEST_CASE("exponential sum transform and time consistency") {
    const MemoryKernel e = MemoryKernel::exp_sum({{2.0, 3.0}});
    CHECK(laplace_transform(e, {1.0, 0.0}).real() == Approx(0.5));
    const MemoryKernel e2 = MemoryKernel::exp_sum({{1.0, 0.5}, {0.25, 4.0}});
    for (double lambda : {1.0, 2.0, 5.0}) {
      CHECK(numeric_laplace(e2, lambda) == Approx(laplace_transform(e2, {lambda, 0.0}).real()).epsilon(1e-6));
    }
  }

  TEST_CASE("conjugate symmetry") {
    for (const auto& k : {kHalfK, kHalfN, MemoryKernel::exp_sum({{1.0, 2.0}}), MemoryKernel::delta(2.0)}) {
      for (cplx l : {cplx(1.0, 2.0), cplx(-0.5, 3.0), cplx(10.0, -1.0)}) {
        CHECK(std::abs(laplace_transform(k, std::conj(l)) - std::conj(laplace_transform(k, l))) < 1e-14);
      }
    }
  }

  TEST_CASE("transform domain errors") {
    CHECK_THROWS_AS(laplace_transform(kHalfK, {0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(laplace_transform(kHalfK, {-1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(MemoryKernel::power_law(1.0, PowerRole::K), DomainError);
    CHECK_THROWS_AS(MemoryKernel::power_law(0.0, PowerRole::N), DomainError);
    CHECK_THROWS_AS(MemoryKernel::exp_sum({{1.0, 0.0}}), DomainError);
    CHECK_THROWS_AS(MemoryKernel::delta(-1.0), DomainError);
  }

  TEST_CASE("symbol ratio") {
    CHECK(symbol_ratio(MemoryKernel::delta(1.0), MemoryKernel::zero(), {2.0, 0.0}) == cplx(2.0, 0.0));
    CHECK(symbol_ratio(kHalfK, MemoryKernel::zero(), {4.0, 0.0}).real() == Approx(2.0));
    const MemoryKernel nk = MemoryKernel::power_law(0.5, PowerRole::K);
    CHECK(symbol_ratio(kHalfK, nk, {1.0, 0.0}).real() == Approx(0.5));
  }

  TEST_CASE("J vanishing is its own error") {
    // 1 + a/(lambda + b) vanishes at lambda = -(a + b).
    const MemoryKernel n = MemoryKernel::exp_sum({{1.0, 1.0}});
    CHECK_THROWS_AS(symbol_ratio(MemoryKernel::delta(1.0), n, {-2.0, 1e-300}), JVanishingError);
  }

  TEST_CASE("grammar round trip") {
    for (const char* text : {"zero", "delta(1)", "delta(2.5) + powerlaw(kind=K, exp=0.3)",
                             "powerlaw(kind=N, exp=0.7, scale=2)", "expsum([(1,2),(0.5,3)])",
                             "delta(1) + expsum([(1,1)])"}) {
      const MemoryKernel k = parse_kernel(text);
      CHECK(parse_kernel(k.to_string()) == k);
    }
    const MemoryKernel k = parse_kernel("delta(1) + powerlaw(kind=K, exp=0.5)");
    CHECK(k.delta_weight() == 1.0);
    CHECK(std::get<PowerLaw>(k.singular_part()).exponent == 0.5);
    CHECK_THROWS_AS(parse_kernel("delta(1) + delta(2)"), DomainError);
    CHECK_THROWS_AS(parse_kernel("powerlaw(kind=X, exp=0.5)"), DomainError);
    CHECK_THROWS_AS(parse_kernel("powerlaw(kind=K, exp=1.5)"), DomainError);
    CHECK_THROWS_AS(parse_kernel("gauss(1)"), DomainError);
  }

  TEST_CASE("time evaluation matches the normalization") {
    CHECK(kHalfK(4.0) == Approx(0.5 / std::sqrt(std::numbers::pi)));
    CHECK(kHalfN(4.0) == Approx(0.5 / std::sqrt(std::numbers::pi)));
    const MemoryKernel g = MemoryKernel::power_law(0.3, PowerRole::N, 2.0);
    CHECK(g(2.0) == Approx(2.0 * std::pow(2.0, -0.7) / std::tgamma(0.3)));
    CHECK_THROWS_AS(kHalfK(0.0), DomainError);
  }
}

TEST_SUITE("admissibility") {
  TEST_CASE("heat pair passes every item") {
    const auto r = verify_assumptions(MemoryKernel::delta(1.0), MemoryKernel::zero(), kDefaultThetaA);
    CHECK(r.admissible);
    CHECK(r.j_nonvanishing);
    CHECK(r.asymptotics.all());
    CHECK(r.theta_max == Approx(SectorGrid{}.theta_cap));
    CHECK(r.failures.empty());
  }

  TEST_CASE("power-law pair respects the closed-form sector bound") {
    for (auto [a, g] : {std::pair{0.5, 0.5}, {0.9, 0.9}, {0.7, 0.3}, {0.95, 0.95}}) {
      CAPTURE(a);
      CAPTURE(g);
      const auto r = verify_assumptions(MemoryKernel::power_law(a, PowerRole::K), MemoryKernel::power_law(g, PowerRole::N),
                                        kDefaultThetaA);
      const double bound = *max_sector_angle_case3(a, g);
      CHECK(r.admissible);
      CHECK(r.theta_max <= bound + 1e-3);
      CHECK(std::abs(r.theta_max - bound) / bound < 0.05);
    }
    const auto r = verify_assumptions(MemoryKernel::power_law(0.95, PowerRole::K),
                                      MemoryKernel::power_law(0.95, PowerRole::N), kDefaultThetaA);
    CHECK(r.theta_max <= std::numbers::pi / 2 * 0.1 / 1.9 + 1e-3);
  }

  TEST_CASE("closed-form sector angle") {
    CHECK(*max_sector_angle_case3(0.5, 0.5) == Approx(std::numbers::pi / 2));
    CHECK(*max_sector_angle_case3(0.9, 0.9) == Approx(0.2 / 1.8 * std::numbers::pi / 2));
    CHECK(*max_sector_angle_case3(1e-6, 0.5) == Approx(std::numbers::pi / 2));
    CHECK_THROWS_AS(max_sector_angle_case3(1.0, 0.5), DomainError);
  }

  TEST_CASE("exponential-sum-only K fails the growth item") {
    const auto r = verify_assumptions(MemoryKernel::exp_sum({{1.0, 1.0}}), MemoryKernel::zero(), kDefaultThetaA);
    CHECK_FALSE(r.admissible);
    CHECK(r.theta_max == 0.0);
    CHECK_FALSE(r.asymptotics.k_growth);
    CHECK_FALSE(r.failures.empty());
  }

  TEST_CASE("every sample of an admissible pair maps inside the target sector") {
    const MemoryKernel k = MemoryKernel::power_law(0.6, PowerRole::K);
    const MemoryKernel n = MemoryKernel::exp_sum({{1.0, 2.0}});
    const auto r = verify_assumptions(k, n, kDefaultThetaA);
    REQUIRE(r.admissible);
    const double half = r.theta_max + std::numbers::pi / 2;
    for (int i = 0; i <= 20; ++i) {
      for (double m : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
        const cplx l = std::polar(m, -half + 2 * half * i / 20.0);
        CHECK(std::abs(std::arg(symbol_ratio(k, n, l))) < kDefaultThetaA + std::numbers::pi / 2);
      }
    }
  }

  TEST_CASE("bad arguments") {
    CHECK_THROWS_AS(verify_assumptions(MemoryKernel::delta(1.0), MemoryKernel::zero(), 2.0), DomainError);
    SectorGrid g;
    g.moduli_per_ray = 2;
    CHECK_THROWS_AS(verify_assumptions(MemoryKernel::delta(1.0), MemoryKernel::zero(), 1.0, g), DomainError);
  }
}
