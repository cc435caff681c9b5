#include <doctest.h>

#include <cmath>
#include <numbers>

#include "memheat/controllability.hpp"
#include "memheat/error.hpp"
#include "memheat/scenario.hpp"
#include "memheat/transforms.hpp"

using namespace memheat;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
const MemoryKernel kZero = MemoryKernel::zero();
const MemoryKernel kHeat = MemoryKernel::delta(1.0);
const MemoryKernel kHalf = MemoryKernel::power_law(0.5, PowerRole::K);
const ControlGeometry kMiddle = ControlGeometry::distributed(kPi / 4, 3 * kPi / 4);

ModalSolver solver_for(const MemoryKernel& k, std::size_t modes, double T) {
  return ModalSolver(k, kZero, EigenBasis(kPi, modes), UniformGrid::over(T, std::size_t(512 * T)), contour_for(k, kZero));
}

}  // namespace

TEST_SUITE("controllability") {
  TEST_CASE("atoms vanish at the ends") {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(ControlBasis::time_atom(j, 0.0, 2.0) == 0.0);
      CHECK(ControlBasis::time_atom(j, 2.0, 2.0) == 0.0);
      CHECK(ControlBasis::space_atom(j, 0.5, 0.5, 1.5) == 0.0);
      CHECK(ControlBasis::space_atom(j, 1.5, 0.5, 1.5) == 0.0);
      CHECK(ControlBasis::space_atom(j, 0.2, 0.5, 1.5) == 0.0);
    }
    CHECK(std::abs(ControlBasis::time_atom(0, 1.0, 2.0)) > 0.1);
    CHECK(ControlBasis{ControlKind::Distributed, 3, 4}.size() == 12);
    CHECK(ControlBasis{ControlKind::Boundary, 3, 4}.size() == 3);
  }

  TEST_CASE("nested bases give nested forward maps") {
    const ModalSolver s = solver_for(kHalf, 16, 0.5);
    const Eigen::MatrixXd small = forward_map(s, {ControlKind::Distributed, 2, 2}, kMiddle);
    const Eigen::MatrixXd large = forward_map(s, {ControlKind::Distributed, 4, 2}, kMiddle);
    REQUIRE(small.cols() == 4);
    REQUIRE(large.cols() == 8);
    CHECK((large.leftCols(4) - small).norm() < 1e-12 * small.norm());
  }

  TEST_CASE("forward map columns are solver states") {
    const ModalSolver s = solver_for(kHalf, 8, 0.5);
    const ControlBasis basis{ControlKind::Distributed, 2, 2};
    const Eigen::MatrixXd M = forward_map(s, basis, kMiddle);
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const Eigen::VectorXd c = Eigen::VectorXd::Unit(M.cols(), j);
      const ControlSignal u = realize_control(c, s, basis, kMiddle);
      CHECK(u.vanishes_at_ends());
      const SpectralField w = s.solve_distributed(SpectralField(s.basis()), u, s.grid().steps);
      CHECK((w.coeffs() - M.col(j)).norm() < 1e-10 * M.col(j).norm());
    }
    const ModalSolver b = solver_for(kHeat, 8, 0.5);
    const Eigen::MatrixXd Mb = forward_map(b, {ControlKind::Boundary, 3, 1}, ControlGeometry::boundary(BoundarySide::Left));
    CHECK(Mb.cols() == 3);
    CHECK(Mb.norm() > 0.0);
  }

  TEST_CASE("least squares") {
    Eigen::MatrixXd M(3, 2);
    M << 1, 0, 0, 2, 1, 1;
    const Eigen::VectorXd x(Eigen::Vector2d(0.5, -1.0));
    const SynthesisResult exact = least_squares(M, M * x, 0.0);
    CHECK((exact.coefficients - x).norm() < 1e-12);
    CHECK(exact.residual < 1e-12);
    CHECK(exact.rho == 0.0);
    const SynthesisResult def = least_squares(M, M * x);
    CHECK(def.rho == Approx(1e-10 * M.squaredNorm()).epsilon(1e-6));
    CHECK(def.residual < 1e-8);
    Eigen::MatrixXd bad(3, 2);
    bad << 1, 1, 1, 1, 1, 1 + 1e-14;
    CHECK_THROWS_AS(least_squares(bad, Eigen::Vector3d(1, 2, 3), 0.0), DomainError);
    CHECK_NOTHROW(least_squares(bad, Eigen::Vector3d(1, 2, 3)));
    CHECK_THROWS_AS(least_squares(M, Eigen::Vector2d(1, 2)), DomainError);
  }

  TEST_CASE("reachable targets are recovered") {
    const ModalSolver s = solver_for(kHalf, 16, 0.5);
    const ControlBasis basis{ControlKind::Distributed, 2, 2};
    const Eigen::MatrixXd M = forward_map(s, basis, kMiddle);
    const Eigen::VectorXd c(Eigen::Vector4d(1.0, -0.5, 0.25, 2.0));
    const SpectralField target(s.basis(), M * c);
    const SynthesisResult r = synthesize_control(target, s, basis, kMiddle, 0.0);
    CHECK(r.gram_condition < 1e12);
    CHECK((r.coefficients - c).norm() < 1e-6 * c.norm());
    CHECK(r.residual < 1e-8 * target.l2_norm());
    CHECK(r.control_norm > 0.0);
  }

  TEST_CASE("residuals fall as time atoms are added") {
    const ModalSolver s = solver_for(kHeat, 32, 1.0);
    const SpectralField target = SpectralField::unit(s.basis(), 1);
    double previous = target.l2_norm();
    for (std::size_t m : {1, 2, 4}) {
      const SynthesisResult r = synthesize_control(target, s, {ControlKind::Distributed, m, 2}, kMiddle);
      CHECK(r.residual <= previous);
      previous = r.residual;
    }
  }

  TEST_CASE("heat target on the whole interval") {
    const ModalSolver s = solver_for(kHeat, 32, 1.0);
    const auto whole = ControlGeometry::distributed(0.0, kPi);
    const SynthesisResult r = synthesize_control(SpectralField::unit(s.basis(), 1), s, {ControlKind::Distributed, 8, 4}, whole);
    CHECK(r.residual < 1e-3);
  }

  TEST_CASE("scaling equivariance") {
    const ModalSolver s = solver_for(kHalf, 16, 0.5);
    const ControlBasis basis{ControlKind::Distributed, 2, 2};
    const SpectralField target = SpectralField::unit(s.basis(), 1);
    const SynthesisResult a = synthesize_control(target, s, basis, kMiddle, 0.0);
    const SynthesisResult b = synthesize_control(3.0 * target, s, basis, kMiddle, 0.0);
    CHECK(b.residual == Approx(3.0 * a.residual).epsilon(1e-8));
    CHECK((b.coefficients - 3.0 * a.coefficients).norm() < 1e-8 * b.coefficients.norm());
  }

  TEST_CASE("smooth initial states are outside the test") {
    const ModalSolver s = solver_for(kHalf, 32, 0.5);
    SpectralField w0(s.basis());
    for (std::size_t n = 1; n <= 8; ++n) w0.coeffs()(Eigen::Index(n - 1)) = 1.0 / double(n);
    const std::vector<std::size_t> m{2, 4};
    const NullControlReport r = null_control_certificate(w0, s, kMiddle, m);
    CHECK(r.initial_dom_a.member);
    CHECK_FALSE(r.applicable);
    CHECK_FALSE(r.obstructed);
  }

  TEST_CASE("obstruction ratio") {
    const auto& fx = scenario::oracle_fixtures()["obstruction_ratio_half"];
    std::vector<double> mu2;
    for (const auto& p : fx) mu2.push_back(p["mu2"]);
    const ObstructionReport r = obstruction_ratio(kHalf, kZero, fx[0]["T"].get<double>(), mu2, contour_for(kHalf, kZero));
    CHECK(r.obstructed);
    CHECK(r.psi_T == Approx(1.0 / std::sqrt(kPi)).epsilon(1e-8));
    REQUIRE(r.ratio.size() == fx.size());
    for (std::size_t i = 0; i < fx.size(); ++i) CHECK(r.ratio[i] == Approx(fx[i]["ratio"].get<double>()).epsilon(1e-6));
    CHECK(std::abs(r.ratio.back() - 1.0) < 0.05);

    const ObstructionReport heat = obstruction_ratio(kHeat, kZero, 0.5, mu2, contour_for(kHeat, kZero));
    CHECK_FALSE(heat.obstructed);
    CHECK(std::abs(heat.psi_T) < 1e-8);

    const MemoryKernel n = MemoryKernel::exp_sum({{1.0, 1.0}});
    const MemoryKernel kr = MemoryKernel::reducible_partner(2.0, n);
    CHECK_FALSE(obstruction_ratio(kr, n, 0.5, mu2, contour_for(kr, n)).obstructed);
  }

  TEST_CASE("null-control certificate") {
    const std::vector<std::size_t> m{2, 4, 8};
    const auto w0_of = [](const EigenBasis& b) {
      return SpectralField::from_sequence(b, [](std::size_t n) { return 1.0 / double(n); });
    };
    const ModalSolver frac = solver_for(kHalf, 64, 0.5);
    const NullControlReport f = null_control_certificate(w0_of(frac.basis()), frac, kMiddle, m);
    CHECK(f.applicable);
    CHECK_FALSE(f.initial_dom_a.member);
    CHECK_FALSE(f.free_dom_a2.member);
    CHECK(f.residual_floor);
    CHECK(f.obstructed);
    CHECK(f.tail_ratio == Approx(1.0).epsilon(0.05));
    REQUIRE(f.residuals.size() == 3);

    const ModalSolver heat = solver_for(kHeat, 64, 0.5);
    const NullControlReport h = null_control_certificate(w0_of(heat.basis()), heat, kMiddle, m);
    CHECK(h.free_dom_a2.member);
    CHECK_FALSE(h.obstructed);
    CHECK(h.residuals.back() < h.residuals.front());
    CHECK(f.residuals.back() > 10.0 * h.residuals.back());
  }

  TEST_CASE("reducibility") {
    const auto samples = sector_samples(1.0, 32);
    CHECK(samples.size() == 32);
    for (cplx l : samples) CHECK(std::abs(std::arg(l)) < 1.0 + kPi / 2);
    const MemoryKernel n = MemoryKernel::exp_sum({{1.0, 1.0}});
    const auto c = reducibility_test(MemoryKernel::reducible_partner(2.0, n), n, samples);
    REQUIRE(c.has_value());
    CHECK(*c == Approx(2.0));
    for (double k : {0.5, 1.0, 2.0, 3.0}) {
      for (const auto& m : {n, MemoryKernel::exp_sum({{1.0, 2.0}}), MemoryKernel::exp_sum({{0.5, 1.0}, {2.0, 5.0}})}) {
        const auto got = reducibility_test(MemoryKernel::reducible_partner(k, m), m, samples);
        REQUIRE(got.has_value());
        CHECK(*got == Approx(k).epsilon(1e-10));
      }
    }
    CHECK(reducibility_test(kHeat, kZero, samples) == std::optional<double>(1.0));
    CHECK_FALSE(reducibility_test(kHalf, kZero, samples).has_value());
    CHECK_FALSE(reducibility_test(kHeat, n, samples).has_value());
  }
}
