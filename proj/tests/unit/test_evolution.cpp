#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "memheat/error.hpp"
#include "memheat/evolution.hpp"
#include "memheat/fractional.hpp"
#include "memheat/transforms.hpp"

using namespace memheat;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
const MemoryKernel kZero = MemoryKernel::zero();
const MemoryKernel kHeat = MemoryKernel::delta(1.0);
const MemoryKernel kHalf = MemoryKernel::power_law(0.5, PowerRole::K);

ModalSolver solver_for(const MemoryKernel& k, const MemoryKernel& n, std::size_t modes, double T, std::size_t steps) {
  return ModalSolver(k, n, EigenBasis(kPi, modes), UniformGrid::over(T, steps), contour_for(k, n));
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("tables start at the identity") {
    const ModalSolver s = solver_for(kHalf, kZero, 8, 1.0, 128);
    for (Eigen::Index c = 0; c < 8; ++c) {
      CHECK(s.evolution_table()(0, c) == 1.0);
      CHECK(s.forcing_first_integral()(0, c) == 0.0);
      CHECK(s.forcing_second_integral()(0, c) == 0.0);
    }
    CHECK(s.table_error() < 1e-6);
    CHECK(s.table_imag_residual() < 1e-8);
  }

  TEST_CASE("heat free evolution") {
    const ModalSolver s = solver_for(kHeat, kZero, 16, 1.0, 256);
    const SpectralField w0 = SpectralField::from_sequence(s.basis(), [](std::size_t n) { return 1.0 / double(n); });
    for (std::size_t k : {1, 64, 256}) {
      const SpectralField w = s.evolve_free(w0, k);
      const double t = s.grid().at(k);
      for (std::size_t n = 1; n <= 16; ++n) CHECK(std::abs(w.coeff(n) - std::exp(-double(n * n) * t) / double(n)) < 1e-10);
    }
    CHECK(s.evolve_free(w0, 0).coeffs() == w0.coeffs());
  }

  TEST_CASE("fractional free evolution against Mittag-Leffler") {
    const ModalSolver s = solver_for(kHalf, kZero, 4, 2.0, 256);
    const SpectralField w0 = SpectralField::unit(s.basis(), 1) + SpectralField::unit(s.basis(), 3);
    const SpectralField w = s.evolve_free(w0, 256);
    CHECK(w.coeff(1) == Approx(mittag_leffler(0.5, 1.0, -std::sqrt(2.0))).epsilon(1e-7));
    CHECK(w.coeff(3) == Approx(mittag_leffler(0.5, 1.0, -9.0 * std::sqrt(2.0))).epsilon(1e-7));
    CHECK(w.coeff(2) == 0.0);
    const SpectralField direct = evolve_free(w0, 2.0, kHalf, kZero, s.spec());
    CHECK((direct - w).l2_norm() < 1e-7);
  }

  TEST_CASE("Duhamel term for constant forcing") {
    const ModalSolver heat = solver_for(kHeat, kZero, 4, 1.0, 512);
    const ModalSolver frac = solver_for(kHalf, kZero, 4, 1.0, 512);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(513, 4);
    F.col(0).setConstant(1.0);
    F.col(2).setConstant(-3.0);
    const ControlSignal sig = ControlSignal::modal(heat.grid(), F);
    const SpectralField zero(heat.basis());
    const SpectralField wh = heat.solve_distributed(zero, sig, 512);
    CHECK(wh.coeff(1) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-8));
    CHECK(wh.coeff(3) == Approx(-3.0 * (1.0 - std::exp(-9.0)) / 9.0).epsilon(1e-8));
    CHECK(wh.coeff(2) == 0.0);
    // (1 - E_a(-mu^2 t^a)) / mu^2
    const SpectralField wf = frac.solve_distributed(zero, sig, 512);
    CHECK(wf.coeff(1) == Approx(1.0 - mittag_leffler(0.5, 1.0, -1.0)).epsilon(1e-7));
    CHECK(wf.coeff(3) == Approx(-3.0 * (1.0 - mittag_leffler(0.5, 1.0, -9.0)) / 9.0).epsilon(1e-7));
    CHECK(frac.forcing_first_integral()(512, 0) == Approx(1.0 - mittag_leffler(0.5, 1.0, -1.0)).epsilon(1e-7));
  }

  TEST_CASE("superposition of free and forced parts") {
    const ModalSolver s = solver_for(kHalf, MemoryKernel::power_law(0.5, PowerRole::N), 6, 1.0, 256);
    const SpectralField w0 = SpectralField::unit(s.basis(), 2);
    Eigen::MatrixXd F(257, 6);
    for (Eigen::Index i = 0; i < 257; ++i) F.row(i).setConstant(std::sin(3.0 * s.grid().at(std::size_t(i))));
    const ControlSignal sig = ControlSignal::modal(s.grid(), F);
    const SpectralField both = s.solve_distributed(w0, sig, 256);
    const SpectralField forced = s.solve_distributed(SpectralField(s.basis()), sig, 256);
    CHECK((both - forced - s.evolve_free(w0, 256)).l2_norm() < 1e-14);
    const SpectralField twice = s.solve_distributed(SpectralField(s.basis()), ControlSignal::modal(s.grid(), 2.0 * F), 256);
    CHECK((twice - 2.0 * forced).l2_norm() < 1e-13);
  }

  TEST_CASE("two-parameter Mittag-Leffler form of the forced mode") {
    const ModalSolver s = solver_for(kHalf, kZero, 2, 1.0, 512);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(513, 2);
    F.col(0).setConstant(2.0);
    const SpectralField w = s.solve_distributed(SpectralField(s.basis()), ControlSignal::modal(s.grid(), F), 512);
    CHECK(w.coeff(1) == Approx(2.0 * mittag_leffler(0.5, 1.5, -1.0)).epsilon(1e-7));
  }

  TEST_CASE("Laplace transform of the boundary response") {
    // f = t^2 e^{-t}: the mode transform is mu^2 g_n J f^ / (lambda K^ + mu^2 J).
    const MemoryKernel n = MemoryKernel::exp_sum({{1.0, 1.0}});
    const double T = 30.0;
    const ModalSolver s = solver_for(kHalf, n, 2, T, 3000);
    std::vector<double> f(s.grid().size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = s.grid().at(i) * s.grid().at(i) * std::exp(-s.grid().at(i));
    const auto traj = s.trajectory_boundary(SpectralField(s.basis()), ControlSignal::scalar(s.grid(), f), BoundarySide::Left);
    const Eigen::VectorXd g = green_lift_coeffs(s.basis(), BoundarySide::Left);
    for (double lambda : {1.0, 2.0}) {
      const cplx l(lambda, 0.0);
      const cplx kh = laplace_transform(kHalf, l);
      const cplx j = j_factor(n, l);
      for (std::size_t mode = 1; mode <= 2; ++mode) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
          const double h = traj[i + 1].t - traj[i].t;
          acc += 0.5 * h * (std::exp(-lambda * traj[i].t) * traj[i].state.coeff(mode) +
                            std::exp(-lambda * traj[i + 1].t) * traj[i + 1].state.coeff(mode));
        }
        const double mu2 = s.basis().mu2(mode);
        const cplx ex = mu2 * g(Eigen::Index(mode - 1)) * j * (2.0 / std::pow(l + 1.0, 3)) / (l * kh + mu2 * j);
        CHECK(acc == Approx(ex.real()).epsilon(1e-3));
      }
    }
  }

  TEST_CASE("boundary response is Cauchy under grid refinement") {
    const auto final_state = [](std::size_t steps) {
      const ModalSolver s = solver_for(kHalf, kZero, 16, 1.0, steps);
      std::vector<double> f(s.grid().size());
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(std::sin(kPi * s.grid().at(i)), 2);
      return s.solve_boundary(SpectralField(s.basis()), ControlSignal::scalar(s.grid(), f), BoundarySide::Right, steps);
    };
    const SpectralField a = final_state(128);
    const SpectralField b = final_state(256);
    const SpectralField c = final_state(512);
    CHECK((c - b).l2_norm() < (b - a).l2_norm());
    CHECK((c - b).l2_norm() < 1e-4 * c.l2_norm());
  }

  TEST_CASE("heat boundary control approaches the harmonic lift") {
    const ModalSolver s = solver_for(kHeat, kZero, 16, 1.0, 1024);
    const ControlSignal f = ControlSignal::scalar(s.grid(), std::vector<double>(1025, 1.0));
    for (auto side : {BoundarySide::Left, BoundarySide::Right}) {
      const SpectralField w = s.solve_boundary(SpectralField(s.basis()), f, side, 1024);
      const Eigen::VectorXd g = green_lift_coeffs(s.basis(), side);
      for (std::size_t n = 1; n <= 16; ++n) {
        CHECK(w.coeff(n) == Approx(g(Eigen::Index(n - 1)) * (1.0 - std::exp(-double(n * n)))).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("boundary memory enters through f + N * f") {
    // With N = e^{-t} and f = e^{-t}, g = f + N * f = (1 + t) e^{-t}.
    const MemoryKernel n = MemoryKernel::exp_sum({{1.0, 1.0}});
    const ModalSolver s = solver_for(kHeat, n, 2, 1.0, 512);
    std::vector<double> f(513);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-s.grid().at(i));
    const auto g = s.memory_transform(f);
    for (std::size_t i = 0; i < f.size(); i += 64) {
      const double t = s.grid().at(i);
      CHECK(g[i] == Approx((1.0 + t) * std::exp(-t)).epsilon(1e-6));
    }
  }

  TEST_CASE("trajectories and CSV output") {
    const ModalSolver s = solver_for(kHeat, kZero, 4, 1.0, 64);
    const SpectralField w0 = SpectralField::unit(s.basis(), 1);
    const auto traj = s.trajectory_free(w0, 16);
    REQUIRE(traj.size() == 5);
    CHECK(traj.front().t == 0.0);
    CHECK(traj.back().t == Approx(1.0));
    CHECK(traj.back().state.coeff(1) == Approx(std::exp(-1.0)).epsilon(1e-8));
    CHECK(s.trajectory_free(w0, 48).size() == 3);
    std::ostringstream a;
    write_trajectory_csv(a, traj);
    CHECK(a.str().rfind("t,n,coeff", 0) == 0);
    std::ostringstream b;
    write_snapshot_csv(b, traj, 9);
    CHECK(b.str().rfind("t,x,w", 0) == 0);
    std::size_t lines = 0;
    for (char c : b.str()) lines += c == '\n';
    CHECK(lines == 1 + 5 * 9);
  }

  TEST_CASE("argument checks") {
    const ModalSolver s = solver_for(kHeat, kZero, 4, 1.0, 64);
    const SpectralField other(EigenBasis(kPi, 5));
    CHECK_THROWS_AS(s.evolve_free(other, 1), DomainError);
    CHECK_THROWS_AS(s.evolve_free(SpectralField(s.basis()), 65), DomainError);
    const ControlSignal scalar = ControlSignal::scalar(s.grid(), std::vector<double>(65, 0.0));
    CHECK_THROWS_AS(s.solve_distributed(SpectralField(s.basis()), scalar, 64), DomainError);
    CHECK_THROWS_AS(ControlSignal::scalar(s.grid(), std::vector<double>(10, 0.0)), DomainError);
    CHECK(scalar.vanishes_at_ends());
    CHECK_THROWS_AS(scalar.modal_samples(), DomainError);
  }

  TEST_CASE("coarse grids are refused") {
    const ModalSolver s = solver_for(kHeat, kZero, 64, 1.0, 8);
    std::vector<double> f(9);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::cos(40.0 * s.grid().at(i));
    CHECK_THROWS_AS(s.solve_boundary(SpectralField(s.basis()), ControlSignal::scalar(s.grid(), f), BoundarySide::Left, 8),
                    NumericalError);
  }
}
