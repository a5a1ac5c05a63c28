#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/slicing.hpp"

using namespace bdgraphtv;

TEST_CASE("slice spec and section") {
  const Domain d = Domain::unit_box(2);
  const DisplacementField u = DisplacementField::linear(Eigen::MatrixXd::Identity(2, 2));
  const Slice s = slice_field(u, d, SliceSpec(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 0.5)));
  CHECK(s.section().lo == 0.0);
  CHECK(s.section().hi == 1.0);
  CHECK(s(0.3) == Eigen::Vector2d(0.3, 0.5));
  const Slice twice = slice_field(u, d, SliceSpec(Eigen::Vector2d(2.0, 0.0), Eigen::Vector2d(0.0, 0.5)));
  CHECK(twice.section().hi == 0.5);
  CHECK(slice_field(u, d, SliceSpec(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 2.0))).empty());
  CHECK_THROWS_AS(SliceSpec(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.5, 0.5)), ArgumentError);
  CHECK_THROWS_AS(SliceSpec(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.0, 0.5)), ArgumentError);
}

TEST_CASE("slice energy examples") {
  const double eps = 0.1;
  auto tr = [](double t, std::span<double> o) { o[0] = t; };
  auto one = [](double) { return 1.0; };
  for (double a : {-2.0, 0.5, 3.0}) {
    auto v = [a](double t, std::span<double> o) { o[0] = a * t; };
    const SliceEnergy e = slice_energy_1d(v, tr, one, Interval{0.0, 1.0 - eps}, eps, 1);
    CHECK(e.value == doctest::Approx(0.9 * std::abs(a)).epsilon(1e-6));
    CHECK(e.nodes >= 1000);
  }
  auto cst = [](double, std::span<double> o) { o[0] = 4.0; };
  CHECK(slice_energy_1d(cst, tr, one, Interval{0.0, 0.9}, eps, 1).value == 0.0);
  auto step = [](double t, std::span<double> o) { o[0] = t >= 0.5 ? 1.0 : 0.0; };
  // midpoint error is at most one node width relative to the window
  const SliceEnergy coarse = slice_energy_1d(step, tr, one, Interval{0.0, 0.9}, eps, 1);
  CHECK(std::abs(coarse.value - 1.0) <= (0.9 / coarse.nodes) / eps);
  const SliceEnergy fine = slice_energy_1d(step, tr, one, Interval{0.0, 0.9}, eps, 1, 1'000'000);
  CHECK(std::abs(fine.value - 1.0) <= 1e-5);
  const SliceEnergy short_ = slice_energy_1d(step, tr, one, Interval{0.0, 0.05}, eps, 1);
  CHECK(short_.degenerate);
  CHECK_THROWS_AS((void)slice_energy_1d(step, tr, one, Interval{0.0, 0.9}, 0.0, 1), ArgumentError);
}

TEST_CASE("slice energy along field lines") {
  const Domain d = Domain::unit_box(2);
  const Density rho = Density::uniform(d);
  const DisplacementField j = DisplacementField::planar_jump(2, 0, 0.5, Eigen::Vector2d(1.0, 0.0));
  const SliceEnergy across =
      slice_energy_identity(j, d, rho, SliceSpec(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 0.3)), 0.1);
  CHECK(std::abs(across.value - 1.0) <= (0.9 / across.nodes) / 0.1);
  // lines parallel to the jump surface never see it
  const SliceEnergy along =
      slice_energy_identity(j, d, rho, SliceSpec(Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(0.3, 0.0)), 0.1);
  CHECK(along.value == 0.0);
  Eigen::MatrixXd W(2, 2);
  W << 0.0, 1.0, -1.0, 0.0;
  const DisplacementField rig = DisplacementField::rigid(Eigen::Vector2d(0.0, 0.0), W);
  CHECK(slice_energy_identity(rig, d, rho, SliceSpec(Eigen::Vector2d(0.6, 0.8), Eigen::Vector2d(0.4, -0.3)), 0.1)
            .value <= 1e-15);
}

TEST_CASE("slicing identity on small budgets") {
  const Domain d = Domain::unit_box(2);
  const Density rho = Density::uniform(d);
  const Kernel k = Kernel::indicator(1.0, 1.0, 2);
  const SlicingReport zero = verify_slicing_identity(
      DisplacementField::linear(Eigen::MatrixXd::Zero(2, 2)), d, rho, k, 0.1, 1000, 1);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  CHECK(zero.rel_err == 0.0);
  const SlicingReport lin = verify_slicing_identity(
      DisplacementField::linear(Eigen::MatrixXd::Identity(2, 2)), d, rho, k, 0.05, 50000, 3);
  CHECK(std::abs(lin.lhs - lin.rhs) <= 4.0 * std::hypot(lin.lhs_se, lin.rhs_se));
  Eigen::MatrixXd W(2, 2);
  W << 0.0, 1.0, -1.0, 0.0;
  const SlicingReport rig = verify_slicing_identity(
      DisplacementField::rigid(Eigen::Vector2d(1.0, 0.0), W), d, rho, k, 0.1, 2000, 2);
  CHECK(std::abs(rig.lhs) <= 1e-12);
  CHECK(std::abs(rig.rhs) <= 1e-12);
}

TEST_CASE("liminf probes") {
  const std::vector<double> xi{1.0};
  const auto schedule = default_liminf_schedule(8, 14);
  CHECK(schedule.front().first == 256);
  CHECK(schedule.back().second == doctest::Approx(std::sqrt(std::log(16384.0) / 16384.0)));

  const SliceFn lin = [](double t, std::span<double> o) { o[0] = t; };
  const auto wiggle = [](std::size_t n) -> SliceFn {
    return [n](double t, std::span<double> o) {
      o[0] = t + std::sin(2.0 * std::numbers::pi * n * t) / static_cast<double>(n);
    };
  };
  const LiminfProbeReport a = liminf_probe_1d(wiggle, lin, xi, Interval{0.0, 1.0}, schedule);
  CHECK(a.bound == doctest::Approx(1.0));
  CHECK(a.pass);
  CHECK(a.tail_min >= 0.95);

  const SliceFn step = [](double t, std::span<double> o) { o[0] = t >= 0.5 ? 1.0 : 0.0; };
  const auto same = [&](std::size_t) { return step; };
  const LiminfProbeReport b = liminf_probe_1d(same, step, xi, Interval{0.0, 1.0}, schedule);
  CHECK(b.pass);
  CHECK(b.tail_min >= 0.95);

  const SliceFn c = [](double, std::span<double> o) { o[0] = 2.0; };
  const auto cn = [](std::size_t n) -> SliceFn {
    return [n](double t, std::span<double> o) { o[0] = 2.0 + t / static_cast<double>(n); };
  };
  const LiminfProbeReport z = liminf_probe_1d(cn, c, xi, Interval{0.0, 1.0}, schedule);
  CHECK(z.bound == 0.0);
  CHECK(z.pass);
}
