#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/kernels.hpp"

using namespace bdgraphtv;

namespace {
const double pi = std::numbers::pi;

std::span<const double> sp(const std::vector<double>& v) { return {v.data(), v.size()}; }

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}
}  // namespace

TEST_CASE("sym matrix keeps the symmetric part exactly") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 0.3, 4.0;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(1.15));
  const std::vector<double> a{1.0, 2.0}, b{3.0, -1.0};
  const SymMatrix p = SymMatrix::sym_product(sp(a), sp(b));
  CHECK(p(0, 0) == 3.0);
  CHECK(p(0, 1) == p(1, 0));
  CHECK(p(0, 1) == doctest::Approx(2.5));
  CHECK(SymMatrix::identity(3).spectral_norm() == doctest::Approx(1.0));
}

TEST_CASE("rescale evaluates eps^-d profile(|x|/eps)") {
  const Kernel k1 = Kernel::indicator(1.0, 1.0, 1);
  const RescaledKernel r = rescale(k1, 0.5);
  CHECK(r(sp({0.25})) == 2.0);
  CHECK(r(sp({0.5})) == 0.0);

  const Kernel k2 = Kernel::indicator(1.0, 1.0, 2);
  CHECK(rescale(k2, 0.1)(sp({0.2, 0.0})) == 0.0);
  const RescaledKernel id = rescale(k2, 1.0);
  for (double x : {0.0, 0.3, 0.99, 1.0, 2.0}) CHECK(id(sp({x, 0.0})) == k2(sp({x, 0.0})));

  CHECK_THROWS_AS((void)rescale(k2, 0.0), ArgumentError);
  CHECK_THROWS_AS((void)rescale(k2, -1.0), ArgumentError);
}

TEST_CASE("rescaled kernel preserves mass") {
  const Kernel k = Kernel::piecewise_constant({{0.5, 2.0}, {1.0, 1.0}}, 2);
  const double mass = pi * (0.25 * 2.0 + 0.75 * 1.0);
  for (double eps : {1.0, 0.3, 0.05}) {
    const RescaledKernel r = rescale(k, eps);
    // polar midpoint sum of r.at_distance over the support
    const int n = 200000;
    const double h = eps / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = (i + 0.5) * h;
      s += r.at_distance(t) * 2.0 * pi * t * h;
    }
    CHECK(s == doctest::Approx(mass).epsilon(1e-4));
  }
}

TEST_CASE("kernel construction validates the profile") {
  CHECK_THROWS_AS((void)Kernel::indicator(0.0, 1.0, 2), ArgumentError);
  CHECK_THROWS_AS((void)Kernel::indicator(1.0, -1.0, 2), ArgumentError);
  CHECK_THROWS_AS((void)Kernel::piecewise_constant({{0.5, 1.0}, {1.0, 2.0}}, 2), ArgumentError);
  CHECK_THROWS_AS((void)Kernel::custom([](double t) { return t < 0.5 ? 1.0 : 2.0; }, 1.0, 2),
                  ArgumentError);
  CHECK_THROWS_AS((void)Kernel::custom([](double t) { return 1.0 / (1.0 + t * t); },
                                       std::numeric_limits<double>::infinity(), 2),
                  InfeasibleIntegralError);
}

TEST_CASE("second moments") {
  CHECK(second_moment(Kernel::indicator(1.0, 1.0, 1)).value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(second_moment(Kernel::indicator(1.0, 1.0, 2)).value == doctest::Approx(pi / 2).epsilon(1e-12));
  const double m1 = second_moment(Kernel::indicator(1.0, 1.0, 2)).value;
  const double m2 = second_moment(Kernel::indicator(2.0, 1.0, 2)).value;
  CHECK(m2 == doctest::Approx(2.0 * m1).epsilon(1e-14));
}

TEST_CASE("gaussian kernel is truncated where the moment tail is negligible") {
  const Kernel g = Kernel::custom([](double t) { return std::exp(-t * t); },
                                  std::numeric_limits<double>::infinity(), 2);
  REQUIRE(g.truncation_radius().has_value());
  CHECK(*g.truncation_radius() > 3.0);
  CHECK(*g.truncation_radius() < 10.0);
  // ∫ e^{-|x|²}|x|² dx = π in d = 2
  CHECK(g.moment().value == doctest::Approx(pi).epsilon(1e-6));
}

TEST_CASE("phi_eta examples") {
  const Kernel k1 = Kernel::indicator(1.0, 1.0, 1);
  for (double a : {-2.5, 0.7, 3.0}) {
    Eigen::MatrixXd A(1, 1);
    A << a;
    CHECK(phi_eta(k1, SymMatrix(A)).value == doctest::Approx(2.0 * std::abs(a) / 3.0).epsilon(1e-12));
  }
  const Kernel k2 = Kernel::indicator(1.0, 1.0, 2);
  CHECK(phi_eta(k2, SymMatrix::zero(2)).value == 0.0);
  CHECK(std::abs(phi_eta(k2, SymMatrix::identity(2)).value - pi / 2) <= 1e-4);
  const Kernel k3 = Kernel::indicator(1.0, 1.0, 3);
  // ∫_{|ξ|<1} |ξ|² dξ = 4π/5 in d = 3
  CHECK(std::abs(phi_eta(k3, SymMatrix::identity(3)).value - 4.0 * pi / 5.0) <= 1e-4);
}

TEST_CASE("phi_eta invariants with shared nodes") {
  std::mt19937_64 rng(11);
  const Kernel small = Kernel::indicator(1.0, 1.0, 2);
  const Kernel large = Kernel::piecewise_constant({{1.0, 2.0}, {1.5, 0.5}}, 2);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd M = random_matrix(rng, 2);
    const SymMatrix S(M);
    const double base = phi_eta(small, S).value;
    for (double t : {-3.0, 0.5, 7.0})
      CHECK(phi_eta(small, S.scaled(t)).value == doctest::Approx(std::abs(t) * base).epsilon(1e-10));
    CHECK(phi_eta(small, SymMatrix(M.transpose())).value == base);
    CHECK(phi_eta(small, S).value <= phi_eta(large, S).value);
    const Eigen::MatrixXd W = M - M.transpose();
    CHECK(phi_eta(small, SymMatrix(W)).value == 0.0);
    CHECK(phi_eta_polar(small, S, MatrixNorm::Frobenius) ==
          doctest::Approx(phi_eta_polar(small, S, MatrixNorm::Spectral)).epsilon(1e-10));
  }
}

TEST_CASE("phi_eta rotation invariance within Monte Carlo tolerance") {
  QuadratureSpec mc;
  mc.method = QuadratureSpec::Method::MonteCarlo;
  mc.mc_nodes = 400000;
  const Kernel k = Kernel::indicator(1.0, 1.0, 2);
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.3, 0.3, -0.5;
  const double th = 0.7;
  Eigen::MatrixXd R(2, 2);
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const QuadratureResult a = phi_eta(k, SymMatrix(A), mc);
  const QuadratureResult b = phi_eta(k, SymMatrix(R.transpose() * A * R), mc);
  CHECK(std::abs(a.value - b.value) <= 4.0 * std::hypot(a.error_estimate, b.error_estimate));
}
