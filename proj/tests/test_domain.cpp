#include <doctest.h>

#include <cmath>
#include <numeric>

#include <gsl/gsl_cdf.h>

#include "bdgraphtv/domain.hpp"
#include "bdgraphtv/errors.hpp"

using namespace bdgraphtv;

TEST_CASE("box and ball geometry") {
  const Domain b = Domain::box({0.0, -1.0}, {2.0, 1.0});
  CHECK(b.volume() == 4.0);
  CHECK(b.diameter() == doctest::Approx(std::sqrt(8.0)));
  const std::vector<double> in{1.0, 0.0}, edge{0.0, 0.0};
  CHECK(b.contains(in));
  CHECK_FALSE(b.contains(edge));
  const Domain s = b.shrunk(0.25);
  CHECK(s.lo()[0] == 0.25);
  CHECK(s.hi()[1] == 0.75);
  CHECK_THROWS((void)b.shrunk(1.0));

  const Domain ball = Domain::ball({0.0, 0.0}, 2.0);
  CHECK(ball.volume() == doctest::Approx(4.0 * std::numbers::pi));
  const std::vector<double> y{0.0, 1.0}, xi{1.0, 0.0};
  const Interval I = ball.line_section(y, xi);
  CHECK(I.lo == doctest::Approx(-std::sqrt(3.0)));
  CHECK(I.hi == doctest::Approx(std::sqrt(3.0)));
  const std::vector<double> far{0.0, 3.0};
  CHECK(ball.line_section(far, xi).empty());
}

TEST_CASE("volume integration") {
  const Domain d = Domain::unit_box(2);
  const QuadratureResult r = integrate(d, [](std::span<const double> x) { return x[0] * x[1]; });
  CHECK(r.value == doctest::Approx(0.25).epsilon(1e-14));
  const QuadratureResult b =
      integrate(Domain::ball({0.0, 0.0, 0.0}, 1.0), [](std::span<const double>) { return 1.0; });
  CHECK(b.value == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-12));
}

TEST_CASE("density bounds are enforced at construction") {
  const Domain d = Domain::unit_box(1);
  CHECK_THROWS_AS(Density(d, [](std::span<const double> x) { return 0.5 + x[0]; }, 0.6, 2.0,
                          Density::Normalization::Raw),
                  DensityError);
  CHECK_THROWS_AS(Density(d, [](std::span<const double>) { return 1.0; }, 0.0, 2.0), DensityError);
  const Density affine(d, [](std::span<const double> x) { return 1.0 + x[0]; }, 1.0, 2.0);
  CHECK(affine.normalization() == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> one{1.0 - 1e-12};
  CHECK(affine(one) == doctest::Approx(2.0 / 1.5));
  const Density u = Density::uniform(Domain::box({0.0, 0.0}, {2.0, 1.0}));
  const std::vector<double> mid{1.0, 0.5};
  CHECK(u(mid) == 0.5);
}

TEST_CASE("sampling is deterministic and lands in the domain") {
  const Domain d = Domain::unit_box(2);
  const Density rho = Density::uniform(d);
  const EmpiricalMeasure a = sample(d, rho, 4, 7), b = sample(d, rho, 4, 7), c = sample(d, rho, 4, 8);
  CHECK(a.size() == 4);
  CHECK(a.points() == b.points());
  CHECK(a.points() != c.points());
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(d.contains(a.point(i)));
  const EmpiricalMeasure one = sample(d, rho, 1, 3);
  CHECK(one.size() == 1);
  CHECK(one.weight() == 1.0);
}

TEST_CASE("uniform sample mean obeys the CLT bound") {
  const Domain d = Domain::unit_box(1);
  const Eigen::Index n = 100000;
  const EmpiricalMeasure m = sample(d, Density::uniform(d), n, 2024);
  const double mean = m.points().row(0).mean();
  CHECK(std::abs(mean - 0.5) <= 3.0 / std::sqrt(12.0) / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("uniform sample passes a 10x10 chi-square histogram test") {
  const Domain d = Domain::unit_box(2);
  const Eigen::Index n = 100000;
  const EmpiricalMeasure m = sample(d, Density::uniform(d), n, 31337);
  std::vector<double> counts(100, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = std::min(9, static_cast<int>(m.points()(0, i) * 10));
    const int b = std::min(9, static_cast<int>(m.points()(1, i) * 10));
    counts[a * 10 + b] += 1.0;
  }
  const double expected = n / 100.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(gsl_cdf_chisq_Q(chi2, 99.0) > 0.001);
}

TEST_CASE("non-uniform sampling follows the density") {
  const Domain d = Domain::unit_box(1);
  const Density rho(d, [](std::span<const double> x) { return 1.0 + x[0]; }, 1.0, 2.0);
  const EmpiricalMeasure m = sample(d, rho, 200000, 5);
  // E[x] = ∫ x(1+x)/1.5 = 5/9
  CHECK(m.points().row(0).mean() == doctest::Approx(5.0 / 9.0).epsilon(5e-3));
}

TEST_CASE("rejection sampling refuses pathological envelopes") {
  const Domain d = Domain::unit_box(1);
  const Density spike(d, [](std::span<const double> x) { return x[0] < 1e-6 ? 1e6 : 1e-6; }, 1e-6,
                      1e6, Density::Normalization::Raw);
  CHECK_THROWS_AS((void)sample(d, spike, 10, 1), PathologicalDensityError);
}

TEST_CASE("grid reference examples") {
  const Domain d = Domain::unit_box(1);
  const EmpiricalMeasure g = grid_reference(d, Density::uniform(d), 4);
  const double expect[] = {0.125, 0.375, 0.625, 0.875};
  for (int i = 0; i < 4; ++i) CHECK(g.points()(0, i) == doctest::Approx(expect[i]).epsilon(1e-15));
  CHECK(grid_reference(d, Density::uniform(d), 1).points()(0, 0) == 0.5);

  const Density lin(d, [](std::span<const double> x) { return 2.0 * x[0]; }, 1e-12, 2.0);
  const EmpiricalMeasure two = grid_reference(d, lin, 2);
  // centroids of 2x dx on (0, q) and (q, 1) with q = 1/√2
  const double q = 1.0 / std::sqrt(2.0);
  CHECK(two.points()(0, 0) == doctest::Approx(2.0 * q / 3.0).epsilon(1e-9));
  CHECK(two.points()(0, 1) == doctest::Approx((2.0 / 3.0) * (1 - q * q * q) / (1 - q * q)).epsilon(1e-9));
  CHECK_THROWS_AS((void)grid_reference(Domain::ball({0.0, 0.0}, 1.0),
                                       Density::uniform(Domain::ball({0.0, 0.0}, 1.0)), 4),
                  UnsupportedError);
}

TEST_CASE("grid reference on a square is a regular lattice") {
  const Domain d = Domain::unit_box(2);
  const EmpiricalMeasure g = grid_reference(d, Density::uniform(d), 16);
  REQUIRE(g.grid().has_value());
  CHECK(g.grid()->regular);
  CHECK(g.grid()->counts == std::vector<int>{4, 4});
  CHECK(g.grid()->spacing == 0.25);
  CHECK(balanced_grid_counts(8, {1.0, 1.0}) == std::vector<int>{4, 2});
  CHECK(balanced_grid_counts(8, {1.0, 4.0}) == std::vector<int>{2, 4});
  CHECK(balanced_grid_counts(12, {3.0, 1.0}) == std::vector<int>{6, 2});
}
