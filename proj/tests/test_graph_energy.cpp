#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/graph_energy.hpp"

using namespace bdgraphtv;

namespace {

NodeField gaussian_field(std::mt19937_64& rng, int d, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd v(d, n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = g(rng);
  return NodeField(v);
}

}  // namespace

TEST_CASE("hand-evaluated two point energy") {
  Eigen::MatrixXd p(1, 2), u(1, 2);
  p << 0.0, 0.5;
  u << 0.0, 1.0;
  const EmpiricalMeasure cloud(p);
  const Kernel k = Kernel::indicator(1.0, 1.0, 1);
  const GraphEnergyResult a = gtv_naive(cloud, NodeField(u), k, 1.0);
  const GraphEnergyResult b = gtv_celllist(cloud, NodeField(u), k, 1.0);
  CHECK(a.value == 0.25);
  CHECK(b.value == 0.25);
  CHECK(a.pair_count == 2);
  CHECK(b.pair_count == 2);
}

TEST_CASE("trivial energies") {
  const Domain d = Domain::unit_box(2);
  const EmpiricalMeasure cloud = sample(d, Density::uniform(d), 300, 4);
  const Kernel k = Kernel::indicator(1.0, 1.0, 2);
  const NodeField c(Eigen::MatrixXd::Constant(2, 300, 3.5));
  CHECK(gtv_naive(cloud, c, k, 0.2).value == 0.0);
  CHECK(gtv_celllist(cloud, c, k, 0.2).value == 0.0);

  const EmpiricalMeasure one(Eigen::MatrixXd::Constant(2, 1, 0.5));
  const NodeField u1(Eigen::MatrixXd::Constant(2, 1, 1.0));
  const GraphEnergyResult r = gtv_celllist(one, u1, k, 0.2);
  CHECK(r.value == 0.0);
  CHECK(r.pair_count == 0);

  const GraphEnergyResult all = gtv_celllist(cloud, c, k, 2.0);
  CHECK(all.pair_count == 300ull * 299ull);
  CHECK(gtv_naive(cloud, c, k, 2.0).pair_count == 300ull * 299ull);

  CHECK_THROWS_AS((void)gtv_naive(cloud, u1, k, 0.2), ArgumentError);
  CHECK_THROWS_AS((void)gtv_celllist(cloud, c, k, 0.0), ArgumentError);
}

TEST_CASE("skew-symmetric fields give exactly zero on dyadic points") {
  Eigen::MatrixXd p(2, 64);
  for (int i = 0; i < 64; ++i) {
    p(0, i) = (i % 8) / 8.0 + 1.0 / 32.0;
    p(1, i) = (i / 8) / 8.0 + 1.0 / 16.0;
  }
  const EmpiricalMeasure cloud(p);
  Eigen::MatrixXd W(2, 2);
  W << 0.0, 1.5, -1.5, 0.0;
  const NodeField u = NodeField::sample(DisplacementField::rigid(Eigen::Vector2d(0.25, -2.0), W), cloud);
  const Kernel k = Kernel::indicator(1.0, 1.0, 2);
  CHECK(gtv_naive(cloud, u, k, 0.3).value == 0.0);
  CHECK(gtv_celllist(cloud, u, k, 0.3).value == 0.0);
}

TEST_CASE("homogeneity, symmetry and permutation invariance") {
  std::mt19937_64 rng(8);
  const Domain d = Domain::unit_box(2);
  const EmpiricalMeasure cloud = sample(d, Density::uniform(d), 800, 12);
  const NodeField u = gaussian_field(rng, 2, 800);
  const Kernel k = Kernel::indicator(1.0, 1.0, 2);
  const double base = gtv_celllist(cloud, u, k, 0.1).value;
  for (double t : {-2.0, 0.125, 10.0}) {
    const NodeField tu(t * u.values());
    CHECK(gtv_celllist(cloud, tu, k, 0.1).value == doctest::Approx(std::abs(t) * base).epsilon(1e-12));
  }

  // ordered-pair sum equals twice the unordered sum
  const RescaledKernel ke = rescale(k, 0.1);
  long double unordered = 0.0L;
  for (Eigen::Index i = 0; i < 800; ++i)
    for (Eigen::Index j = i + 1; j < 800; ++j) {
      const Eigen::Vector2d dx = cloud.points().col(i) - cloud.points().col(j);
      const Eigen::Vector2d du = u.values().col(i) - u.values().col(j);
      unordered += ke.at_distance(dx.norm()) * std::abs(du.dot(dx));
    }
  const double expect = static_cast<double>(2.0L * unordered / (0.01L * 800.0L * 800.0L));
  CHECK(gtv_naive(cloud, u, k, 0.1).value == doctest::Approx(expect).epsilon(1e-12));

  std::vector<Eigen::Index> perm(800);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd pp(2, 800), uu(2, 800);
  for (Eigen::Index i = 0; i < 800; ++i) {
    pp.col(i) = cloud.points().col(perm[i]);
    uu.col(i) = u.values().col(perm[i]);
  }
  CHECK(gtv_celllist(EmpiricalMeasure(pp), NodeField(uu), k, 0.1).value ==
        doctest::Approx(base).epsilon(1e-12));
  CHECK(gtv_naive(EmpiricalMeasure(pp), NodeField(uu), k, 0.1).value ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cell list matches naive for a truncated kernel and an anchor") {
  std::mt19937_64 rng(21);
  const Domain d = Domain::unit_box(3);
  const EmpiricalMeasure cloud = sample(d, Density::uniform(d), 600, 2);
  const NodeField u = gaussian_field(rng, 3, 600);
  const Kernel k = Kernel::piecewise_constant({{0.5, 3.0}, {1.0, 1.0}}, 3);
  GtvOptions opts;
  opts.anchor = d.shrunk(0.15);
  const GraphEnergyResult a = gtv_naive(cloud, u, k, 0.15, opts);
  const GraphEnergyResult b = gtv_celllist(cloud, u, k, 0.15, opts);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  CHECK(a.pair_count == b.pair_count);
  CHECK(a.value < gtv_naive(cloud, u, k, 0.15).value);
}

TEST_CASE("expectation oracle in 1D approaches 2|a|/3") {
  const Domain d = Domain::unit_box(1);
  const double a = 1.5;
  Eigen::MatrixXd A(1, 1);
  A << a;
  OracleOptions oo;
  oo.mc_nodes = 400000;
  const OracleResult o = gtv_expectation_oracle(d, Density::uniform(d), DisplacementField::linear(A),
                                                Kernel::indicator(1.0, 1.0, 1), 0.01, oo);
  CHECK(std::abs(o.value - 2.0 * a / 3.0) <= 0.03 * 2.0 * a / 3.0);
  CHECK(o.std_error > 0.0);
  CHECK(OracleResult::pair_factor(5000) == 4999.0 / 5000.0);
}

TEST_CASE("oracle vanishes for rigid motions") {
  const Domain d = Domain::unit_box(2);
  Eigen::MatrixXd W(2, 2);
  W << 0.0, 1.0, -1.0, 0.0;
  OracleOptions oo;
  oo.mc_nodes = 10000;
  const OracleResult o =
      gtv_expectation_oracle(d, Density::uniform(d), DisplacementField::rigid(Eigen::Vector2d(1.0, 0.0), W),
                             Kernel::indicator(1.0, 1.0, 2), 0.1, oo);
  CHECK(std::abs(o.value) <= 1e-12);
}
