#include <doctest.h>

#include <cmath>

#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/field.hpp"

using namespace bdgraphtv;

TEST_CASE("linear and rigid fields") {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 2.0, 3.0, 4.0;
  const DisplacementField u = DisplacementField::linear(A, Eigen::Vector2d(1.0, -1.0));
  const std::vector<double> x{0.5, 0.25};
  const Eigen::VectorXd v = u(x);
  CHECK(v[0] == 1.0 + 0.5 + 0.5);
  CHECK(v[1] == -1.0 + 1.5 + 1.0);
  CHECK(u.sym_gradient(x)(0, 1) == 2.5);

  Eigen::MatrixXd W(2, 2);
  W << 0.0, 1.0, -1.0, 0.0;
  const DisplacementField r = DisplacementField::rigid(Eigen::Vector2d(1.0, 2.0), W);
  CHECK(r.sym_gradient(x).is_zero());
  CHECK(r.pieces_rigid());
  CHECK_THROWS_AS((void)DisplacementField::rigid(Eigen::Vector2d(0.0, 0.0), A), ArgumentError);
  CHECK(u.lipschitz().value() == doctest::Approx(A.jacobiSvd().singularValues()[0]));
}

TEST_CASE("smooth field gradient is checked") {
  const Domain d = Domain::unit_box(2);
  auto val = [](const Eigen::VectorXd& x) { return Eigen::Vector2d(x[0] * x[1], 0.0).eval(); };
  auto good = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd g(2, 2);
    g << x[1], x[0], 0.0, 0.0;
    return g;
  };
  auto bad = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd g(2, 2);
    g << x[0], x[1], 0.0, 0.0;
    return g;
  };
  const DisplacementField u = DisplacementField::smooth(2, val, good, d);
  const std::vector<double> p{1.0, 2.0};
  const SymMatrix e = u.sym_gradient(p);
  CHECK(e(0, 0) == 2.0);
  CHECK(e(0, 1) == 0.5);
  CHECK(e(1, 1) == 0.0);
  CHECK_THROWS_AS((void)DisplacementField::smooth(2, val, bad, d), ArgumentError);
}

TEST_CASE("piecewise rigid field and its jump") {
  const DisplacementField j = DisplacementField::planar_jump(2, 0, 0.5, Eigen::Vector2d(1.0, 0.0));
  const std::vector<double> left{0.25, 0.5}, right{0.75, 0.5}, on{0.5, 0.3};
  CHECK(j(left).isZero(0.0));
  CHECK(j(right) == Eigen::Vector2d(1.0, 0.0));
  CHECK(j(on) == Eigen::Vector2d(1.0, 0.0));
  CHECK(j.sym_gradient(left).is_zero());
  CHECK_THROWS_AS((void)j.sym_gradient(on), UndefinedPointError);
  CHECK(j.jump_at(on) == Eigen::Vector2d(1.0, 0.0));
  CHECK(j.pieces_rigid());
  CHECK_FALSE(j.lipschitz().has_value());
  const DisplacementField half = j.scaled(-0.5);
  CHECK(half(right) == Eigen::Vector2d(-0.5, 0.0));
}

TEST_CASE("adding a rigid motion keeps the symmetric gradient") {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.2, -0.4, 2.0;
  Eigen::MatrixXd W(2, 2);
  W << 0.0, 0.75, -0.75, 0.0;
  const DisplacementField u = DisplacementField::linear(A);
  const DisplacementField v = u.with_rigid(Eigen::Vector2d(3.0, 1.0), W);
  const std::vector<double> x{0.3, 0.6};
  CHECK((v.sym_gradient(x).matrix() - u.sym_gradient(x).matrix()).norm() <= 1e-15);
  CHECK((v(x) - u(x) - Eigen::Vector2d(3.0, 1.0) - W * Eigen::Vector2d(0.3, 0.6)).norm() <= 1e-15);
}
