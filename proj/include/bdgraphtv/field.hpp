#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "bdgraphtv/domain.hpp"
#include "bdgraphtv/kernels.hpp"

namespace bdgraphtv {

/// x ↦ c + A x.
struct AffineMap {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;

  bool is_rigid(double tol = 0.0) const;
};

/// Oriented hyperplane {x : (x - point)·normal = 0}; normal is unit length.
struct Hyperplane {
  Eigen::VectorXd point;
  Eigen::VectorXd normal;
};

/// Analytic displacement field u : D → R^d.
///
/// Linear: u(x) = c + A x.
/// Smooth: caller-supplied u and ∇u (checked against central differences).
/// PiecewiseRigid: affine pieces on either side of a flat jump surface; the
/// "plus" piece holds where (x - point)·normal >= 0.
class DisplacementField {
 public:
  enum class Kind { Linear, Smooth, PiecewiseRigid };
  using ValueFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using GradFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  static DisplacementField linear(const Eigen::MatrixXd& A,
                                  std::optional<Eigen::VectorXd> offset = std::nullopt);
  /// c + W x with W skew-symmetric.
  static DisplacementField rigid(const Eigen::VectorXd& c, const Eigen::MatrixXd& W);
  /// Gradient consistency is probed at `probes` uniform points of `probe_domain`.
  static DisplacementField smooth(int d, ValueFn u, GradFn grad,
                                  const Domain& probe_domain, std::uint64_t seed = 1,
                                  int probes = 100);
  static DisplacementField piecewise(Hyperplane surface, AffineMap minus, AffineMap plus);
  /// u = 0 for x_axis < position, u = jump for x_axis >= position.
  static DisplacementField planar_jump(int d, int axis, double position,
                                       const Eigen::VectorXd& jump);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  void evaluate(std::span<const double> x, std::span<double> out) const {
    switch (kind_) {
      case Kind::Linear:
        affine_apply(minus_, x, out);
        return;
      case Kind::PiecewiseRigid:
        affine_apply(side(x) >= 0.0 ? plus_ : minus_, x, out);
        return;
      case Kind::Smooth:
        smooth_apply(x, out);
        return;
    }
  }
  Eigen::VectorXd operator()(std::span<const double> x) const;

  /// Signed distance to the jump surface (PiecewiseRigid only; 0 otherwise).
  double side(std::span<const double> x) const {
    if (kind_ != Kind::PiecewiseRigid) return 0.0;
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) s += (x[k] - surface_.point[k]) * surface_.normal[k];
    return s;
  }

  /// ∇u(x); throws UndefinedPointError on the jump surface.
  Eigen::MatrixXd gradient(std::span<const double> x) const;
  /// e(u)(x) = (∇u + ∇uᵀ)/2; throws UndefinedPointError on the jump surface.
  SymMatrix sym_gradient(std::span<const double> x) const;

  /// t·u.
  DisplacementField scaled(double t) const;
  /// u + c + W x.
  DisplacementField with_rigid(const Eigen::VectorXd& c, const Eigen::MatrixXd& W) const;

  /// True when every piece is a rigid motion (zero symmetric gradient).
  bool pieces_rigid() const;
  /// Lipschitz constant if the field is globally Lipschitz and it is known.
  std::optional<double> lipschitz() const;

  const AffineMap& affine() const { return minus_; }
  const AffineMap& minus() const { return minus_; }
  const AffineMap& plus() const { return plus_; }
  const Hyperplane& surface() const { return surface_; }
  /// plus(x) - minus(x) on the surface; constant when both pieces share A.
  Eigen::VectorXd jump_at(std::span<const double> x) const;
  std::string describe() const;

 private:
  DisplacementField() = default;

  static void affine_apply(const AffineMap& m, std::span<const double> x,
                           std::span<double> out) {
    const int d = static_cast<int>(m.c.size());
    for (int i = 0; i < d; ++i) {
      double s = m.c[i];
      for (int j = 0; j < d; ++j) s += m.A(i, j) * x[j];
      out[i] = s;
    }
  }
  void smooth_apply(std::span<const double> x, std::span<double> out) const;

  Kind kind_ = Kind::Linear;
  int dim_ = 1;
  AffineMap minus_;
  AffineMap plus_;
  Hyperplane surface_;
  ValueFn u_;
  GradFn grad_;
};

}  // namespace bdgraphtv
