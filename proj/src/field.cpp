#include "bdgraphtv/field.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

namespace {

void check_square(const Eigen::MatrixXd& A, Eigen::Index d, const char* what) {
  if (A.rows() != d || A.cols() != d || d < 1)
    throw ArgumentError(std::string(what) + ": matrix must be d x d");
  if (!A.allFinite()) throw ArgumentError(std::string(what) + ": non-finite entries");
}

void check_vector(const Eigen::VectorXd& v, Eigen::Index d, const char* what) {
  if (v.size() != d) throw ArgumentError(std::string(what) + ": vector must have length d");
  if (!v.allFinite()) throw ArgumentError(std::string(what) + ": non-finite entries");
}

}  // namespace

bool AffineMap::is_rigid(double tol) const {
  return ((A + A.transpose()).cwiseAbs().maxCoeff() <= tol);
}

DisplacementField DisplacementField::linear(const Eigen::MatrixXd& A,
                                            std::optional<Eigen::VectorXd> offset) {
  check_square(A, A.rows(), "linear field");
  DisplacementField f;
  f.kind_ = Kind::Linear;
  f.dim_ = static_cast<int>(A.rows());
  f.minus_.A = A;
  f.minus_.c = offset ? *offset : Eigen::VectorXd::Zero(A.rows());
  check_vector(f.minus_.c, A.rows(), "linear field offset");
  return f;
}

DisplacementField DisplacementField::rigid(const Eigen::VectorXd& c, const Eigen::MatrixXd& W) {
  check_square(W, c.size(), "rigid field");
  const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
  if ((W + W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ArgumentError("rigid field needs a skew-symmetric matrix");
  return linear(W, c);
}

DisplacementField DisplacementField::smooth(int d, ValueFn u, GradFn grad,
                                            const Domain& probe_domain,
                                            std::uint64_t seed, int probes) {
  if (d < 1 || !u || !grad) throw ArgumentError("smooth field needs d >= 1, u and grad");
  if (probe_domain.dim() != d) throw ArgumentError("probe domain dimension mismatch");
  std::mt19937_64 rng(seed);
  Eigen::VectorXd x(d);
  const double h = 1e-6 * std::max(1.0, probe_domain.diameter());
  for (int p = 0; p < probes; ++p) {
    probe_domain.sample_uniform(rng, {x.data(), static_cast<std::size_t>(d)});
    const Eigen::MatrixXd g = grad(x);
    if (g.rows() != d || g.cols() != d)
      throw ArgumentError("smooth field gradient must be d x d");
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Eigen::VectorXd fd = (u(xp) - u(xm)) / (2.0 * h);
      if (fd.size() != d) throw ArgumentError("smooth field value must have length d");
      const double err = (fd - g.col(j)).cwiseAbs().maxCoeff();
      if (!(err <= 1e-5 * std::max(1.0, g.col(j).cwiseAbs().maxCoeff()))) {
        std::ostringstream os;
        os << "smooth field gradient disagrees with central differences by " << err;
        throw ArgumentError(os.str());
      }
    }
  }
  DisplacementField f;
  f.kind_ = Kind::Smooth;
  f.dim_ = d;
  f.u_ = std::move(u);
  f.grad_ = std::move(grad);
  return f;
}

DisplacementField DisplacementField::piecewise(Hyperplane surface, AffineMap minus,
                                               AffineMap plus) {
  const Eigen::Index d = surface.point.size();
  check_vector(surface.point, d, "jump surface point");
  check_vector(surface.normal, d, "jump surface normal");
  const double len = surface.normal.norm();
  if (!(len > 0.0)) throw ArgumentError("jump surface normal must be non-zero");
  surface.normal /= len;
  check_square(minus.A, d, "minus piece");
  check_square(plus.A, d, "plus piece");
  check_vector(minus.c, d, "minus piece");
  check_vector(plus.c, d, "plus piece");
  DisplacementField f;
  f.kind_ = Kind::PiecewiseRigid;
  f.dim_ = static_cast<int>(d);
  f.surface_ = std::move(surface);
  f.minus_ = std::move(minus);
  f.plus_ = std::move(plus);
  return f;
}

DisplacementField DisplacementField::planar_jump(int d, int axis, double position,
                                                 const Eigen::VectorXd& jump) {
  if (d < 1 || axis < 0 || axis >= d) throw ArgumentError("planar_jump: bad axis");
  Hyperplane h{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  h.point[axis] = position;
  h.normal[axis] = 1.0;
  AffineMap minus{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  AffineMap plus{jump, Eigen::MatrixXd::Zero(d, d)};
  return piecewise(std::move(h), std::move(minus), std::move(plus));
}

void DisplacementField::smooth_apply(std::span<const double> x, std::span<double> out) const {
  Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), dim_);
  const Eigen::VectorXd v = u_(xv);
  for (int k = 0; k < dim_; ++k) out[k] = v[k];
}

Eigen::VectorXd DisplacementField::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw ArgumentError("field: dimension mismatch");
  Eigen::VectorXd out(dim_);
  evaluate(x, {out.data(), static_cast<std::size_t>(dim_)});
  return out;
}

Eigen::MatrixXd DisplacementField::gradient(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw ArgumentError("field: dimension mismatch");
  switch (kind_) {
    case Kind::Linear:
      return minus_.A;
    case Kind::PiecewiseRigid: {
      const double s = side(x);
      if (std::abs(s) <= 1e-12) throw UndefinedPointError("point lies on the jump surface");
      return s > 0.0 ? plus_.A : minus_.A;
    }
    case Kind::Smooth:
      return grad_(Eigen::Map<const Eigen::VectorXd>(x.data(), dim_));
  }
  return {};
}

SymMatrix DisplacementField::sym_gradient(std::span<const double> x) const {
  return SymMatrix(gradient(x));
}

DisplacementField DisplacementField::scaled(double t) const {
  if (!std::isfinite(t)) throw ArgumentError("field scale must be finite");
  DisplacementField f = *this;
  f.minus_.A *= t;
  f.minus_.c *= t;
  f.plus_.A *= t;
  f.plus_.c *= t;
  if (kind_ == Kind::Smooth) {
    auto u = u_;
    auto g = grad_;
    f.u_ = [u, t](const Eigen::VectorXd& x) -> Eigen::VectorXd { return t * u(x); };
    f.grad_ = [g, t](const Eigen::VectorXd& x) -> Eigen::MatrixXd { return t * g(x); };
  }
  return f;
}

DisplacementField DisplacementField::with_rigid(const Eigen::VectorXd& c,
                                                const Eigen::MatrixXd& W) const {
  const DisplacementField r = rigid(c, W);
  if (r.dim() != dim_) throw ArgumentError("rigid motion dimension mismatch");
  DisplacementField f = *this;
  switch (kind_) {
    case Kind::Linear:
      f.minus_.A += W;
      f.minus_.c += c;
      break;
    case Kind::PiecewiseRigid:
      f.minus_.A += W;
      f.minus_.c += c;
      f.plus_.A += W;
      f.plus_.c += c;
      break;
    case Kind::Smooth: {
      auto u = u_;
      auto g = grad_;
      f.u_ = [u, c, W](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return u(x) + c + W * x;
      };
      f.grad_ = [g, W](const Eigen::VectorXd& x) -> Eigen::MatrixXd { return g(x) + W; };
      break;
    }
  }
  return f;
}

bool DisplacementField::pieces_rigid() const {
  switch (kind_) {
    case Kind::Linear:
      return minus_.is_rigid();
    case Kind::PiecewiseRigid:
      return minus_.is_rigid() && plus_.is_rigid();
    case Kind::Smooth:
      return false;
  }
  return false;
}

std::optional<double> DisplacementField::lipschitz() const {
  if (kind_ == Kind::Linear) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(minus_.A);
    return svd.singularValues()(0);
  }
  return std::nullopt;
}

Eigen::VectorXd DisplacementField::jump_at(std::span<const double> x) const {
  if (kind_ != Kind::PiecewiseRigid) return Eigen::VectorXd::Zero(dim_);
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), dim_);
  return (plus_.c + plus_.A * xv) - (minus_.c + minus_.A * xv);
}

std::string DisplacementField::describe() const {
  std::ostringstream os;
  Eigen::IOFormat fmt(Eigen::StreamPrecision, Eigen::DontAlignCols, ",", ";", "", "", "[", "]");
  switch (kind_) {
    case Kind::Linear:
      os << "linear(A=" << minus_.A.format(fmt) << ", c=" << minus_.c.transpose().format(fmt)
         << ")";
      break;
    case Kind::PiecewiseRigid:
      os << "piecewise(normal=" << surface_.normal.transpose().format(fmt)
         << ", point=" << surface_.point.transpose().format(fmt) << ")";
      break;
    case Kind::Smooth:
      os << "smooth(d=" << dim_ << ")";
      break;
  }
  return os.str();
}

}  // namespace bdgraphtv
