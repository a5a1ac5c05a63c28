#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdgraphtv/quadrature.hpp"

namespace bdgraphtv {

/// Symmetric d×d matrix. Construction from an arbitrary square matrix keeps
/// only its symmetric part, so entries (i, j) and (j, i) are always equal.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix zero(int d);
  static SymMatrix identity(int d);
  /// Symmetrized tensor product a ⊙ b = (a bᵀ + b aᵀ) / 2.
  static SymMatrix sym_product(std::span<const double> a,
                               std::span<const double> b);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& matrix() const { return m_; }

  /// A ξ · ξ, summed as Σ a_ii ξ_i² + 2 Σ_{i<j} a_ij ξ_i ξ_j.
  double quadratic_form(std::span<const double> xi) const;
  double frobenius_norm() const { return m_.norm(); }
  /// Largest absolute eigenvalue.
  double spectral_norm() const;
  SymMatrix scaled(double t) const;
  bool is_zero() const { return m_.isZero(0.0); }

 private:
  Eigen::MatrixXd m_;
};

struct KernelStep {
  double radius;  // profile takes `value` on [previous radius, radius)
  double value;
};

/// Second-moment estimate ∫ η(x)|x|² dx.
struct MomentResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t nodes = 0;
  bool infinite = false;
  /// Radius beyond which the tail holds less than the requested fraction of
  /// the moment; equals the support radius for compactly supported profiles.
  double tail_radius = 0.0;
};

/// Radially symmetric interaction kernel η(x) = profile(|x|).
///
/// Construction enforces profile(0) > 0 with continuity at 0, a
/// non-increasing profile (sampled at 1024 radii for custom profiles) and a
/// finite second moment. Profiles with unbounded support are truncated where
/// the tail carries less than `tail_fraction` of the second moment; the
/// truncation radius is exposed through truncation_radius().
class Kernel {
 public:
  enum class Kind { Indicator, PiecewiseConstant, Custom };

  struct CustomOptions {
    /// Relative tail mass used to pick the truncation radius. Zero disables
    /// truncation (the accelerated graph energy then refuses the kernel).
    double tail_fraction = 1e-8;
    QuadratureSpec quadrature{};
    std::string name = "custom";
  };

  /// η(t) = c for t < b, 0 otherwise.
  static Kernel indicator(double c, double b, int d);
  static Kernel piecewise_constant(std::vector<KernelStep> steps, int d);
  static Kernel custom(std::function<double(double)> profile, double radius,
                       int d, CustomOptions options);
  static Kernel custom(std::function<double(double)> profile, double radius,
                       int d) {
    return custom(std::move(profile), radius, d, CustomOptions{});
  }

  double profile(double t) const {
    switch (kind_) {
      case Kind::Indicator:
        return t < steps_.front().radius ? steps_.front().value : 0.0;
      case Kind::PiecewiseConstant:
        for (const KernelStep& s : steps_)
          if (t < s.radius) return s.value;
        return 0.0;
      case Kind::Custom:
        return t < radius_ ? custom_(t) : 0.0;
    }
    return 0.0;
  }

  /// η(x) for x ∈ R^d.
  double operator()(std::span<const double> x) const;

  Kind kind() const { return kind_; }
  int dimension() const { return dim_; }
  /// Support radius; +∞ for unbounded profiles.
  double radius() const { return radius_; }
  std::optional<double> truncation_radius() const { return truncation_; }
  /// Finite radius used for neighbour search; throws UnsupportedError for an
  /// unbounded profile without truncation.
  double interaction_radius() const;
  /// Finite radius used for numerical integration (support radius or the
  /// tail radius of the moment computation, truncated or not).
  double integration_radius() const { return integration_radius_; }
  /// Radii where the profile may jump; used to split radial quadrature.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<KernelStep>& steps() const { return steps_; }
  /// Second moment computed at construction.
  const MomentResult& moment() const { return moment_; }
  std::string describe() const;

 private:
  Kernel() = default;
  void finish_construction(const QuadratureSpec& quad, double tail_fraction,
                           bool truncate);

  Kind kind_ = Kind::Indicator;
  int dim_ = 1;
  double radius_ = 0.0;
  std::vector<KernelStep> steps_;
  std::function<double(double)> custom_;
  std::vector<double> breakpoints_;
  std::optional<double> truncation_;
  double integration_radius_ = 0.0;
  MomentResult moment_;
  std::string name_;
};

/// η_ε(x) = ε^{-d} η(x / ε).
class RescaledKernel {
 public:
  RescaledKernel(const Kernel& kernel, double eps);

  double operator()(std::span<const double> x) const;
  double at_distance(double r) const {
    return inv_eps_d_ * kernel_->profile(r / eps_);
  }
  double eps() const { return eps_; }
  const Kernel& base() const { return *kernel_; }

 private:
  const Kernel* kernel_;
  double eps_;
  double inv_eps_d_;
};

/// Evaluator for x ↦ ε^{-d} η(|x|/ε). The kernel must outlive the result.
RescaledKernel rescale(const Kernel& kernel, double eps);

/// ∫_{R^d} profile(|x|) |x|² dx for an arbitrary radial profile.
MomentResult second_moment_of_profile(const std::function<double(double)>& profile,
                                      double radius,
                                      const std::vector<double>& breakpoints,
                                      int d, const QuadratureSpec& quad,
                                      double tail_fraction = 1e-8);

MomentResult second_moment(const Kernel& kernel, const QuadratureSpec& quad = {});

/// φ_η(A) = ∫ η(ξ) |Aξ·ξ| dξ.
QuadratureResult phi_eta(const Kernel& kernel, const SymMatrix& a,
                         const QuadratureSpec& quad = {});

/// φ_η(A/|A|)·|A| for a caller-chosen matrix norm. Equal to φ_η(A) for any
/// norm; returns 0 when A = 0.
enum class MatrixNorm { Frobenius, Spectral };
double phi_eta_polar(const Kernel& kernel, const SymMatrix& a, MatrixNorm norm,
                     const QuadratureSpec& quad = {});

}  // namespace bdgraphtv
