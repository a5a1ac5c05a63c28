#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bdgraphtv/quadrature.hpp"

namespace bdgraphtv {

/// Open interval (lo, hi) of a line parameter.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi > lo ? hi - lo : 0.0; }
  bool empty() const { return !(hi > lo); }
};

/// Bounded open domain: an axis-aligned box or a Euclidean ball.
class Domain {
 public:
  enum class Kind { Box, Ball };

  static Domain box(std::vector<double> lo, std::vector<double> hi);
  static Domain unit_box(int d);
  static Domain ball(std::vector<double> center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(lo_.size()); }
  /// Bounding box (the box itself for Box domains).
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<double>& center() const { return center_; }
  double radius() const { return radius_; }

  bool contains(std::span<const double> x) const;
  double volume() const;
  double diameter() const;
  /// {x : dist(x, complement) > margin}; throws if the result is empty.
  Domain shrunk(double margin) const;
  void sample_uniform(std::mt19937_64& rng, std::span<double> out) const;
  /// Parameter range {t : y + t ξ ∈ D}; empty when the line misses D.
  Interval line_section(std::span<const double> y, std::span<const double> xi) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Box;
  std::vector<double> lo_, hi_, center_;
  double radius_ = 0.0;
};

/// Tensor Gauss–Legendre (boxes, d <= 2) or Monte Carlo volume quadrature.
struct VolumeQuadrature {
  int panels_per_dim = 4;
  int nodes_per_panel = 16;  // 64^d nodes in total by default
  std::size_t mc_nodes = 200'000;
  std::uint64_t seed = 7;
};

/// ∫_D f dx with an error estimate (coarse-rule difference or standard error).
QuadratureResult integrate(const Domain& dom,
                           const std::function<double(std::span<const double>)>& f,
                           const VolumeQuadrature& quad = {});

/// Density ρ on D with α <= ρ <= β. In Probability mode the evaluator is
/// rescaled at construction so that ∫_D ρ = 1 (bounds rescaled with it).
/// Every evaluation re-checks the bounds and throws DensityError on a
/// violation.
class Density {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;
  enum class Normalization { Probability, Raw };

  Density(Domain domain, Evaluator rho, double alpha, double beta,
          Normalization mode = Normalization::Probability,
          const VolumeQuadrature& quad = {});

  /// Normalized constant density 1/|D|.
  static Density uniform(const Domain& domain);
  /// Constant density with the given value, left unnormalized.
  static Density constant(const Domain& domain, double value);

  double operator()(std::span<const double> x) const {
    if (constant_) return value_;
    return checked(x);
  }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  /// ∫_D ρ dx of the stored (possibly rescaled) evaluator.
  double normalization() const { return mass_; }
  bool is_constant() const { return constant_; }
  const Domain& domain() const { return domain_; }
  Normalization mode() const { return mode_; }
  /// s·ρ in Raw mode with bounds s·α, s·β.
  Density scaled(double s) const;

 private:
  Density() = default;
  double checked(std::span<const double> x) const;

  Domain domain_ = Domain::unit_box(1);
  Evaluator rho_;
  double scale_ = 1.0;
  double alpha_ = 1.0;
  double beta_ = 1.0;
  double mass_ = 1.0;
  bool constant_ = false;
  double value_ = 1.0;
  Normalization mode_ = Normalization::Probability;
};

/// Lattice metadata for measures produced by grid_reference.
struct GridInfo {
  std::vector<int> counts;  // cells per axis, product = n
  double spacing = 0.0;     // largest cell side
  /// Atoms are the centres of a regular lattice, last axis varying fastest.
  bool regular = false;
  Domain domain = Domain::unit_box(1);
};

/// ν_n = (1/n) Σ δ_{X_i}; points stored column-wise (d × n).
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(Eigen::MatrixXd points, std::uint64_t seed = 0,
                            std::optional<GridInfo> grid = std::nullopt);

  int dim() const { return static_cast<int>(points_.rows()); }
  Eigen::Index size() const { return points_.cols(); }
  double weight() const { return 1.0 / static_cast<double>(points_.cols()); }
  const Eigen::MatrixXd& points() const { return points_; }
  std::span<const double> point(Eigen::Index i) const {
    return {points_.col(i).data(), static_cast<std::size_t>(points_.rows())};
  }
  std::uint64_t seed() const { return seed_; }
  const std::optional<GridInfo>& grid() const { return grid_; }

 private:
  Eigen::MatrixXd points_;
  std::uint64_t seed_ = 0;
  std::optional<GridInfo> grid_;
};

/// n i.i.d. points from ρ dx by rejection against β·Uniform(D).
EmpiricalMeasure sample(const Domain& dom, const Density& rho, Eigen::Index n,
                        std::uint64_t seed);

/// Deterministic n-point quantization of ρ dx on a box: cells of equal mass
/// (stratified axis by axis), each atom at its cell's ρ-centroid.
EmpiricalMeasure grid_reference(const Domain& dom, const Density& rho, Eigen::Index n);

/// Per-axis cell counts with product n, as square as the box allows.
std::vector<int> balanced_grid_counts(Eigen::Index n, const std::vector<double>& sides);

}  // namespace bdgraphtv
