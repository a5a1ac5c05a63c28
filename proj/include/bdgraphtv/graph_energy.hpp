#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>

#include "bdgraphtv/domain.hpp"
#include "bdgraphtv/field.hpp"
#include "bdgraphtv/kernels.hpp"

namespace bdgraphtv {

/// Values u(X_i) ∈ R^d aligned column-wise with a point cloud.
class NodeField {
 public:
  explicit NodeField(Eigen::MatrixXd values);
  /// u evaluated at every point of the cloud.
  static NodeField sample(const DisplacementField& u, const EmpiricalMeasure& cloud);

  int dim() const { return static_cast<int>(values_.rows()); }
  Eigen::Index size() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  std::span<const double> value(Eigen::Index i) const {
    return {values_.col(i).data(), static_cast<std::size_t>(values_.rows())};
  }

 private:
  Eigen::MatrixXd values_;
};

struct GraphEnergyResult {
  double value = 0.0;
  /// Ordered pairs i != j with non-zero kernel weight.
  std::uint64_t pair_count = 0;
  double eps = 0.0;
};

struct GtvOptions {
  int threads = 0;  // 0: default, capped by BDGRAPHTV_THREADS
  /// When set, only ordered pairs (i, j) with X_i inside this domain are
  /// summed (normalization stays 1/n²).
  std::optional<Domain> anchor;
};

/// (1/ε²)(1/n²) Σ_{i,j} η_ε(X_i − X_j) |(u_i − u_j)·(X_i − X_j)| by a plain
/// double loop over ordered pairs.
GraphEnergyResult gtv_naive(const EmpiricalMeasure& cloud, const NodeField& u,
                            const Kernel& k, double eps, const GtvOptions& opts = {});

/// Same sum restricted to pairs within the kernel's interaction radius using
/// a cell list; unordered pairs are summed once and doubled.
GraphEnergyResult gtv_celllist(const EmpiricalMeasure& cloud, const NodeField& u,
                               const Kernel& k, double eps, const GtvOptions& opts = {});

struct OracleResult {
  double value = 0.0;
  double std_error = 0.0;
  /// Integrand evaluations.
  std::size_t nodes = 0;
  /// Expected ratio E[gtv]/value for an n-point i.i.d. cloud: (n−1)/n.
  static double pair_factor(Eigen::Index n) {
    return static_cast<double>(n - 1) / static_cast<double>(n);
  }
};

struct OracleOptions {
  std::size_t mc_nodes = 1'000'000;
  std::uint64_t seed = 1;
  /// Restrict the outer variable x to this domain (see GtvOptions::anchor).
  std::optional<Domain> anchor;
  int threads = 0;
};

/// Monte Carlo estimate of
/// (1/ε²) ∬ η_ε(x − y) |(u(x) − u(y))·(x − y)| ρ(x) ρ(y) dx dy over D × D.
OracleResult gtv_expectation_oracle(const Domain& dom, const Density& rho,
                                    const DisplacementField& u, const Kernel& k,
                                    double eps, const OracleOptions& opts = {});

}  // namespace bdgraphtv
