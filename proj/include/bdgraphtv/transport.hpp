#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

#include "bdgraphtv/domain.hpp"
#include "bdgraphtv/field.hpp"
#include "bdgraphtv/graph_energy.hpp"

namespace bdgraphtv {

struct PlanEntry {
  Eigen::Index source;
  Eigen::Index target;
  double mass;
};

/// Coupling between two uniform empirical measures, stored sparsely.
class TransportPlan {
 public:
  TransportPlan(Eigen::Index n_source, Eigen::Index n_target, std::vector<PlanEntry> entries);

  Eigen::Index source_size() const { return ns_; }
  Eigen::Index target_size() const { return nt_; }
  const std::vector<PlanEntry>& entries() const { return entries_; }
  /// Largest deviation of the row/column sums from 1/n_source, 1/n_target.
  double marginal_error() const;
  double total_mass() const;

 private:
  Eigen::Index ns_, nt_;
  std::vector<PlanEntry> entries_;
};

/// Measure together with a function sampled on its atoms.
struct FieldOnMeasure {
  const EmpiricalMeasure& measure;
  const NodeField& values;
};

struct Tl1Solver {
  enum class Kind { ExactAssignment, LP, Sinkhorn };
  Kind kind = Kind::ExactAssignment;
  double reg = 0.0;
  int max_iter = 200'000;
  double tol = 1e-9;  // L1 marginal violation at which Sinkhorn stops

  static Tl1Solver exact() { return {}; }
  static Tl1Solver lp() { return {Kind::LP}; }
  static Tl1Solver sinkhorn(double reg, int max_iter = 200'000) {
    return {Kind::Sinkhorn, reg, max_iter};
  }
};

struct Tl1Result {
  double value = 0.0;
  /// Primal minus a dual lower bound (0 for the exact solvers).
  double gap = 0.0;
  TransportPlan plan{0, 0, {}};
};

/// inf over couplings γ of ∬ |x − y| + |w₁(x) − w₂(y)| dγ.
Tl1Result tl1_distance(const FieldOnMeasure& a, const FieldOnMeasure& b,
                       const Tl1Solver& solver = {});

/// Minimum-cost perfect matching on an n×n cost; returns target of each row.
std::vector<Eigen::Index> linear_assignment(
    Eigen::Index n, const std::function<double(Eigen::Index, Eigen::Index)>& cost);

/// Minimizes the largest |x_i − y_σ(i)| over permutations σ.
std::vector<Eigen::Index> bottleneck_assignment(const Eigen::MatrixXd& x,
                                                const Eigen::MatrixXd& y);

struct TransportMap {
  enum class Objective { MinSup, MinSum };
  EmpiricalMeasure source;
  EmpiricalMeasure target;
  std::vector<Eigen::Index> assignment;  // source atom → target atom
  double sup_displacement = 0.0;         // max_i |x_i − T(x_i)|
  Objective objective = Objective::MinSup;
};

TransportMap build_transport_map(const EmpiricalMeasure& reference,
                                 const EmpiricalMeasure& cloud,
                                 TransportMap::Objective objective = TransportMap::Objective::MinSup);

struct ScalingDiagnostics {
  Eigen::Index n = 0;
  double eps = 0.0;
  double sup_norm_ratio = 0.0;    // n^{1/d} ‖Id − T‖∞ / (log n)^{1/d}
  double first_diff_ratio = 0.0;  // ‖Id − T‖∞ / ε
  double second_diff_ratio = 0.0; // sup |T(x+εv) − 2T(x) + T(x−εv)| / ε²
  std::size_t probes = 0;
};

/// ±e_k plus the two diagonals (1,…,1)/√d and (1,−1,…)/√d.
std::vector<Eigen::VectorXd> default_probe_directions(int d);

ScalingDiagnostics scaling_diagnostics(const TransportMap& map, double eps,
                                       const std::vector<Eigen::VectorXd>& probe_dirs = {});

struct ConvergingPairReport {
  std::vector<Eigen::Index> n;
  std::vector<double> displacement;  // ∫ |x − S_n(x)| dν
  std::vector<double> field_error;   // ∫ |u(x) − u_n(S_n(x))| dν
  bool lipschitz_bound_holds = true;
  bool pass = false;
};

/// Both integrals over ν use the maps' common grid source as quadrature.
ConvergingPairReport tl1_converging_pair_check(const DisplacementField& u,
                                               const std::vector<TransportMap>& maps);

}  // namespace bdgraphtv
