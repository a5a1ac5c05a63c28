#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "bdgraphtv/domain.hpp"
#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/field.hpp"
#include "bdgraphtv/kernels.hpp"

namespace bdgraphtv {

/// Line {y + tξ : t ∈ R} with ξ ≠ 0 and y ⟂ ξ.
struct SliceSpec {
  Eigen::VectorXd xi;
  Eigen::VectorXd y;

  SliceSpec(Eigen::VectorXd direction, Eigen::VectorXd offset);
  int dim() const { return static_cast<int>(xi.size()); }
};

/// t ↦ u(y + tξ) over the section {t : y + tξ ∈ D}.
class Slice {
 public:
  Slice(const DisplacementField& u, const Domain& dom, const SliceSpec& spec);

  bool empty() const { return section_.empty(); }
  const Interval& section() const { return section_; }
  /// Parameters for which both t and t + ε lie in the section.
  Interval shifted_section(double eps) const {
    if (empty()) return {};
    return {section_.lo, section_.hi - eps};
  }
  void operator()(double t, std::span<double> out) const {
    std::array<double, 16> x{};
    for (int k = 0; k < spec_.dim(); ++k) x[k] = spec_.y[k] + t * spec_.xi[k];
    u_->evaluate({x.data(), static_cast<std::size_t>(spec_.dim())}, out);
  }
  Eigen::VectorXd operator()(double t) const;
  const SliceSpec& spec() const { return spec_; }

 private:
  const DisplacementField* u_;
  SliceSpec spec_;
  Interval section_;
};

/// Slice of u, or an empty sentinel (Slice::empty()) when the line misses D.
Slice slice_field(const DisplacementField& u, const Domain& dom, const SliceSpec& spec);

struct SliceEnergy {
  double value = 0.0;
  std::size_t nodes = 0;
  /// Interval shorter than ε.
  bool degenerate = false;
};

/// (1/ε²) ∫_I |(v(t+ε) − v(t))·(T(t+ε) − T(t))| ρ(t+ε) ρ(t) dt by the
/// composite midpoint rule with max(min_nodes, ⌈32|I|/ε⌉) nodes.
/// `v` and `tr` are callables (double, std::span<double>) writing a vector of
/// length `dim`; `rho` maps double to double.
template <class V, class Tr, class Rho>
SliceEnergy slice_energy_1d(const V& v, const Tr& tr, const Rho& rho, Interval I, double eps,
                            int dim, std::size_t min_nodes = 1000) {
  if (!(eps > 0.0)) throw ArgumentError("slice energy needs eps > 0");
  if (dim < 1 || dim > 16) throw ArgumentError("slice energy supports 1 <= d <= 16");
  SliceEnergy out;
  out.degenerate = !(I.hi - I.lo >= eps);
  if (I.empty()) return out;
  const double len = I.hi - I.lo;
  const auto n = std::max<std::size_t>(min_nodes,
                                       static_cast<std::size_t>(std::ceil(32.0 * len / eps)));
  const double h = len / static_cast<double>(n);
  std::array<double, 16> v0{}, v1{}, t0{}, t1{};
  const std::span<double> s_v0(v0.data(), dim), s_v1(v1.data(), dim);
  const std::span<double> s_t0(t0.data(), dim), s_t1(t1.data(), dim);
  double sum = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    const double t = I.lo + (static_cast<double>(q) + 0.5) * h;
    v(t, s_v0);
    v(t + eps, s_v1);
    tr(t, s_t0);
    tr(t + eps, s_t1);
    double proj = 0.0;
    for (int k = 0; k < dim; ++k) proj += (v1[k] - v0[k]) * (t1[k] - t0[k]);
    if (proj != 0.0) sum += std::abs(proj) * rho(t + eps) * rho(t);
  }
  out.value = sum * h / (eps * eps);
  out.nodes = n;
  return out;
}

/// F^{ξ,y} for the identity transport: v = u(y + ·ξ), T(t) = y + tξ,
/// ρ restricted to the line, I = shifted section.
SliceEnergy slice_energy_identity(const DisplacementField& u, const Domain& dom,
                                  const Density& rho, const SliceSpec& spec, double eps,
                                  std::size_t min_nodes = 1000);

struct SlicingReport {
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double rel_err = 0.0;
  std::size_t lhs_nodes = 0;
  std::size_t rhs_nodes = 0;
};

/// Compares the double-integral oracle with
/// ∫_{R^d} η(ξ)|ξ| ∫_{Π^ξ} F^{ξ,y} dH^{d-1}(y) dξ, both by Monte Carlo.
SlicingReport verify_slicing_identity(const DisplacementField& u, const Domain& dom,
                                      const Density& rho, const Kernel& k, double eps,
                                      std::size_t mc_nodes, std::uint64_t seed,
                                      int threads = 0);

using SliceFn = std::function<void(double, std::span<double>)>;

struct LiminfProbeReport {
  std::vector<std::size_t> n;
  std::vector<double> eps;
  std::vector<double> values;
  double bound = 0.0;     // |(v(b) − v(a))·ξ|
  double tail_min = 0.0;  // min over the last `tail` schedule entries
  bool pass = false;
};

/// Evaluates F_n = slice energy of v_n on (a, b − ε_n) with T = Id along the
/// schedule and checks min over the tail ≥ bound − tolerance.
LiminfProbeReport liminf_probe_1d(const std::function<SliceFn(std::size_t)>& v_n,
                                  const SliceFn& v_limit, std::span<const double> xi,
                                  Interval I,
                                  const std::vector<std::pair<std::size_t, double>>& schedule,
                                  std::size_t tail = 3, double tolerance = 0.05);

/// n = 2^lo .. 2^hi with ε_n = ((log n)/n)^{1/2}.
std::vector<std::pair<std::size_t, double>> default_liminf_schedule(int lo = 8, int hi = 16);

}  // namespace bdgraphtv
