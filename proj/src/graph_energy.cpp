#include "bdgraphtv/graph_energy.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "bdgraphtv/cell_list.hpp"
#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/parallel.hpp"

namespace bdgraphtv {

NodeField::NodeField(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1) throw ArgumentError("node field needs dimension >= 1");
  if (!values_.allFinite()) throw ArgumentError("node field has non-finite entries");
}

NodeField NodeField::sample(const DisplacementField& u, const EmpiricalMeasure& cloud) {
  if (u.dim() != cloud.dim()) throw ArgumentError("field and cloud dimensions differ");
  Eigen::MatrixXd vals(cloud.dim(), cloud.size());
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    u.evaluate(cloud.point(i), {vals.col(i).data(), static_cast<std::size_t>(cloud.dim())});
  return NodeField(std::move(vals));
}

namespace {

void check_inputs(const EmpiricalMeasure& cloud, const NodeField& u, const Kernel& k,
                  double eps) {
  if (u.size() != cloud.size())
    throw ArgumentError("node field length does not match the point count");
  if (u.dim() != cloud.dim()) throw ArgumentError("node field dimension mismatch");
  if (k.dimension() != cloud.dim()) throw ArgumentError("kernel dimension mismatch");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ArgumentError("eps must be positive");
}

// η_ε(X_i − X_j)|(u_i − u_j)·(X_i − X_j)|; returns false when the weight is 0.
inline bool pair_term(const double* xi, const double* xj, const double* ui,
                      const double* uj, int d, const RescaledKernel& ke, double cutoff,
                      double& term) {
  double r2 = 0.0, proj = 0.0;
  for (int k = 0; k < d; ++k) {
    const double dx = xi[k] - xj[k];
    r2 += dx * dx;
    proj += (ui[k] - uj[k]) * dx;
  }
  const double r = std::sqrt(r2);
  if (r >= cutoff) return false;
  const double w = ke.at_distance(r);
  if (!(w > 0.0)) return false;
  term = w * std::abs(proj);
  return true;
}

double pair_cutoff(const Kernel& k, double eps) {
  // Only truncated unbounded kernels need an explicit cut; compact profiles
  // vanish on their own.
  if (std::isinf(k.radius()) && k.truncation_radius()) return *k.truncation_radius() * eps;
  return std::numeric_limits<double>::infinity();
}

}  // namespace

GraphEnergyResult gtv_naive(const EmpiricalMeasure& cloud, const NodeField& u,
                            const Kernel& k, double eps, const GtvOptions& opts) {
  check_inputs(cloud, u, k, eps);
  const RescaledKernel ke = rescale(k, eps);
  const Eigen::Index n = cloud.size();
  const int d = cloud.dim();
  const double cutoff = std::numeric_limits<double>::infinity();
  const double* X = cloud.points().data();
  const double* U = u.values().data();
  std::vector<double> rows(n, 0.0);
  std::vector<std::uint64_t> counts(n, 0);
  const int threads = thread_count(opts.threads);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (Eigen::Index i = 0; i < n; ++i) {
    if (opts.anchor && !opts.anchor->contains(cloud.point(i))) continue;
    double s = 0.0;
    std::uint64_t c = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double term = 0.0;
      if (pair_term(X + i * d, X + j * d, U + i * d, U + j * d, d, ke, cutoff, term)) {
        s += term;
        if (i != j) ++c;
      }
    }
    rows[i] = s;
    counts[i] = c;
  }
  long double total = 0.0L;
  GraphEnergyResult out;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += rows[i];
    out.pair_count += counts[i];
  }
  const double nn = static_cast<double>(n);
  out.value = static_cast<double>(total) / (eps * eps * nn * nn);
  out.eps = eps;
  return out;
}

GraphEnergyResult gtv_celllist(const EmpiricalMeasure& cloud, const NodeField& u,
                               const Kernel& k, double eps, const GtvOptions& opts) {
  check_inputs(cloud, u, k, eps);
  const double R = k.interaction_radius();
  const RescaledKernel ke = rescale(k, eps);
  const Eigen::Index n = cloud.size();
  const int d = cloud.dim();
  const double cutoff = pair_cutoff(k, eps);
  GraphEnergyResult out;
  out.eps = eps;
  if (n == 0) return out;

  std::vector<unsigned char> in_anchor(n, 1);
  if (opts.anchor)
    for (Eigen::Index i = 0; i < n; ++i) in_anchor[i] = opts.anchor->contains(cloud.point(i));

  const CellList cells(cloud.points(), R * eps * (1.0 + 1e-12));
  const std::size_t C = cells.cell_count();
  const double* X = cloud.points().data();
  const double* U = u.values().data();
  std::vector<double> partial(C, 0.0);
  std::vector<std::uint64_t> counts(C, 0);
  const int threads = thread_count(opts.threads);
#pragma omp parallel num_threads(threads)
  {
    std::vector<std::size_t> nb;
#pragma omp for schedule(dynamic, 8)
    for (std::size_t c = 0; c < C; ++c) {
      const auto mine = cells.members(c);
      double s = 0.0;
      std::uint64_t cnt = 0;
      auto visit = [&](Eigen::Index i, Eigen::Index j) {
        double term = 0.0;
        if (pair_term(X + i * d, X + j * d, U + i * d, U + j * d, d, ke, cutoff, term)) {
          s += term * static_cast<double>(in_anchor[i] + in_anchor[j]);
          cnt += static_cast<std::uint64_t>(in_anchor[i] + in_anchor[j]);
        }
      };
      for (std::size_t a = 0; a < mine.size(); ++a)
        for (std::size_t b = a + 1; b < mine.size(); ++b) visit(mine[a], mine[b]);
      cells.neighbours(c, true, false, nb);
      for (std::size_t c2 : nb)
        for (Eigen::Index i : mine)
          for (Eigen::Index j : cells.members(c2)) visit(i, j);
      partial[c] = s;
      counts[c] = cnt;
    }
  }
  long double total = 0.0L;
  for (std::size_t c = 0; c < C; ++c) {
    total += partial[c];
    out.pair_count += counts[c];
  }
  const double nn = static_cast<double>(n);
  out.value = static_cast<double>(total) / (eps * eps * nn * nn);
  return out;
}

// ------------------------------------------------------------------ oracle

namespace {

constexpr int kShards = 64;

struct ShardSums {
  double sum = 0.0;
  double sum2 = 0.0;
  std::uint64_t attempts = 0;
  std::size_t evals = 0;
};

}  // namespace

OracleResult gtv_expectation_oracle(const Domain& dom, const Density& rho,
                                    const DisplacementField& u, const Kernel& k,
                                    double eps, const OracleOptions& opts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ArgumentError("eps must be positive");
  const int d = dom.dim();
  if (u.dim() != d || k.dimension() != d || rho.domain().dim() != d)
    throw ArgumentError("oracle: dimension mismatch");
  if (opts.mc_nodes < 2) throw ArgumentError("oracle needs at least 2 MC nodes");
  const Domain& outer = opts.anchor ? *opts.anchor : dom;
  if (outer.dim() != d) throw ArgumentError("anchor dimension mismatch");

  const double R = k.integration_radius();
  const double ball = unit_ball_volume(d) * std::pow(R, d);
  const double scale = outer.volume() * ball / eps;
  // Between two rigid pieces the integrand vanishes unless x lies within R·ε
  // of the jump surface, so x outside that slab is rejected without an
  // integrand evaluation (it still counts as a zero sample).
  const bool slab = u.kind() == DisplacementField::Kind::PiecewiseRigid && u.pieces_rigid();
  const double slab_width = R * eps;

  std::vector<ShardSums> shards(kShards);
  const int threads = thread_count(opts.threads);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int s = 0; s < kShards; ++s) {
    std::mt19937_64 rng(shard_seed(opts.seed, static_cast<std::uint64_t>(s)));
    const std::size_t quota =
        opts.mc_nodes / kShards + (static_cast<std::size_t>(s) < opts.mc_nodes % kShards);
    const std::uint64_t max_attempts = 1000ULL * std::max<std::size_t>(quota, 1) + 1000000ULL;
    std::vector<double> x(d), y(d), xi(d), ux(d), uy(d);
    ShardSums& acc = shards[s];
    while (acc.evals < quota && acc.attempts < max_attempts) {
      outer.sample_uniform(rng, x);
      ++acc.attempts;
      if (slab && !(std::abs(u.side(x)) < slab_width)) continue;
      sample_ball(rng, R, xi);
      ++acc.evals;
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        y[c] = x[c] + eps * xi[c];
        r2 += xi[c] * xi[c];
      }
      const double eta = k.profile(std::sqrt(r2));
      if (!(eta > 0.0) || !dom.contains(y) || !dom.contains(x)) continue;
      u.evaluate(x, ux);
      u.evaluate(y, uy);
      double proj = 0.0;
      for (int c = 0; c < d; ++c) proj += (uy[c] - ux[c]) * xi[c];
      const double v = scale * eta * std::abs(proj) * rho(x) * rho(y);
      acc.sum += v;
      acc.sum2 += v * v;
    }
  }
  long double sum = 0.0L, sum2 = 0.0L;
  std::uint64_t N = 0;
  OracleResult out;
  for (const ShardSums& s : shards) {
    sum += s.sum;
    sum2 += s.sum2;
    N += s.attempts;
    out.nodes += s.evals;
  }
  const long double mean = sum / N;
  const long double var = N > 1 ? (sum2 / N - mean * mean) * N / (N - 1.0L) : 0.0L;
  out.value = static_cast<double>(mean);
  out.std_error = std::sqrt(std::max(0.0, static_cast<double>(var / N)));
  return out;
}

}  // namespace bdgraphtv
