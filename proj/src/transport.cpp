#include "bdgraphtv/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "bdgraphtv/cell_list.hpp"
#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
  return (a.col(i) - b.col(j)).norm();
}

}  // namespace

// ------------------------------------------------------------ TransportPlan

TransportPlan::TransportPlan(Eigen::Index n_source, Eigen::Index n_target,
                             std::vector<PlanEntry> entries)
    : ns_(n_source), nt_(n_target), entries_(std::move(entries)) {
  for (const PlanEntry& e : entries_) {
    if (e.source < 0 || e.source >= ns_ || e.target < 0 || e.target >= nt_)
      throw ArgumentError("transport plan entry out of range");
    if (!(e.mass >= 0.0)) throw ArgumentError("transport plan mass must be non-negative");
  }
}

double TransportPlan::marginal_error() const {
  if (ns_ == 0 || nt_ == 0) return 0.0;
  std::vector<double> rows(ns_, 0.0), cols(nt_, 0.0);
  for (const PlanEntry& e : entries_) {
    rows[e.source] += e.mass;
    cols[e.target] += e.mass;
  }
  double err = 0.0;
  for (double r : rows) err = std::max(err, std::abs(r - 1.0 / ns_));
  for (double c : cols) err = std::max(err, std::abs(c - 1.0 / nt_));
  return err;
}

double TransportPlan::total_mass() const {
  double s = 0.0;
  for (const PlanEntry& e : entries_) s += e.mass;
  return s;
}

// -------------------------------------------------------- linear assignment

std::vector<Eigen::Index> linear_assignment(
    Eigen::Index n, const std::function<double(Eigen::Index, Eigen::Index)>& cost) {
  if (n < 0) throw ArgumentError("assignment size must be non-negative");
  // Shortest augmenting paths with dual potentials (1-based internally).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Eigen::Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Eigen::Index i0 = p[j0];
      double delta = kInf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Eigen::Index> out(n);
  for (Eigen::Index j = 1; j <= n; ++j) out[p[j] - 1] = j - 1;
  return out;
}

// ------------------------------------------------------ bottleneck matching

namespace {

struct Edge {
  double d;
  std::int32_t i, j;
};

class HopcroftKarp {
 public:
  HopcroftKarp(int n, const std::vector<Edge>& edges, std::size_t count) : n_(n) {
    start_.assign(n + 1, 0);
    for (std::size_t e = 0; e < count; ++e) ++start_[edges[e].i + 1];
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    adj_.resize(count);
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t e = 0; e < count; ++e) adj_[fill[edges[e].i]++] = edges[e].j;
  }

  int solve() {
    match_l_.assign(n_, -1);
    match_r_.assign(n_, -1);
    dist_.assign(n_, 0);
    int matched = 0;
    while (bfs()) {
      it_.assign(start_.begin(), start_.end() - 1);
      for (int i = 0; i < n_; ++i)
        if (match_l_[i] < 0 && dfs(i)) ++matched;
    }
    return matched;
  }
  const std::vector<int>& match() const { return match_l_; }

 private:
  bool bfs() {
    std::queue<int> q;
    bool found = false;
    for (int i = 0; i < n_; ++i) {
      if (match_l_[i] < 0) {
        dist_[i] = 0;
        q.push(i);
      } else {
        dist_[i] = -1;
      }
    }
    while (!q.empty()) {
      const int i = q.front();
      q.pop();
      for (int e = start_[i]; e < start_[i + 1]; ++e) {
        const int r = match_r_[adj_[e]];
        if (r < 0) {
          found = true;
        } else if (dist_[r] < 0) {
          dist_[r] = dist_[i] + 1;
          q.push(r);
        }
      }
    }
    return found;
  }

  bool dfs(int i) {
    for (int& e = it_[i]; e < start_[i + 1]; ++e) {
      const int j = adj_[e];
      const int r = match_r_[j];
      if (r < 0 || (dist_[r] == dist_[i] + 1 && dfs(r))) {
        match_l_[i] = j;
        match_r_[j] = i;
        ++e;
        return true;
      }
    }
    dist_[i] = -1;
    return false;
  }

  int n_;
  std::vector<int> start_, adj_, it_, match_l_, match_r_, dist_;
};

// All (i, j) with |x_i − y_j| <= r, sorted by distance then indices.
std::vector<Edge> edges_within(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double r) {
  const Eigen::Index n = x.cols();
  const int d = static_cast<int>(x.rows());
  Eigen::MatrixXd all(d, 2 * n);
  all.leftCols(n) = x;
  all.rightCols(n) = y;
  const double scale = std::max(1.0, all.cwiseAbs().maxCoeff());
  const CellList cells(all, std::max(r, 1e-12 * scale));
  std::vector<Edge> edges;
  std::vector<std::size_t> nb;
  for (std::size_t c = 0; c < cells.cell_count(); ++c) {
    cells.neighbours(c, false, true, nb);
    for (Eigen::Index a : cells.members(c)) {
      if (a >= n) continue;
      for (std::size_t c2 : nb)
        for (Eigen::Index b : cells.members(c2)) {
          if (b < n) continue;
          const double dd = dist(x, a, y, b - n);
          if (dd <= r) edges.push_back({dd, static_cast<std::int32_t>(a),
                                        static_cast<std::int32_t>(b - n)});
        }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& p, const Edge& q) {
    if (p.d != q.d) return p.d < q.d;
    if (p.i != q.i) return p.i < q.i;
    return p.j < q.j;
  });
  return edges;
}

}  // namespace

std::vector<Eigen::Index> bottleneck_assignment(const Eigen::MatrixXd& x,
                                                const Eigen::MatrixXd& y) {
  const Eigen::Index n = x.cols();
  if (y.cols() != n || x.rows() != y.rows())
    throw ArgumentError("bottleneck assignment needs equal-size point sets");
  if (n > std::numeric_limits<std::int32_t>::max() / 2)
    throw ArgumentError("bottleneck assignment size too large");
  if (n == 0) return {};
  // Lower bound: every atom must reach its nearest partner.
  double r = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    r = std::max(r, (y.colwise() - x.col(i)).colwise().norm().minCoeff());
  std::vector<Edge> edges;
  while (true) {
    edges = edges_within(x, y, r);
    HopcroftKarp hk(static_cast<int>(n), edges, edges.size());
    if (hk.solve() == n) break;
    r = r > 0.0 ? 1.5 * r : 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
  }
  // Candidate thresholds: prefixes ending at a change of edge length.
  std::vector<std::size_t> cuts;
  for (std::size_t k = 1; k <= edges.size(); ++k)
    if (k == edges.size() || edges[k].d != edges[k - 1].d) cuts.push_back(k);
  std::size_t lo = 0, hi = cuts.size() - 1;  // cuts[hi] is feasible
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    HopcroftKarp hk(static_cast<int>(n), edges, cuts[mid]);
    if (hk.solve() == n)
      hi = mid;
    else
      lo = mid + 1;
  }
  HopcroftKarp hk(static_cast<int>(n), edges, cuts[hi]);
  hk.solve();
  const std::vector<int>& best = hk.match();
  return {best.begin(), best.end()};
}

// ----------------------------------------------------------------- TL1

namespace {

void check_field_measure(const FieldOnMeasure& f) {
  if (f.values.size() != f.measure.size())
    throw ArgumentError("field length does not match its measure");
}

Tl1Result solve_exact(const Eigen::MatrixXd& C) {
  const Eigen::Index n = C.rows();
  if (n > 4096) throw UnsupportedError("exact assignment is limited to n <= 4096");
  const auto sigma = linear_assignment(n, [&C](Eigen::Index i, Eigen::Index j) { return C(i, j); });
  Tl1Result out;
  std::vector<PlanEntry> entries;
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    s += C(i, sigma[i]);
    entries.push_back({i, sigma[i], 1.0 / n});
  }
  out.value = s / n;
  out.plan = TransportPlan(n, n, std::move(entries));
  return out;
}

// Successive shortest paths on the dense bipartite graph; supplies are m per
// source and n per target so all flows are integral.
Tl1Result solve_lp(const Eigen::MatrixXd& C) {
  const Eigen::Index n = C.rows(), m = C.cols();
  const Eigen::Index V = n + m;
  std::vector<std::int64_t> supply(n, m), demand(m, n);
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> flow =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, m);
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<Eigen::Index> parent(V);
  std::vector<char> done(V);
  std::int64_t remaining = n * m;
  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(parent.begin(), parent.end(), -1);
    for (Eigen::Index i = 0; i < n; ++i)
      if (supply[i] > 0) dist[i] = 0.0;
    for (Eigen::Index it = 0; it < V; ++it) {
      Eigen::Index u = -1;
      for (Eigen::Index w = 0; w < V; ++w)
        if (!done[w] && dist[w] < kInf && (u < 0 || dist[w] < dist[u])) u = w;
      if (u < 0) break;
      done[u] = 1;
      if (u < n) {
        for (Eigen::Index j = 0; j < m; ++j) {
          if (done[n + j]) continue;
          const double nd = dist[u] + std::max(0.0, C(u, j) + pot[u] - pot[n + j]);
          if (nd < dist[n + j]) {
            dist[n + j] = nd;
            parent[n + j] = u;
          }
        }
      } else {
        const Eigen::Index j = u - n;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (flow(i, j) <= 0 || done[i] || supply[i] > 0) continue;
          const double nd = dist[u] + std::max(0.0, -C(i, j) + pot[u] - pot[i]);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = u;
          }
        }
      }
    }
    Eigen::Index t = -1;
    for (Eigen::Index j = 0; j < m; ++j)
      if (demand[j] > 0 && dist[n + j] < kInf && (t < 0 || dist[n + j] < dist[t])) t = n + j;
    if (t < 0) throw ConvergenceError("min-cost flow found no augmenting path", 0.0);
    std::int64_t push = demand[t - n];
    Eigen::Index w = t;
    while (parent[w] >= 0) {
      const Eigen::Index pw = parent[w];
      if (pw >= n) push = std::min(push, flow(w, pw - n));  // backward edge target→source
      w = pw;
    }
    push = std::min(push, supply[w]);
    if (push <= 0) throw ConvergenceError("min-cost flow made no progress", 0.0);
    const Eigen::Index s = w;
    w = t;
    while (parent[w] >= 0) {
      const Eigen::Index pw = parent[w];
      if (pw < n)
        flow(pw, w - n) += push;
      else
        flow(w, pw - n) -= push;
      w = pw;
    }
    supply[s] -= push;
    demand[t - n] -= push;
    remaining -= push;
    const double dt = dist[t];
    for (Eigen::Index v = 0; v < V; ++v) pot[v] += std::min(dist[v], dt);
  }
  Tl1Result out;
  std::vector<PlanEntry> entries;
  long double s = 0.0L;
  const double unit = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (flow(i, j) > 0) {
        const double mass = flow(i, j) * unit;
        entries.push_back({i, j, mass});
        s += static_cast<long double>(C(i, j)) * mass;
      }
  out.value = static_cast<double>(s);
  out.plan = TransportPlan(n, m, std::move(entries));
  return out;
}

double logsumexp(const double* v, Eigen::Index n, Eigen::Index stride) {
  double mx = -kInf;
  for (Eigen::Index k = 0; k < n; ++k) mx = std::max(mx, v[k * stride]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) s += std::exp(v[k * stride] - mx);
  return mx + std::log(s);
}

constexpr Eigen::Index kNewtonMaxAtoms = 2048;

// Entropic semi-dual in f: g is the exact soft c-transform, so columns of the
// plan have the target marginals and the residual lives in the row sums.
class SemiDual {
 public:
  SemiDual(const Eigen::MatrixXd& C, double reg)
      : C_(C), reg_(reg), n_(C.rows()), m_(C.cols()),
        la_(-std::log(static_cast<double>(n_))), lb_(-std::log(static_cast<double>(m_))),
        work_(n_, m_) {}

  void update_f(Eigen::VectorXd& f, const Eigen::VectorXd& g) {
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < m_; ++j) work_(i, j) = (g[j] - C_(i, j)) / reg_;
    for (Eigen::Index i = 0; i < n_; ++i) f[i] = reg_ * (la_ - logsumexp(&work_(i, 0), m_, n_));
  }
  void update_g(const Eigen::VectorXd& f, Eigen::VectorXd& g) {
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < m_; ++j) work_(i, j) = (f[i] - C_(i, j)) / reg_;
    for (Eigen::Index j = 0; j < m_; ++j) g[j] = reg_ * (lb_ - logsumexp(&work_(0, j), n_, 1));
  }
  // Row sums of the plan minus 1/n; g must be the transform of f.
  Eigen::VectorXd residual(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    Eigen::VectorXd r(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < m_; ++j) row += std::exp((f[i] + g[j] - C_(i, j)) / reg_);
      r[i] = row - std::exp(la_);
    }
    return r;
  }

  // Damped Newton step on the row residual; returns false when no step helps.
  bool newton_step(Eigen::VectorXd& f, Eigen::VectorXd& g, double& err) {
    Eigen::MatrixXd P(n_, m_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < m_; ++j) P(i, j) = std::exp((f[i] + g[j] - C_(i, j)) / reg_);
    // Jacobian of the residual is L/reg with L the Laplacian of the weights
    // w_ik = Σ_j P_ij P_kj / b_j; the diagonal is summed from the weights.
    const double inv_b = static_cast<double>(m_);
    Eigen::MatrixXd L = -(P * P.transpose()) * inv_b;
    L.diagonal().setZero();
    L.diagonal() = -L.rowwise().sum();
    const Eigen::VectorXd r = residual(f, g);
    const Eigen::Index k = n_ - 1;
    Eigen::VectorXd step = Eigen::VectorXd::Zero(n_);
    if (k > 0) {
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(L.bottomRightCorner(k, k));
      if (ldlt.info() != Eigen::Success) return false;
      step.tail(k) = -reg_ * ldlt.solve(r.tail(k));
    }
    if (!step.allFinite()) return false;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      Eigen::VectorXd f2 = f + t * step, g2(m_);
      update_g(f2, g2);
      const double e2 = residual(f2, g2).cwiseAbs().sum();
      if (e2 < (1.0 - 1e-4 * t) * err) {
        f = std::move(f2);
        g = std::move(g2);
        err = e2;
        return true;
      }
    }
    return false;
  }

 private:
  const Eigen::MatrixXd& C_;
  double reg_;
  Eigen::Index n_, m_;
  double la_, lb_;
  Eigen::MatrixXd work_;
};

Tl1Result solve_sinkhorn(const Eigen::MatrixXd& C, const Tl1Solver& solver) {
  const double reg = solver.reg;
  if (!(reg > 0.0) || !std::isfinite(reg)) throw ArgumentError("Sinkhorn needs reg > 0");
  const Eigen::Index n = C.rows(), m = C.cols();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(m);
  // reg is annealed from the cost scale down to the target, each stage
  // warm-starting the next; stalled stages switch to Newton steps.
  std::vector<double> stages{reg};
  const double scale = C.cwiseAbs().maxCoeff();
  while (stages.back() < scale && stages.size() < 60) stages.push_back(2.0 * stages.back());
  std::reverse(stages.begin(), stages.end());
  constexpr int kPlainIters = 500;
  bool converged = false;
  int it = 0;
  for (std::size_t st = 0; st < stages.size() && it < solver.max_iter; ++st) {
    SemiDual sd(C, stages[st]);
    const bool last = st + 1 == stages.size();
    const double tol = last ? solver.tol : std::max(solver.tol, 1e-6);
    double err = kInf;
    for (int local = 0; it < solver.max_iter; ++it, ++local) {
      sd.update_f(f, g);
      sd.update_g(f, g);
      if (local % 10 == 9 || it + 1 == solver.max_iter) {
        err = sd.residual(f, g).cwiseAbs().sum();
        if (err < tol) break;
        if (local + 1 >= kPlainIters && n <= kNewtonMaxAtoms) break;
      }
    }
    if (it < solver.max_iter) ++it;
    while (!(err < tol) && it < solver.max_iter && n <= kNewtonMaxAtoms) {
      ++it;
      if (!sd.newton_step(f, g, err)) break;
    }
    if (last) converged = err < tol;
  }
  // Round to an exactly feasible plan.
  Eigen::MatrixXd P(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) P(i, j) = std::exp((f[i] + g[j] - C(i, j)) / reg);
  const double a = 1.0 / n, b = 1.0 / m;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = P.row(i).sum();
    if (r > a) P.row(i) *= a / r;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double c = P.col(j).sum();
    if (c > b) P.col(j) *= b / c;
  }
  Eigen::VectorXd ea(n), eb(m);
  for (Eigen::Index i = 0; i < n; ++i) ea[i] = a - P.row(i).sum();
  for (Eigen::Index j = 0; j < m; ++j) eb[j] = b - P.col(j).sum();
  const double ea1 = ea.cwiseAbs().sum();
  if (ea1 > 0.0) P += ea * eb.transpose() / ea1;
  long double primal = 0.0L;
  std::vector<PlanEntry> entries;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double mass = std::max(0.0, P(i, j));
      primal += static_cast<long double>(C(i, j)) * mass;
      if (mass > 0.0) entries.push_back({i, j, mass});
    }
  // Dual lower bound from the double c-transform of f.
  Eigen::VectorXd gc(m), fc(n);
  for (Eigen::Index j = 0; j < m; ++j) gc[j] = (C.col(j) - f).minCoeff();
  for (Eigen::Index i = 0; i < n; ++i) fc[i] = (C.row(i).transpose() - gc).minCoeff();
  const double dual = a * fc.sum() + b * gc.sum();
  Tl1Result out;
  out.value = static_cast<double>(primal);
  out.gap = std::max(0.0, out.value - dual);
  out.plan = TransportPlan(n, m, std::move(entries));
  if (!converged) {
    std::ostringstream os;
    os << "Sinkhorn did not converge in " << solver.max_iter << " iterations (gap " << out.gap
       << ")";
    throw ConvergenceError(os.str(), out.gap);
  }
  return out;
}

}  // namespace

Tl1Result tl1_distance(const FieldOnMeasure& a, const FieldOnMeasure& b,
                       const Tl1Solver& solver) {
  check_field_measure(a);
  check_field_measure(b);
  if (a.measure.dim() != b.measure.dim()) throw ArgumentError("TL1: point dimensions differ");
  if (a.values.dim() != b.values.dim()) throw ArgumentError("TL1: field dimensions differ");
  const Eigen::Index n = a.measure.size(), m = b.measure.size();
  Eigen::MatrixXd C(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      C(i, j) = dist(a.measure.points(), i, b.measure.points(), j) +
                dist(a.values.values(), i, b.values.values(), j);
  switch (solver.kind) {
    case Tl1Solver::Kind::ExactAssignment:
      if (n != m) throw ArgumentError("exact assignment needs equal atom counts");
      return solve_exact(C);
    case Tl1Solver::Kind::LP:
      return solve_lp(C);
    case Tl1Solver::Kind::Sinkhorn:
      return solve_sinkhorn(C, solver);
  }
  return {};
}

// ------------------------------------------------------------ transport maps

TransportMap build_transport_map(const EmpiricalMeasure& reference,
                                 const EmpiricalMeasure& cloud,
                                 TransportMap::Objective objective) {
  if (reference.size() != cloud.size())
    throw ArgumentError("transport map needs equal atom counts");
  if (reference.dim() != cloud.dim()) throw ArgumentError("transport map dimension mismatch");
  const Eigen::Index n = reference.size();
  const Eigen::MatrixXd& x = reference.points();
  const Eigen::MatrixXd& y = cloud.points();
  std::vector<Eigen::Index> sigma;
  if (objective == TransportMap::Objective::MinSum) {
    if (n > 4096) throw UnsupportedError("MinSum maps are limited to n <= 4096");
    sigma = linear_assignment(n, [&](Eigen::Index i, Eigen::Index j) { return dist(x, i, y, j); });
  } else {
    sigma = bottleneck_assignment(x, y);
  }
  TransportMap map{reference, cloud, std::move(sigma), 0.0, objective};
  for (Eigen::Index i = 0; i < n; ++i)
    map.sup_displacement = std::max(map.sup_displacement, dist(x, i, y, map.assignment[i]));
  return map;
}

std::vector<Eigen::VectorXd> default_probe_directions(int d) {
  if (d < 1) throw ArgumentError("dimension must be positive");
  std::vector<Eigen::VectorXd> dirs;
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e[k] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(d) / std::sqrt(static_cast<double>(d));
  Eigen::VectorXd alt(d);
  for (int k = 0; k < d; ++k) alt[k] = (k % 2 == 0 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(d));
  dirs.push_back(ones);
  dirs.push_back(alt);
  return dirs;
}

ScalingDiagnostics scaling_diagnostics(const TransportMap& map, double eps,
                                       const std::vector<Eigen::VectorXd>& probe_dirs) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  const auto& grid = map.source.grid();
  if (!grid) throw ArgumentError("scaling diagnostics need a grid_reference source");
  const Eigen::Index n = map.source.size();
  if (n < 2) throw ArgumentError("scaling diagnostics need n >= 2");
  if (eps < 2.0 * grid->spacing) {
    std::ostringstream os;
    os << "eps " << eps << " is below twice the grid spacing " << grid->spacing;
    throw ResolutionError(os.str());
  }
  const int d = map.source.dim();
  const auto dirs = probe_dirs.empty() ? default_probe_directions(d) : probe_dirs;
  for (const auto& v : dirs)
    if (v.size() != d) throw ArgumentError("probe direction dimension mismatch");

  ScalingDiagnostics out;
  out.n = n;
  out.eps = eps;
  const double nn = static_cast<double>(n);
  out.sup_norm_ratio =
      std::pow(nn, 1.0 / d) * map.sup_displacement / std::pow(std::log(nn), 1.0 / d);
  out.first_diff_ratio = map.sup_displacement / eps;

  const Eigen::MatrixXd& X = map.source.points();
  const Eigen::MatrixXd& Y = map.target.points();
  const Domain& dom = grid->domain;
  std::vector<Eigen::Index> stride(d, 1);
  for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * grid->counts[k + 1];
  std::vector<double> cell(d);
  for (int k = 0; k < d; ++k) cell[k] = (dom.hi()[k] - dom.lo()[k]) / grid->counts[k];

  auto nearest = [&](Eigen::Index i, const Eigen::VectorXd& delta) -> Eigen::Index {
    if (grid->regular) {
      Eigen::Index idx = 0, rest = i;
      for (int k = 0; k < d; ++k) {
        const Eigen::Index ik = rest / stride[k];
        rest %= stride[k];
        const Eigen::Index jk = std::clamp<Eigen::Index>(
            ik + static_cast<Eigen::Index>(std::round(delta[k] / cell[k])), 0,
            grid->counts[k] - 1);
        idx += jk * stride[k];
      }
      return idx;
    }
    const Eigen::VectorXd p = X.col(i) + delta;
    Eigen::Index best = 0;
    (X.colwise() - p).colwise().squaredNorm().minCoeff(&best);
    return best;
  };

  double worst = 0.0;
  std::vector<double> buf(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& v : dirs) {
      const Eigen::VectorXd delta = eps * v;
      const Eigen::VectorXd xp = X.col(i) + delta, xm = X.col(i) - delta;
      if (!dom.contains({xp.data(), static_cast<std::size_t>(d)}) ||
          !dom.contains({xm.data(), static_cast<std::size_t>(d)}))
        continue;
      const Eigen::Index ip = nearest(i, delta), im = nearest(i, -delta);
      const double sd =
          (Y.col(map.assignment[ip]) - 2.0 * Y.col(map.assignment[i]) + Y.col(map.assignment[im]))
              .norm();
      worst = std::max(worst, sd);
      ++out.probes;
    }
  }
  out.second_diff_ratio = worst / (eps * eps);
  return out;
}

ConvergingPairReport tl1_converging_pair_check(const DisplacementField& u,
                                               const std::vector<TransportMap>& maps) {
  ConvergingPairReport rep;
  const auto lip = u.lipschitz();
  for (const TransportMap& map : maps) {
    const Eigen::Index n = map.source.size();
    const int d = map.source.dim();
    if (u.dim() != d) throw ArgumentError("field and map dimensions differ");
    long double disp = 0.0L, ferr = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto x = map.source.point(i);
      const auto y = map.target.point(map.assignment[i]);
      const Eigen::VectorXd ux = u(x), uy = u(y);
      const double dx = dist(map.source.points(), i, map.target.points(), map.assignment[i]);
      const double du = (ux - uy).norm();
      disp += dx;
      ferr += du;
      if (lip && du > *lip * dx * (1.0 + 1e-12) + 1e-15) rep.lipschitz_bound_holds = false;
    }
    rep.n.push_back(n);
    rep.displacement.push_back(static_cast<double>(disp / n));
    rep.field_error.push_back(static_cast<double>(ferr / n));
  }
  if (rep.n.size() >= 2) {
    rep.pass = rep.displacement.back() <= 0.5 * rep.displacement.front() &&
               rep.field_error.back() <= 0.5 * rep.field_error.front() &&
               rep.lipschitz_bound_holds;
  }
  return rep;
}

}  // namespace bdgraphtv
