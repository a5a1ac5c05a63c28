#include "bdgraphtv/slicing.hpp"

#include <random>

#include "bdgraphtv/graph_energy.hpp"
#include "bdgraphtv/parallel.hpp"

namespace bdgraphtv {

SliceSpec::SliceSpec(Eigen::VectorXd direction, Eigen::VectorXd offset)
    : xi(std::move(direction)), y(std::move(offset)) {
  if (xi.size() < 1 || xi.size() != y.size())
    throw ArgumentError("slice direction and offset must have equal dimension");
  if (xi.size() > 16) throw ArgumentError("slices support d <= 16");
  if (!xi.allFinite() || !y.allFinite()) throw ArgumentError("slice spec must be finite");
  if (xi.isZero(0.0)) throw ArgumentError("slice direction must be non-zero");
  const double tol = 1e-12 * std::max(1.0, xi.norm() * y.norm());
  if (std::abs(xi.dot(y)) > tol) throw ArgumentError("slice offset must be orthogonal to ξ");
}

Slice::Slice(const DisplacementField& u, const Domain& dom, const SliceSpec& spec)
    : u_(&u), spec_(spec) {
  if (u.dim() != spec.dim() || dom.dim() != spec.dim())
    throw ArgumentError("slice: dimension mismatch");
  section_ = dom.line_section({spec_.y.data(), static_cast<std::size_t>(spec_.dim())},
                              {spec_.xi.data(), static_cast<std::size_t>(spec_.dim())});
}

Eigen::VectorXd Slice::operator()(double t) const {
  Eigen::VectorXd out(spec_.dim());
  (*this)(t, {out.data(), static_cast<std::size_t>(spec_.dim())});
  return out;
}

Slice slice_field(const DisplacementField& u, const Domain& dom, const SliceSpec& spec) {
  return Slice(u, dom, spec);
}

SliceEnergy slice_energy_identity(const DisplacementField& u, const Domain& dom,
                                  const Density& rho, const SliceSpec& spec, double eps,
                                  std::size_t min_nodes) {
  const Slice s(u, dom, spec);
  const int d = spec.dim();
  if (s.empty()) {
    SliceEnergy out;
    out.degenerate = true;
    return out;
  }
  auto tr = [&spec, d](double t, std::span<double> out) {
    for (int k = 0; k < d; ++k) out[k] = spec.y[k] + t * spec.xi[k];
  };
  const bool flat = rho.is_constant();
  const double rho0 = flat ? rho(dom.center()) : 0.0;
  auto rho_t = [&](double t) {
    if (flat) return rho0;
    std::array<double, 16> x{};
    for (int k = 0; k < d; ++k) x[k] = spec.y[k] + t * spec.xi[k];
    return rho({x.data(), static_cast<std::size_t>(d)});
  };
  if (u.kind() == DisplacementField::Kind::Smooth)
    return slice_energy_1d(s, tr, rho_t, s.shifted_section(eps), eps, d, min_nodes);

  // u(y + tξ) = a + t b on each side of the jump surface
  struct LinePiece {
    std::array<double, 16> a{}, b{};
  };
  auto restrict_to_line = [&spec, d](const AffineMap& m) {
    LinePiece p;
    for (int i = 0; i < d; ++i) {
      double a = m.c[i], b = 0.0;
      for (int j = 0; j < d; ++j) {
        a += m.A(i, j) * spec.y[j];
        b += m.A(i, j) * spec.xi[j];
      }
      p.a[i] = a;
      p.b[i] = b;
    }
    return p;
  };
  const bool split = u.kind() == DisplacementField::Kind::PiecewiseRigid;
  const LinePiece minus = restrict_to_line(u.minus());
  const LinePiece plus = split ? restrict_to_line(u.plus()) : minus;
  double s0 = 0.0, s1 = 0.0;
  if (split) {
    const Hyperplane& h = u.surface();
    for (int k = 0; k < d; ++k) {
      s0 += (spec.y[k] - h.point[k]) * h.normal[k];
      s1 += spec.xi[k] * h.normal[k];
    }
  }
  auto v = [&, d](double t, std::span<double> out) {
    const LinePiece& p = split && s0 + t * s1 >= 0.0 ? plus : minus;
    for (int k = 0; k < d; ++k) out[k] = p.a[k] + t * p.b[k];
  };
  return slice_energy_1d(v, tr, rho_t, s.shifted_section(eps), eps, d, min_nodes);
}

namespace {

constexpr int kShards = 64;

// Extent of D projected on the unit vector e.
Interval projected_extent(const Domain& dom, const Eigen::VectorXd& e) {
  const int d = dom.dim();
  if (dom.kind() == Domain::Kind::Ball) {
    double c = 0.0;
    for (int k = 0; k < d; ++k) c += dom.center()[k] * e[k];
    return {c - dom.radius(), c + dom.radius()};
  }
  double lo = 0.0, hi = 0.0;
  for (int k = 0; k < d; ++k) {
    const double a = dom.lo()[k] * e[k], b = dom.hi()[k] * e[k];
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  return {lo, hi};
}

}  // namespace

SlicingReport verify_slicing_identity(const DisplacementField& u, const Domain& dom,
                                      const Density& rho, const Kernel& k, double eps,
                                      std::size_t mc_nodes, std::uint64_t seed, int threads) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  const int d = dom.dim();
  if (u.dim() != d || k.dimension() != d) throw ArgumentError("slicing: dimension mismatch");
  if (mc_nodes < 2) throw ArgumentError("slicing check needs at least 2 MC nodes");

  SlicingReport rep;
  OracleOptions oo;
  oo.mc_nodes = mc_nodes;
  oo.seed = seed;
  oo.threads = threads;
  const OracleResult lhs = gtv_expectation_oracle(dom, rho, u, k, eps, oo);
  rep.lhs = lhs.value;
  rep.lhs_se = lhs.std_error;
  rep.lhs_nodes = lhs.nodes;

  const double R = k.integration_radius();
  const double ball = unit_ball_volume(d) * std::pow(R, d);
  std::vector<double> sums(kShards, 0.0), sums2(kShards, 0.0);
  std::vector<std::size_t> nodes(kShards, 0);
  const std::uint64_t rhs_seed = seed ^ 0xA5A5A5A55A5A5A5AULL;
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(threads))
  for (int s = 0; s < kShards; ++s) {
    std::mt19937_64 rng(shard_seed(rhs_seed, static_cast<std::uint64_t>(s)));
    const std::size_t quota =
        mc_nodes / kShards + (static_cast<std::size_t>(s) < mc_nodes % kShards);
    std::vector<double> xi_buf(d);
    Eigen::VectorXd xi(d), y(d);
    double sum = 0.0, sum2 = 0.0;
    std::size_t used = 0;
    for (std::size_t q = 0; q < quota; ++q) {
      sample_ball(rng, R, xi_buf);
      for (int c = 0; c < d; ++c) xi[c] = xi_buf[c];
      const double r = xi.norm();
      const double eta = k.profile(r);
      double v = 0.0;
      if (eta > 0.0 && r > 0.0) {
        // orthonormal basis of ξ^⊥ from a Householder reflection of ξ/|ξ|
        Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(d, d);
        if (d > 1) {
          Eigen::HouseholderQR<Eigen::MatrixXd> qr((xi / r).eval());
          Q = qr.householderQ();
        }
        double area = 1.0;
        y.setZero();
        for (int j = 1; j < d; ++j) {
          const Eigen::VectorXd e = Q.col(j);
          const Interval ext = projected_extent(dom, e);
          const double sj = ext.lo + (ext.hi - ext.lo) * uniform01(rng);
          area *= ext.hi - ext.lo;
          y += sj * e;
        }
        y -= (y.dot(xi) / (r * r)) * xi;  // remove round-off along ξ
        const SliceEnergy F = slice_energy_identity(u, dom, rho, SliceSpec(xi, y), eps);
        used += F.nodes;
        v = ball * area * eta * r * F.value;
      }
      sum += v;
      sum2 += v * v;
    }
    sums[s] = sum;
    sums2[s] = sum2;
    nodes[s] = used;
  }
  long double S = 0.0L, S2 = 0.0L;
  for (int s = 0; s < kShards; ++s) {
    S += sums[s];
    S2 += sums2[s];
    rep.rhs_nodes += nodes[s];
  }
  const long double N = static_cast<long double>(mc_nodes);
  const long double mean = S / N;
  const long double var = (S2 / N - mean * mean) * N / (N - 1.0L);
  rep.rhs = static_cast<double>(mean);
  rep.rhs_se = std::sqrt(std::max(0.0, static_cast<double>(var / N)));
  if (rep.lhs == 0.0 && rep.rhs == 0.0)
    rep.rel_err = 0.0;
  else
    rep.rel_err = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.lhs), 1e-15);
  return rep;
}

LiminfProbeReport liminf_probe_1d(const std::function<SliceFn(std::size_t)>& v_n,
                                  const SliceFn& v_limit, std::span<const double> xi,
                                  Interval I,
                                  const std::vector<std::pair<std::size_t, double>>& schedule,
                                  std::size_t tail, double tolerance) {
  const int d = static_cast<int>(xi.size());
  if (d < 1 || d > 16) throw ArgumentError("liminf probe supports 1 <= d <= 16");
  if (I.empty()) throw ArgumentError("liminf probe needs a non-empty interval");
  if (schedule.empty()) throw ArgumentError("liminf probe needs a schedule");
  LiminfProbeReport rep;
  std::vector<double> va(d), vb(d);
  v_limit(I.lo, va);
  v_limit(I.hi, vb);
  double b = 0.0;
  for (int k = 0; k < d; ++k) b += (vb[k] - va[k]) * xi[k];
  rep.bound = std::abs(b);
  auto tr = [&xi, d](double t, std::span<double> out) {
    for (int k = 0; k < d; ++k) out[k] = t * xi[k];
  };
  auto one = [](double) { return 1.0; };
  for (const auto& [n, eps] : schedule) {
    const SliceFn v = v_n(n);
    const SliceEnergy F = slice_energy_1d(v, tr, one, Interval{I.lo, I.hi - eps}, eps, d);
    rep.n.push_back(n);
    rep.eps.push_back(eps);
    rep.values.push_back(F.value);
  }
  const std::size_t t = std::min(std::max<std::size_t>(tail, 1), rep.values.size());
  rep.tail_min = *std::min_element(rep.values.end() - static_cast<std::ptrdiff_t>(t),
                                   rep.values.end());
  rep.pass = rep.tail_min >= rep.bound - tolerance;
  return rep;
}

std::vector<std::pair<std::size_t, double>> default_liminf_schedule(int lo, int hi) {
  std::vector<std::pair<std::size_t, double>> out;
  for (int e = lo; e <= hi; ++e) {
    const double n = std::ldexp(1.0, e);
    out.emplace_back(static_cast<std::size_t>(n), std::sqrt(std::log(n) / n));
  }
  return out;
}

}  // namespace bdgraphtv
