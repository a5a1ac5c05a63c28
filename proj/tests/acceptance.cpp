// One line per acceptance criterion; exit status 1 if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bdgraphtv/config.hpp"
#include "bdgraphtv/continuum_tv.hpp"
#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/experiments.hpp"
#include "bdgraphtv/graph_energy.hpp"
#include "bdgraphtv/kernels.hpp"
#include "bdgraphtv/slicing.hpp"
#include "bdgraphtv/transport.hpp"

using namespace bdgraphtv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("[%s] criterion %d: %s | %s | %.2f s (limit %.0f s)%s\n", ok ? "PASS" : "FAIL", id,
              title, o.detail.c_str(), secs, limit_s, in_time ? "" : " TIMEOUT");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Random cloud with coordinates k/1024 so rigid-motion arithmetic is exact.
EmpiricalMeasure dyadic_cloud(std::mt19937_64& rng, int d, Eigen::Index n) {
  std::uniform_int_distribution<int> coord(1, 1023);
  Eigen::MatrixXd pts(d, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) pts(k, i) = coord(rng) / 1024.0;
  return EmpiricalMeasure(std::move(pts));
}

DisplacementField dyadic_rigid(std::mt19937_64& rng, int d) {
  std::uniform_int_distribution<int> m(-16, 16);
  Eigen::VectorXd c(d);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < d; ++k) c[k] = m(rng) / 8.0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      W(i, j) = m(rng) / 8.0;
      W(j, i) = -W(i, j);
    }
  return DisplacementField::rigid(c, W);
}

std::string study_config(const char* field) {
  return std::string(R"({
    "domain": {"type": "box", "lo": [0, 0], "hi": [1, 1]},
    "density": {"type": "uniform"},
    "kernel": {"type": "indicator", "c": 1, "b": 1},
    "field": )") + field + R"(,
    "n_schedule": [1024, 2048, 4096, 8192, 16384],
    "eps_rule": {"type": "power_law", "c": 0.6, "exponent": 0.25},
    "seeds": [1, 2, 3, 4, 5],
    "report": {"wallclock": false, "interior": true}
  })";
}

double median_at(const std::vector<std::pair<std::int64_t, double>>& meds, std::int64_t n) {
  for (const auto& [m, v] : meds)
    if (m == n) return v;
  return std::nan("");
}

}  // namespace

int main() {
  const double pi = std::numbers::pi;

  criterion(1, "kernel norm oracle phi(I) = pi/2, d=2", 5.0, [&]() {
    const Kernel k = Kernel::indicator(1.0, 1.0, 2);
    QuadratureSpec polar;
    polar.method = QuadratureSpec::Method::Polar;
    const double p = phi_eta(k, SymMatrix::identity(2), polar).value;
    QuadratureSpec mc;
    mc.method = QuadratureSpec::Method::MonteCarlo;
    mc.mc_nodes = 1'000'000;
    mc.seed = 20240521;
    const QuadratureResult m = phi_eta(k, SymMatrix::identity(2), mc);
    const bool ok = std::abs(p - pi / 2) <= 1e-4 && std::abs(m.value - pi / 2) <= 3 * m.error_estimate;
    return Outcome{ok, fmt("polar %.10f (err %.2e), MC %.6f +- %.2e (|dev| %.2f se)", p,
                           std::abs(p - pi / 2), m.value, m.error_estimate,
                           std::abs(m.value - pi / 2) / m.error_estimate)};
  });

  criterion(2, "rigid motions are in the kernel of GTV", 30.0, [&]() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> nd(2, 500);
    std::normal_distribution<double> g;
    const double eps_choices[] = {0.0625, 0.125, 0.25};
    int zero_fail = 0, inv_fail = 0;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const int d = 1 + t % 3;
      const EmpiricalMeasure cloud = dyadic_cloud(rng, d, nd(rng));
      const Kernel k = Kernel::indicator(1.0, 1.0, d);
      const double eps = eps_choices[t % 3];
      const DisplacementField rigid = dyadic_rigid(rng, d);
      const NodeField ur = NodeField::sample(rigid, cloud);
      if (gtv_naive(cloud, ur, k, eps).value != 0.0 || gtv_celllist(cloud, ur, k, eps).value != 0.0)
        ++zero_fail;
      Eigen::MatrixXd base(d, cloud.size());
      for (Eigen::Index i = 0; i < base.size(); ++i) base.data()[i] = g(rng);
      const NodeField u(base);
      const NodeField shifted(base + ur.values());
      for (bool naive : {true, false}) {
        const double a = naive ? gtv_naive(cloud, u, k, eps).value : gtv_celllist(cloud, u, k, eps).value;
        const double b =
            naive ? gtv_naive(cloud, shifted, k, eps).value : gtv_celllist(cloud, shifted, k, eps).value;
        const double rel = std::abs(a - b) / std::max(std::abs(a), 1e-300);
        worst = std::max(worst, rel);
        if (rel > 1e-12) ++inv_fail;
      }
    }
    return Outcome{zero_fail == 0 && inv_fail == 0,
                   fmt("50 clouds: non-zero rigid energies %d, invariance failures %d, worst rel %.2e",
                       zero_fail, inv_fail, worst)};
  });

  criterion(3, "cell list equals naive double loop", 60.0, [&]() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> nd(200, 2000);
    std::uniform_real_distribution<double> ue(0.03, 0.3);
    std::normal_distribution<double> g;
    double worst = 0.0;
    int count_mismatch = 0;
    for (int t = 0; t < 20; ++t) {
      const int d = 1 + t % 3;
      const Domain dom = Domain::unit_box(d);
      const EmpiricalMeasure cloud = sample(dom, Density::uniform(dom), nd(rng), rng());
      Eigen::MatrixXd vals(d, cloud.size());
      for (Eigen::Index i = 0; i < vals.size(); ++i) vals.data()[i] = g(rng);
      const NodeField u(vals);
      const Kernel k = t % 2 ? Kernel::indicator(1.5, 1.0, d)
                             : Kernel::piecewise_constant({{0.5, 2.0}, {1.0, 1.0}, {1.5, 0.25}}, d);
      const double eps = ue(rng);
      const GraphEnergyResult a = gtv_naive(cloud, u, k, eps);
      const GraphEnergyResult b = gtv_celllist(cloud, u, k, eps);
      worst = std::max(worst, std::abs(a.value - b.value) / a.value);
      if (a.pair_count != b.pair_count) ++count_mismatch;
    }
    return Outcome{worst <= 1e-12 && count_mismatch == 0,
                   fmt("20 instances: worst rel diff %.2e, pair-count mismatches %d", worst,
                       count_mismatch)};
  });

  criterion(4, "mean-field consistency, A=diag(1,-1), n=5000, eps=0.1", 300.0, [&]() {
    const Domain dom = Domain::unit_box(2);
    const Density rho = Density::uniform(dom);
    const Kernel k = Kernel::indicator(1.0, 1.0, 2);
    Eigen::MatrixXd A(2, 2);
    A << 1, 0, 0, -1;
    const DisplacementField u = DisplacementField::linear(A);
    const Eigen::Index n = 5000;
    const double eps = 0.1;
    std::vector<double> vals;
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const EmpiricalMeasure cloud = sample(dom, rho, n, 1000 + s);
      vals.push_back(gtv_celllist(cloud, NodeField::sample(u, cloud), k, eps).value);
    }
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double se_mean = std::sqrt(ss / (vals.size() - 1) / vals.size());
    OracleOptions oo;
    oo.mc_nodes = 10'000'000;
    oo.seed = 99;
    const OracleResult o = gtv_expectation_oracle(dom, rho, u, k, eps, oo);
    const double pf = OracleResult::pair_factor(n);
    const double target = pf * o.value;
    const double tol = 3.0 * std::sqrt(se_mean * se_mean + pf * pf * o.std_error * o.std_error);
    return Outcome{std::abs(mean - target) <= tol,
                   fmt("mean %.6f (se %.1e) vs (n-1)/n*oracle %.6f (se %.1e): |diff| %.2e <= %.2e",
                       mean, se_mean, target, o.std_error, std::abs(mean - target), tol)};
  });

  criterion(5, "TL1 exact assignment: metric axioms and brute force", 60.0, [&]() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> nd(1, 7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto instance = [&](int n, int d, int k) {
      Eigen::MatrixXd p(d, n), w(k, n);
      for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = U(rng);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = U(rng);
      return std::make_pair(EmpiricalMeasure(p), NodeField(w));
    };
    int brute_fail = 0, sym_fail = 0, tri_fail = 0;
    for (int t = 0; t < 100; ++t) {
      const int n = nd(rng), d = 1 + t % 3, kdim = 1 + t % 2;
      const auto a = instance(n, d, kdim), b = instance(n, d, kdim), c = instance(n, d, kdim);
      const double ab = tl1_distance({a.first, a.second}, {b.first, b.second}).value;
      const double ba = tl1_distance({b.first, b.second}, {a.first, a.second}).value;
      const double bc = tl1_distance({b.first, b.second}, {c.first, c.second}).value;
      const double ac = tl1_distance({a.first, a.second}, {c.first, c.second}).value;
      // brute force over all n! assignments, summed in row order like the solver
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = std::numeric_limits<double>::infinity();
      do {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          s += (a.first.points().col(i) - b.first.points().col(perm[i])).norm() +
               (a.second.values().col(i) - b.second.values().col(perm[i])).norm();
        best = std::min(best, s / n);
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (ab != best) ++brute_fail;
      if (std::abs(ab - ba) > 1e-10) ++sym_fail;
      if (ac > ab + bc + 1e-9) ++tri_fail;
    }
    return Outcome{brute_fail == 0 && sym_fail == 0 && tri_fail == 0,
                   fmt("100 instances: brute-force mismatches %d, symmetry %d, triangle %d",
                       brute_fail, sym_fail, tri_fail)};
  });

  criterion(6, "transport scaling: n^{1/2}|Id-T|/(log n)^{1/2} bounded, n=2^8..2^13", 600.0, [&]() {
    const Domain dom = Domain::unit_box(2);
    const Density rho = Density::uniform(dom);
    std::vector<double> ratios;
    std::ostringstream os;
    for (int e = 8; e <= 13; ++e) {
      const Eigen::Index n = Eigen::Index{1} << e;
      const EmpiricalMeasure ref = grid_reference(dom, rho, n);
      const EmpiricalMeasure cloud = sample(dom, rho, n, 600 + e);
      const TransportMap map = build_transport_map(ref, cloud, TransportMap::Objective::MinSup);
      const double nn = static_cast<double>(n);
      ratios.push_back(std::sqrt(nn) * map.sup_displacement / std::sqrt(std::log(nn)));
      os << (e > 8 ? " " : "") << fmt("%.3f", ratios.back());
    }
    const auto [mn, mx] = std::minmax_element(ratios.end() - 3, ratios.end());
    const double spread = *mx / *mn;
    return Outcome{spread <= 3.0, "ratios [" + os.str() + "], max/min of last three " +
                                      fmt("%.3f", spread)};
  });

  criterion(7, "slicing identity, Linear(I) and planar jump, eps in {0.1, 0.05}", 300.0, [&]() {
    const Domain dom = Domain::unit_box(2);
    const Density rho = Density::uniform(dom);
    const Kernel k = Kernel::indicator(1.0, 1.0, 2);
    const DisplacementField lin = DisplacementField::linear(Eigen::MatrixXd::Identity(2, 2));
    const DisplacementField jump =
        DisplacementField::planar_jump(2, 0, 0.5, Eigen::Vector2d(1.0, 0.0));
    double worst = 0.0;
    std::ostringstream os;
    for (const auto* u : {&lin, &jump})
      for (double eps : {0.1, 0.05}) {
        const SlicingReport r = verify_slicing_identity(*u, dom, rho, k, eps, 1'000'000, 7);
        worst = std::max(worst, r.rel_err);
        os << fmt("%s eps=%.2f lhs %.5f rhs %.5f rel %.2e; ", u == &lin ? "linear" : "jump", eps,
                  r.lhs, r.rhs, r.rel_err);
      }
    return Outcome{worst <= 0.02, os.str() + fmt("worst %.2e", worst)};
  });

  criterion(8, "convergence trend, Linear(I) volume part", 900.0, [&]() {
    const ExperimentConfig cfg = parse_config(study_config(R"({"type": "identity"})"));
    const auto rows = run_convergence_study(cfg);
    const auto meds = median_rel_err(rows);
    const double first = median_at(meds, 1024), last = median_at(meds, 16384);
    return Outcome{last <= 0.10 && last < first,
                   fmt("median rel_err vs pi/2: n=2^10 %.4f, n=2^14 %.4f", first, last)};
  });

  criterion(9, "convergence trend, planar jump part (interior-restricted target)", 900.0, [&]() {
    const ExperimentConfig cfg = parse_config(
        study_config(R"({"type": "jump", "axis": 0, "position": 0.5, "jump": [1, 0]})"));
    const auto rows = run_convergence_study(cfg);
    const double tv = rows.front().tv_eta_value;
    const auto meds = median_rel_err(rows, true);
    const auto full = median_rel_err(rows, false);
    const double first = median_at(meds, 1024), last = median_at(meds, 16384);
    return Outcome{std::abs(tv - pi / 4) <= 1e-12 && last <= 0.15 && last < first,
                   fmt("full target %.6f; interior median rel_err n=2^10 %.4f, n=2^14 %.4f "
                       "(full-domain %.4f, %.4f)",
                       tv, first, last, median_at(full, 1024), median_at(full, 16384))};
  });

  criterion(10, "eps-rule validation: exponent 1/(2d) accepted, 1/d rejected", 1.0, [&]() {
    auto cfg_with = [](double exponent) {
      return std::string(R"({"domain": {"type": "box", "lo": [0, 0], "hi": [1, 1]},
        "kernel": {"type": "indicator"}, "field": {"type": "identity"},
        "n_schedule": [1024, 2048, 4096, 8192, 16384], "seeds": [1],
        "eps_rule": {"type": "power_law", "c": 0.6, "exponent": )") +
             std::to_string(exponent) + "}}";
    };
    bool accepted = false, rejected = false, cites = false;
    std::string msg;
    try {
      (void)parse_config(cfg_with(0.25));
      accepted = true;
    } catch (const ConfigError& e) {
      msg = e.what();
    }
    try {
      (void)parse_config(cfg_with(0.5));
    } catch (const ConfigError& e) {
      rejected = true;
      msg = e.what();
      cites = msg.find("values over the schedule: [") != std::string::npos;
    }
    return Outcome{accepted && rejected && cites, "diagnostic: " + msg};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
