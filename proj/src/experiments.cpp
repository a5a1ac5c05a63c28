#include "bdgraphtv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "bdgraphtv/continuum_tv.hpp"
#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/graph_energy.hpp"
#include "bdgraphtv/io.hpp"
#include "bdgraphtv/parallel.hpp"

namespace bdgraphtv {

namespace {

double relative_error(double gtv, double tv, bool& absolute) {
  absolute = !(tv > 0.0);
  return absolute ? gtv : std::abs(gtv - tv) / std::max(tv, 1e-15);
}

}  // namespace

std::vector<ConvergenceRow> run_convergence_study(const ExperimentConfig& cfg) {
  const Domain dom = cfg.domain();
  const Density rho = cfg.density();
  const Kernel k = cfg.kernel();
  const DisplacementField u = cfg.field();
  const double tv_full = tv_eta(u, dom, rho, k, cfg.quadrature).value;
  const double b = k.interaction_radius();

  const std::size_t N = cfg.n_schedule.size();
  std::vector<std::optional<Domain>> inner(N);
  std::vector<double> tv_inner(N, 0.0);
  if (cfg.interior_variant) {
    for (std::size_t i = 0; i < N; ++i) {
      try {
        inner[i] = dom.shrunk(b * cfg.eps_for(i));
        tv_inner[i] = tv_eta(u, *inner[i], rho, k, cfg.quadrature).value;
      } catch (const Error&) {
        inner[i].reset();
      }
    }
  }

  std::vector<ConvergenceRow> rows;
  std::vector<std::size_t> row_n;
  for (std::size_t i = 0; i < N; ++i)
    for (std::uint64_t seed : cfg.seeds) {
      ConvergenceRow r;
      r.n = cfg.n_schedule[i];
      r.eps = cfg.eps_for(i);
      r.seed = seed;
      r.tv_eta_value = tv_full;
      rows.push_back(r);
      row_n.push_back(i);
    }

  const int pool = thread_count(cfg.threads);
  const int inner_threads = pool > 1 ? 1 : 0;
  const auto count = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(pool)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    ConvergenceRow& row = rows[r];
    const std::size_t i = row_n[r];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const EmpiricalMeasure cloud =
          sample(dom, rho, row.n, shard_seed(row.seed, static_cast<std::uint64_t>(row.n)));
      const NodeField values = NodeField::sample(u, cloud);
      GtvOptions opts;
      opts.threads = inner_threads;
      row.gtv_value = gtv_celllist(cloud, values, k, row.eps, opts).value;
      row.rel_err = relative_error(row.gtv_value, row.tv_eta_value, row.rel_err_absolute);
      if (inner[i]) {
        opts.anchor = inner[i];
        row.gtv_interior = gtv_celllist(cloud, values, k, row.eps, opts).value;
        row.tv_eta_interior = tv_inner[i];
        bool abs_inner = false;
        row.rel_err_interior = relative_error(row.gtv_interior, row.tv_eta_interior, abs_inner);
        row.interior_valid = true;
      }
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    row.wallclock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return rows;
}

std::vector<std::pair<std::int64_t, double>> median_rel_err(const std::vector<ConvergenceRow>& rows,
                                                            bool interior) {
  std::vector<std::int64_t> order;
  std::map<std::int64_t, std::vector<double>> groups;
  for (const ConvergenceRow& r : rows) {
    if (r.status != "ok" || (interior && !r.interior_valid)) continue;
    if (!groups.count(r.n)) order.push_back(r.n);
    groups[r.n].push_back(interior ? r.rel_err_interior : r.rel_err);
  }
  std::vector<std::pair<std::int64_t, double>> out;
  for (std::int64_t n : order) {
    auto v = groups[n];
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    out.emplace_back(n, m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]));
  }
  return out;
}

RateFit fit_rate(const std::vector<ConvergenceRow>& rows, bool interior) {
  std::map<std::int64_t, int> counts;
  for (const ConvergenceRow& r : rows)
    if (r.status == "ok" && (!interior || r.interior_valid)) ++counts[r.n];
  int eligible = 0;
  for (const auto& [n, c] : counts)
    if (c >= 3) ++eligible;
  if (eligible < 3) throw ArgumentError("fit_rate needs >= 3 distinct n with >= 3 seeds each");

  RateFit fit;
  std::vector<double> xs, ys;
  for (const auto& [n, med] : median_rel_err(rows, interior)) {
    if (counts[n] < 3) {
      fit.notes.push_back("n=" + std::to_string(n) + " skipped: fewer than 3 rows");
      continue;
    }
    if (!(med > 0.0)) {
      fit.notes.push_back("n=" + std::to_string(n) + " skipped: median rel_err is 0");
      continue;
    }
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(med));
  }
  fit.points = xs.size();
  if (xs.size() < 2) {
    fit.slope = fit.intercept = fit.r2 = std::nan("");
    fit.notes.push_back("fewer than 2 usable points");
    return fit;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

std::vector<DiagnosticsRow> run_transport_diagnostics(const ExperimentConfig& cfg) {
  const Domain dom = cfg.domain();
  const Density rho = cfg.density();
  std::vector<DiagnosticsRow> out;
  for (std::size_t i = 0; i < cfg.n_schedule.size(); ++i) {
    DiagnosticsRow row;
    const std::int64_t n = cfg.n_schedule[i];
    row.diag.n = n;
    row.diag.eps = cfg.eps_for(i);
    try {
      const EmpiricalMeasure ref = grid_reference(dom, rho, n);
      const EmpiricalMeasure cloud =
          sample(dom, rho, n, shard_seed(cfg.seeds.front(), static_cast<std::uint64_t>(n)));
      const TransportMap map = build_transport_map(ref, cloud, TransportMap::Objective::MinSup);
      row.diag = scaling_diagnostics(map, cfg.eps_for(i));
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

void preflight_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".bdgraphtv_write_probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "probe\n")) throw IoError("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

namespace {

std::string csv_cell(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

std::string fixed3(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

std::string render_svg(const std::vector<std::pair<std::int64_t, double>>& points,
                       const RateFit* fit) {
  const double W = 640, H = 420, L = 80, R = 30, T = 40, B = 60;
  std::vector<std::pair<double, double>> lp;
  for (const auto& [n, v] : points)
    if (v > 0.0) lp.emplace_back(std::log10(static_cast<double>(n)), std::log10(v));
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">median relative error vs n (log-log)</text>\n";
  if (lp.empty()) {
    os << "</svg>\n";
    return os.str();
  }
  double x0 = lp.front().first, x1 = x0, y0 = lp.front().second, y1 = y0;
  for (const auto& [x, y] : lp) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
  y0 = std::floor(y0 - 0.05);
  y1 = std::ceil(y1 + 0.05);
  const double padx = 0.05 * (x1 - x0);
  x0 -= padx;
  x1 += padx;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  for (const auto& [n, v] : points) {
    const double x = px(std::log10(static_cast<double>(n)));
    os << "<line x1=\"" << x << "\" y1=\"" << H - B << "\" x2=\"" << x << "\" y2=\"" << H - B + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << H - B + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << n
       << "</text>\n";
  }
  for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); ++e) {
    const double y = py(e);
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">n</text>\n";
  os << "<text x=\"18\" y=\"" << (T + H - B) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 "
     << (T + H - B) / 2 << ")\">median rel_err</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (const auto& [x, y] : lp) os << px(x) << "," << py(y) << " ";
  os << "\"/>\n";
  for (const auto& [x, y] : lp)
    os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  if (fit && std::isfinite(fit->slope)) {
    const double ln10 = std::log(10.0);
    auto fy = [&](double lx) { return (fit->intercept + fit->slope * lx * ln10) / ln10; };
    const double a = x0 + padx, b = x1 - padx;
    os << "<line x1=\"" << px(a) << "\" y1=\"" << py(fy(a)) << "\" x2=\"" << px(b) << "\" y2=\""
       << py(fy(b)) << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
    os << "<text x=\"" << W - R << "\" y=\"" << T + 10
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">"
       << "slope " << fit->slope << ", r2 " << fit->r2 << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_report(const std::vector<ConvergenceRow>& rows,
                 const std::vector<DiagnosticsRow>& diagnostics,
                 const std::filesystem::path& dir, const ReportOptions& opts) {
  preflight_output_dir(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("results.csv");
    f << "n,eps,seed,gtv,tv_eta,rel_err,wallclock_ms\n";
    for (const ConvergenceRow& r : rows) {
      const bool ok = r.status == "ok";
      f << r.n << "," << num(r.eps) << "," << r.seed << "," << (ok ? num(r.gtv_value) : "nan")
        << "," << num(r.tv_eta_value) << "," << (ok ? num(r.rel_err) : "nan") << ","
        << fixed3(opts.wallclock ? r.wallclock_ms : 0.0) << "\n";
    }
  }
  {
    auto f = open("results_aux.csv");
    f << "n,eps,seed,gtv_interior,tv_eta_interior,rel_err_interior,rel_err_absolute,status\n";
    for (const ConvergenceRow& r : rows) {
      const bool in = r.status == "ok" && r.interior_valid;
      f << r.n << "," << num(r.eps) << "," << r.seed << "," << (in ? num(r.gtv_interior) : "nan")
        << "," << (in ? num(r.tv_eta_interior) : "nan") << ","
        << (in ? num(r.rel_err_interior) : "nan") << "," << (r.rel_err_absolute ? 1 : 0) << ","
        << csv_cell(r.status) << "\n";
    }
  }
  {
    auto f = open("diagnostics.csv");
    f << "n,eps,sup_norm_ratio,first_diff_ratio,second_diff_ratio\n";
    for (const DiagnosticsRow& d : diagnostics) {
      if (d.status != "ok") continue;
      f << d.diag.n << "," << num(d.diag.eps) << "," << num(d.diag.sup_norm_ratio) << ","
        << num(d.diag.first_diff_ratio) << "," << num(d.diag.second_diff_ratio) << "\n";
    }
  }
  const auto meds = median_rel_err(rows);
  const auto svg_path = dir / "rel_err.svg";
  std::error_code ec;
  std::filesystem::remove(svg_path, ec);
  if (meds.empty()) return;
  std::optional<RateFit> fit;
  try {
    fit = fit_rate(rows);
  } catch (const ArgumentError&) {
  }
  std::ofstream f(svg_path);
  if (!f) throw IoError("cannot write " + svg_path.string());
  f << render_svg(meds, fit ? &*fit : nullptr);
}

}  // namespace bdgraphtv
