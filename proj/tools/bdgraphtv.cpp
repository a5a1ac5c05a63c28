#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bdgraphtv/config.hpp"
#include "bdgraphtv/continuum_tv.hpp"
#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/experiments.hpp"
#include "bdgraphtv/graph_energy.hpp"
#include "bdgraphtv/io.hpp"
#include "bdgraphtv/slicing.hpp"
#include "bdgraphtv/transport.hpp"

using namespace bdgraphtv;
using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Kernel kernel_for(const std::string& config, const std::string& kernel_json, double c, double b,
                  int d) {
  if (!kernel_json.empty()) return kernel_from_json(kernel_json, d);
  if (!config.empty()) return load_config(config).kernel();
  return Kernel::indicator(c, b, d);
}

int cmd_run(const std::string& config, const std::string& out_dir) {
  ExperimentConfig cfg = load_config(config);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  preflight_output_dir(cfg.output_dir);
  const auto rows = run_convergence_study(cfg);
  std::vector<DiagnosticsRow> diags;
  if (cfg.diagnostics) diags = run_transport_diagnostics(cfg);
  emit_report(rows, diags, cfg.output_dir, {cfg.report_wallclock});
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (r.status != "ok") {
      ++failed;
      std::cerr << "row n=" << r.n << " seed=" << r.seed << " failed: " << r.status << "\n";
    }
  for (const auto& d : diags)
    if (d.status != "ok") std::cerr << "diagnostics n=" << d.diag.n << ": " << d.status << "\n";
  json summary{{"rows", rows.size()}, {"failed", failed}, {"output", cfg.output_dir.string()}};
  json meds = json::array();
  for (const auto& [n, m] : median_rel_err(rows)) meds.push_back({{"n", n}, {"median_rel_err", m}});
  summary["median_rel_err"] = meds;
  try {
    const RateFit fit = fit_rate(rows);
    summary["fit"] = {{"slope", finite_or_null(fit.slope)}, {"intercept", finite_or_null(fit.intercept)},
                      {"r2", finite_or_null(fit.r2)}};
  } catch (const ArgumentError& e) {
    summary["fit"] = e.what();
  }
  std::cout << summary.dump() << "\n";
  return failed == 0 ? 0 : 3;
}

int cmd_gtv(const std::string& points, const std::string& field, const std::string& config,
            const std::string& kernel_json, double c, double b, double eps, bool naive) {
  const EmpiricalMeasure cloud = read_points_csv(points);
  const NodeField u = read_field_csv(field);
  const Kernel k = kernel_for(config, kernel_json, c, b, cloud.dim());
  const GraphEnergyResult r = naive ? gtv_naive(cloud, u, k, eps) : gtv_celllist(cloud, u, k, eps);
  std::cout << json{{"value", r.value}, {"pair_count", r.pair_count}, {"eps", r.eps}}.dump()
            << "\n";
  return 0;
}

int cmd_tl1(const std::string& pa, const std::string& fa, const std::string& pb,
            const std::string& fb, const std::string& solver, double reg) {
  const EmpiricalMeasure ma = read_points_csv(pa), mb = read_points_csv(pb);
  const NodeField ua = read_field_csv(fa), ub = read_field_csv(fb);
  Tl1Solver s;
  if (solver == "exact")
    s = Tl1Solver::exact();
  else if (solver == "lp")
    s = Tl1Solver::lp();
  else
    s = Tl1Solver::sinkhorn(reg);
  const Tl1Result r = tl1_distance({ma, ua}, {mb, ub}, s);
  std::cout << json{{"value", r.value}, {"gap", r.gap}, {"solver", solver}}.dump() << "\n";
  return 0;
}

int cmd_tv_eta(const std::string& config, double interior_eps) {
  const ExperimentConfig cfg = load_config(config);
  Domain dom = cfg.domain();
  const Kernel k = cfg.kernel();
  if (interior_eps > 0.0) dom = dom.shrunk(k.interaction_radius() * interior_eps);
  const ContinuumTVResult r = tv_eta(cfg.field(), dom, cfg.density(), k, cfg.quadrature);
  std::cout << json{{"value", r.value}, {"volume_part", r.volume_part}, {"jump_part", r.jump_part},
                    {"quad_error", r.quad_error}}.dump()
            << "\n";
  return 0;
}

int cmd_slice_check(const std::string& config, double eps, std::size_t mc, std::uint64_t seed) {
  const ExperimentConfig cfg = load_config(config);
  const SlicingReport r = verify_slicing_identity(cfg.field(), cfg.domain(), cfg.density(),
                                                  cfg.kernel(), eps, mc, seed, cfg.threads);
  std::cout << json{{"lhs", r.lhs}, {"lhs_se", r.lhs_se}, {"rhs", r.rhs}, {"rhs_se", r.rhs_se},
                    {"rel_err", r.rel_err}, {"eps", eps}}.dump()
            << "\n";
  return 0;
}

int cmd_diagnostics(const std::string& config, const std::string& out) {
  const ExperimentConfig cfg = load_config(config);
  const auto rows = run_transport_diagnostics(cfg);
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw IoError("cannot write " + out);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << "n,eps,sup_norm_ratio,first_diff_ratio,second_diff_ratio\n";
  for (const auto& r : rows) {
    if (r.status != "ok") {
      std::cerr << "n=" << r.diag.n << ": " << r.status << "\n";
      continue;
    }
    os << r.diag.n << "," << format_double(r.diag.eps) << "," << format_double(r.diag.sup_norm_ratio)
       << "," << format_double(r.diag.first_diff_ratio) << ","
       << format_double(r.diag.second_diff_ratio) << "\n";
  }
  return 0;
}

int cmd_sample(const std::string& config, std::int64_t n, std::uint64_t seed,
               const std::string& points_out, const std::string& field_out) {
  const ExperimentConfig cfg = load_config(config);
  const EmpiricalMeasure cloud = sample(cfg.domain(), cfg.density(), n, seed);
  write_points_csv(points_out, cloud);
  if (!field_out.empty()) write_field_csv(field_out, NodeField::sample(cfg.field(), cloud));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph symmetric total variation on point clouds"};
  app.require_subcommand(1);

  std::string config, out_dir;
  auto* run = app.add_subcommand("run", "run a convergence study from a config file");
  run->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--output", out_dir, "override output.dir");

  std::string points, field, kernel_json;
  double c = 1.0, b = 1.0, eps = 0.0;
  bool naive = false;
  auto* gtv = app.add_subcommand("gtv", "graph energy of a field on a point cloud");
  gtv->add_option("--points", points, "points CSV (x0,...)")->required()->check(CLI::ExistingFile);
  gtv->add_option("--field", field, "field CSV (u0,...)")->required()->check(CLI::ExistingFile);
  gtv->add_option("--eps", eps, "interaction scale")->required();
  gtv->add_option("--config", config, "take the kernel from this config");
  gtv->add_option("--kernel", kernel_json, "kernel as inline JSON");
  gtv->add_option("--c", c, "indicator kernel height");
  gtv->add_option("--b", b, "indicator kernel radius");
  gtv->add_flag("--naive", naive, "use the plain double loop");

  std::string pa, fa, pb, fb, solver = "exact";
  double reg = 0.01;
  auto* tl1 = app.add_subcommand("tl1", "TL1 distance between two field/measure pairs");
  tl1->add_option("--points-a", pa)->required()->check(CLI::ExistingFile);
  tl1->add_option("--field-a", fa)->required()->check(CLI::ExistingFile);
  tl1->add_option("--points-b", pb)->required()->check(CLI::ExistingFile);
  tl1->add_option("--field-b", fb)->required()->check(CLI::ExistingFile);
  tl1->add_option("--solver", solver)->check(CLI::IsMember({"exact", "lp", "sinkhorn"}));
  tl1->add_option("--reg", reg, "Sinkhorn regularization");

  double interior_eps = 0.0;
  auto* tv = app.add_subcommand("tv-eta", "continuum limit energy of the configured field");
  tv->add_option("--config", config)->required()->check(CLI::ExistingFile);
  tv->add_option("--interior-eps", interior_eps, "shrink the domain by b*eps first");

  std::size_t mc = 1'000'000;
  std::uint64_t seed = 1;
  auto* slice = app.add_subcommand("slice-check", "compare double integral and sliced form");
  slice->add_option("--config", config)->required()->check(CLI::ExistingFile);
  slice->add_option("--eps", eps)->required();
  slice->add_option("--mc-nodes", mc);
  slice->add_option("--seed", seed);

  std::string out;
  auto* diag = app.add_subcommand("transport-diagnostics", "transport scaling ratios per n");
  diag->add_option("--config", config)->required()->check(CLI::ExistingFile);
  diag->add_option("--output", out, "CSV path (stdout if omitted)");

  std::int64_t n = 0;
  std::string field_out;
  auto* smp = app.add_subcommand("sample", "write a sampled cloud (and field) as CSV");
  smp->add_option("--config", config)->required()->check(CLI::ExistingFile);
  smp->add_option("--n", n)->required();
  smp->add_option("--seed", seed);
  smp->add_option("--points", points, "output points CSV")->required();
  smp->add_option("--field", field_out, "output field CSV");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out_dir);
    if (*gtv) return cmd_gtv(points, field, config, kernel_json, c, b, eps, naive);
    if (*tl1) return cmd_tl1(pa, fa, pb, fb, solver, reg);
    if (*tv) return cmd_tv_eta(config, interior_eps);
    if (*slice) return cmd_slice_check(config, eps, mc, seed);
    if (*diag) return cmd_diagnostics(config, out);
    if (*smp) return cmd_sample(config, n, seed, points, field_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
