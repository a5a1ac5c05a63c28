#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bdgraphtv/config.hpp"
#include "bdgraphtv/transport.hpp"

namespace bdgraphtv {

struct ConvergenceRow {
  std::int64_t n = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  double gtv_value = 0.0;
  double tv_eta_value = 0.0;
  /// |gtv − tv|/tv, or gtv itself when tv = 0 (see rel_err_absolute).
  double rel_err = 0.0;
  bool rel_err_absolute = false;
  double wallclock_ms = 0.0;
  // Interior-restricted variant: pairs anchored in D shrunk by b·ε, compared
  // with TV_η on the same shrunk domain.
  double gtv_interior = 0.0;
  double tv_eta_interior = 0.0;
  double rel_err_interior = 0.0;
  bool interior_valid = false;
  /// "ok" or the error message of a failed row.
  std::string status = "ok";
};

std::vector<ConvergenceRow> run_convergence_study(const ExperimentConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
  std::vector<std::string> notes;
};

/// Median rel_err per n (or the interior column).
std::vector<std::pair<std::int64_t, double>> median_rel_err(const std::vector<ConvergenceRow>& rows,
                                                            bool interior = false);

/// Least squares of log(median rel_err) on log n. Needs >= 3 distinct n with
/// >= 3 successful rows each; zero medians are skipped with a note.
RateFit fit_rate(const std::vector<ConvergenceRow>& rows, bool interior = false);

struct DiagnosticsRow {
  ScalingDiagnostics diag;
  std::string status = "ok";
};

/// MinSup maps from grid_reference to the first seed's cloud at every n.
std::vector<DiagnosticsRow> run_transport_diagnostics(const ExperimentConfig& cfg);

struct ReportOptions {
  bool wallclock = true;
};

/// Creates the directory and checks it is writable; throws IoError.
void preflight_output_dir(const std::filesystem::path& dir);

/// results.csv, results_aux.csv, diagnostics.csv and rel_err.svg (the plot
/// only when at least one n has a successful row).
void emit_report(const std::vector<ConvergenceRow>& rows,
                 const std::vector<DiagnosticsRow>& diagnostics,
                 const std::filesystem::path& dir, const ReportOptions& opts = {});

/// Handwritten log-log SVG of (n, median) points with an optional fit line.
std::string render_svg(const std::vector<std::pair<std::int64_t, double>>& points,
                       const RateFit* fit);

}  // namespace bdgraphtv
