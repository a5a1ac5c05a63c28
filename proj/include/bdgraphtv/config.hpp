#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bdgraphtv/domain.hpp"
#include "bdgraphtv/field.hpp"
#include "bdgraphtv/kernels.hpp"

namespace bdgraphtv {

struct EpsRule {
  enum class Kind { PowerLaw, Explicit };
  Kind kind = Kind::PowerLaw;
  double c = 0.6;
  double exponent = 0.25;
  std::vector<double> values;  // Explicit: one ε per schedule entry

  double eps(std::size_t index, double n) const;
};

/// Outcome of the bandwidth-regime check on a schedule.
struct EpsValidation {
  bool ok = false;
  /// (log n)^{1/d} n^{-1/d} ε_n^{-2} at every schedule entry.
  std::vector<double> ratios;
  std::string message;
};

/// PowerLaw rules are accepted iff exponent <= 1/(2d) (ratios non-increasing
/// in n); explicit lists iff the ratios are non-increasing or max/min <= 10.
EpsValidation validate_eps_rule(const EpsRule& rule, const std::vector<std::int64_t>& n_schedule,
                                int d);

struct ExperimentConfig {
  // Raw sections, kept so builders can be re-run and echoed into reports.
  std::string domain_json;
  std::string density_json;
  std::string kernel_json;
  std::string field_json;

  int dim = 2;
  std::vector<std::int64_t> n_schedule;
  EpsRule eps_rule;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "bdgraphtv_out";
  bool report_wallclock = true;
  bool interior_variant = true;
  bool diagnostics = false;
  int threads = 0;
  QuadratureSpec quadrature;

  Domain domain() const;
  Density density() const;
  Kernel kernel() const;
  DisplacementField field() const;
  double eps_for(std::size_t index) const;
};

/// Parses and validates a JSON configuration; throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builders for individual JSON sections (shared with the CLI).
Domain domain_from_json(const std::string& text);
Density density_from_json(const std::string& text, const Domain& dom);
Kernel kernel_from_json(const std::string& text, int d);
DisplacementField field_from_json(const std::string& text, const Domain& dom);

}  // namespace bdgraphtv
