#include "bdgraphtv/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string(what) + ": " + e.what());
  }
}

void allow_keys(const json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) fail("unknown key '" + k + "' in " + where);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail("missing '" + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail("bad '" + key + "' in " + where + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

Eigen::VectorXd vec(const json& j, const std::string& key, int d, const std::string& where) {
  const auto v = get<std::vector<double>>(j, key, where);
  if (static_cast<int>(v.size()) != d)
    fail("'" + key + "' in " + where + " must have " + std::to_string(d) + " entries");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), d);
}

Eigen::MatrixXd mat(const json& j, const std::string& key, int d, const std::string& where) {
  const auto rows = get<std::vector<std::vector<double>>>(j, key, where);
  if (static_cast<int>(rows.size()) != d) fail("'" + key + "' in " + where + " must be d x d");
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(rows[i].size()) != d)
      fail("'" + key + "' in " + where + " must be d x d");
    for (int k = 0; k < d; ++k) m(i, k) = rows[i][k];
  }
  return m;
}

template <class F>
auto wrap(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(std::string(what) + ": " + e.what());
  }
}

}  // namespace

// ------------------------------------------------------------------ EpsRule

double EpsRule::eps(std::size_t index, double n) const {
  if (kind == Kind::Explicit) {
    if (index >= values.size()) throw ConfigError("explicit eps list shorter than the schedule");
    return values[index];
  }
  return c * std::pow(std::log(n) / n, exponent);
}

EpsValidation validate_eps_rule(const EpsRule& rule, const std::vector<std::int64_t>& n_schedule,
                                int d) {
  EpsValidation out;
  if (d < 1) throw ArgumentError("dimension must be positive");
  std::ostringstream why;
  for (std::size_t i = 0; i < n_schedule.size(); ++i) {
    const double n = static_cast<double>(n_schedule[i]);
    const double eps = rule.eps(i, n);
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      out.message = "eps must be positive and finite at every schedule entry";
      return out;
    }
    out.ratios.push_back(std::pow(std::log(n), 1.0 / d) * std::pow(n, -1.0 / d) / (eps * eps));
  }
  auto list = [&out]() {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < out.ratios.size(); ++i) os << (i ? ", " : "") << out.ratios[i];
    os << "]";
    return os.str();
  };
  if (rule.kind == EpsRule::Kind::PowerLaw) {
    if (!(rule.c > 0.0)) {
      out.message = "power-law constant c must be positive";
      return out;
    }
    const double limit = 1.0 / (2.0 * d);
    if (rule.exponent > limit + 1e-12) {
      why << "eps_n = c((log n)/n)^" << rule.exponent << " shrinks faster than ((log n)/n)^"
          << limit << ": the ratio (log n)^{1/d} n^{-1/d} / eps_n^2 grows without bound; "
          << "values over the schedule: " << list();
      out.message = why.str();
      return out;
    }
    out.ok = true;
    out.message = "ratios " + list();
    return out;
  }
  if (out.ratios.empty()) {
    out.ok = true;
    return out;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < out.ratios.size(); ++i)
    if (out.ratios[i] > out.ratios[i - 1]) monotone = false;
  const auto [mn, mx] = std::minmax_element(out.ratios.begin(), out.ratios.end());
  const double spread = *mx / *mn;
  out.ok = monotone || spread <= 10.0;
  if (!out.ok) {
    why << "explicit eps list: ratio (log n)^{1/d} n^{-1/d} / eps_n^2 increases with max/min "
        << spread << " > 10; values over the schedule: " << list();
    out.message = why.str();
  } else {
    out.message = "ratios " + list();
  }
  return out;
}

// ----------------------------------------------------------------- builders

Domain domain_from_json(const std::string& text) {
  const json j = parse_json(text, "domain");
  const std::string type = get<std::string>(j, "type", "domain");
  return wrap("domain", [&]() {
    if (type == "box") {
      allow_keys(j, {"type", "lo", "hi"}, "domain");
      return Domain::box(get<std::vector<double>>(j, "lo", "domain"),
                         get<std::vector<double>>(j, "hi", "domain"));
    }
    if (type == "unit_box") {
      allow_keys(j, {"type", "d"}, "domain");
      return Domain::unit_box(get<int>(j, "d", "domain"));
    }
    if (type == "ball") {
      allow_keys(j, {"type", "center", "radius"}, "domain");
      return Domain::ball(get<std::vector<double>>(j, "center", "domain"),
                          get<double>(j, "radius", "domain"));
    }
    fail("domain type must be box, unit_box or ball (got '" + type + "')");
  });
}

Density density_from_json(const std::string& text, const Domain& dom) {
  const json j = parse_json(text, "density");
  const std::string type = get<std::string>(j, "type", "density");
  const int d = dom.dim();
  return wrap("density", [&]() {
    if (type == "uniform") {
      allow_keys(j, {"type"}, "density");
      return Density::uniform(dom);
    }
    if (type == "affine") {
      // ρ ∝ a0 + g·x, normalized to a probability density
      allow_keys(j, {"type", "a0", "gradient"}, "density");
      const double a0 = get<double>(j, "a0", "density");
      const Eigen::VectorXd g = vec(j, "gradient", d, "density");
      double lo = a0, hi = a0;
      if (dom.kind() == Domain::Kind::Box) {
        for (int k = 0; k < d; ++k) {
          lo += std::min(g[k] * dom.lo()[k], g[k] * dom.hi()[k]);
          hi += std::max(g[k] * dom.lo()[k], g[k] * dom.hi()[k]);
        }
      } else {
        double c = a0;
        for (int k = 0; k < d; ++k) c += g[k] * dom.center()[k];
        lo = c - g.norm() * dom.radius();
        hi = c + g.norm() * dom.radius();
      }
      if (!(lo > 0.0)) fail("affine density must stay positive on the domain");
      auto rho = [a0, g](std::span<const double> x) {
        double v = a0;
        for (std::size_t k = 0; k < x.size(); ++k) v += g[k] * x[k];
        return v;
      };
      return Density(dom, rho, lo, hi);
    }
    fail("density type must be uniform or affine (got '" + type + "')");
  });
}

Kernel kernel_from_json(const std::string& text, int d) {
  const json j = parse_json(text, "kernel");
  const std::string type = get<std::string>(j, "type", "kernel");
  if (j.contains("d") && get<int>(j, "d", "kernel") != d)
    fail("kernel dimension does not match the domain");
  return wrap("kernel", [&]() {
    if (type == "indicator") {
      allow_keys(j, {"type", "c", "b", "d"}, "kernel");
      return Kernel::indicator(get_or<double>(j, "c", 1.0, "kernel"),
                               get_or<double>(j, "b", 1.0, "kernel"), d);
    }
    if (type == "piecewise_constant") {
      allow_keys(j, {"type", "steps", "d"}, "kernel");
      std::vector<KernelStep> steps;
      for (const auto& s : get<std::vector<std::vector<double>>>(j, "steps", "kernel")) {
        if (s.size() != 2) fail("kernel steps are [radius, value] pairs");
        steps.push_back({s[0], s[1]});
      }
      return Kernel::piecewise_constant(std::move(steps), d);
    }
    if (type == "gaussian") {
      allow_keys(j, {"type", "sigma", "tail_fraction", "d"}, "kernel");
      const double sigma = get_or<double>(j, "sigma", 1.0, "kernel");
      if (!(sigma > 0.0)) fail("gaussian sigma must be positive");
      Kernel::CustomOptions opts;
      opts.tail_fraction = get_or<double>(j, "tail_fraction", 1e-8, "kernel");
      opts.name = "gaussian";
      return Kernel::custom(
          [sigma](double t) { return std::exp(-0.5 * t * t / (sigma * sigma)); },
          std::numeric_limits<double>::infinity(), d, opts);
    }
    fail("kernel type must be indicator, piecewise_constant or gaussian (got '" + type + "')");
  });
}

DisplacementField field_from_json(const std::string& text, const Domain& dom) {
  const json j = parse_json(text, "field");
  const std::string type = get<std::string>(j, "type", "field");
  const int d = dom.dim();
  return wrap("field", [&]() {
    if (type == "linear") {
      allow_keys(j, {"type", "A", "offset"}, "field");
      std::optional<Eigen::VectorXd> off;
      if (j.contains("offset")) off = vec(j, "offset", d, "field");
      return DisplacementField::linear(mat(j, "A", d, "field"), off);
    }
    if (type == "identity") {
      allow_keys(j, {"type"}, "field");
      return DisplacementField::linear(Eigen::MatrixXd::Identity(d, d));
    }
    if (type == "rigid") {
      allow_keys(j, {"type", "c", "W"}, "field");
      return DisplacementField::rigid(vec(j, "c", d, "field"), mat(j, "W", d, "field"));
    }
    if (type == "jump") {
      allow_keys(j, {"type", "axis", "position", "jump"}, "field");
      return DisplacementField::planar_jump(d, get<int>(j, "axis", "field"),
                                            get<double>(j, "position", "field"),
                                            vec(j, "jump", d, "field"));
    }
    if (type == "piecewise") {
      allow_keys(j, {"type", "point", "normal", "minus", "plus"}, "field");
      auto piece = [&](const char* key) {
        const json& p = j.at(key);
        allow_keys(p, {"c", "A"}, std::string("field.") + key);
        return AffineMap{vec(p, "c", d, key), mat(p, "A", d, key)};
      };
      if (!j.contains("minus") || !j.contains("plus")) fail("piecewise field needs minus and plus");
      return DisplacementField::piecewise(
          Hyperplane{vec(j, "point", d, "field"), vec(j, "normal", d, "field")}, piece("minus"),
          piece("plus"));
    }
    if (type == "smooth") {
      allow_keys(j, {"type", "preset"}, "field");
      const std::string preset = get<std::string>(j, "preset", "field");
      if (preset == "shear") {
        if (d < 2) fail("shear preset needs d >= 2");
        // u = (x0 x1, 0, ...)
        return DisplacementField::smooth(
            d,
            [d](const Eigen::VectorXd& x) {
              Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
              u[0] = x[0] * x[1];
              return u;
            },
            [d](const Eigen::VectorXd& x) {
              Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
              g(0, 0) = x[1];
              g(0, 1) = x[0];
              return g;
            },
            dom);
      }
      if (preset == "sine") {
        // u_k = sin(π x_k) / π
        return DisplacementField::smooth(
            d,
            [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
              return (std::numbers::pi * x.array()).sin() / std::numbers::pi;
            },
            [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
              return (std::numbers::pi * x.array()).cos().matrix().asDiagonal();
            },
            dom);
      }
      fail("smooth preset must be shear or sine (got '" + preset + "')");
    }
    fail("field type must be linear, identity, rigid, jump, piecewise or smooth (got '" + type +
         "')");
  });
}

// -------------------------------------------------------- ExperimentConfig

Domain ExperimentConfig::domain() const { return domain_from_json(domain_json); }
Density ExperimentConfig::density() const { return density_from_json(density_json, domain()); }
Kernel ExperimentConfig::kernel() const { return kernel_from_json(kernel_json, dim); }
DisplacementField ExperimentConfig::field() const {
  return field_from_json(field_json, domain());
}
double ExperimentConfig::eps_for(std::size_t index) const {
  return eps_rule.eps(index, static_cast<double>(n_schedule.at(index)));
}

ExperimentConfig parse_config(const std::string& text) {
  const json j = parse_json(text, "config");
  allow_keys(j,
             {"domain", "density", "kernel", "field", "n_schedule", "eps_rule", "seeds",
              "output", "report", "diagnostics", "threads", "quadrature"},
             "config");
  ExperimentConfig cfg;
  if (!j.contains("domain")) fail("config needs a domain section");
  if (!j.contains("kernel")) fail("config needs a kernel section");
  if (!j.contains("field")) fail("config needs a field section");
  cfg.domain_json = j.at("domain").dump();
  cfg.density_json = j.contains("density") ? j.at("density").dump() : R"({"type":"uniform"})";
  cfg.kernel_json = j.at("kernel").dump();
  cfg.field_json = j.at("field").dump();
  const Domain dom = cfg.domain();
  cfg.dim = dom.dim();

  if (j.contains("quadrature")) {
    const json& q = j.at("quadrature");
    allow_keys(q, {"radial_nodes", "angular_nodes", "polar_nodes", "azimuth_nodes", "mc_nodes",
                   "seed"}, "quadrature");
    cfg.quadrature.radial_nodes = get_or<int>(q, "radial_nodes", cfg.quadrature.radial_nodes, "quadrature");
    cfg.quadrature.angular_nodes = get_or<int>(q, "angular_nodes", cfg.quadrature.angular_nodes, "quadrature");
    cfg.quadrature.polar_nodes = get_or<int>(q, "polar_nodes", cfg.quadrature.polar_nodes, "quadrature");
    cfg.quadrature.azimuth_nodes = get_or<int>(q, "azimuth_nodes", cfg.quadrature.azimuth_nodes, "quadrature");
    cfg.quadrature.mc_nodes = get_or<std::size_t>(q, "mc_nodes", cfg.quadrature.mc_nodes, "quadrature");
    cfg.quadrature.seed = get_or<std::uint64_t>(q, "seed", cfg.quadrature.seed, "quadrature");
    wrap("quadrature", [&]() { cfg.quadrature.validate(); return 0; });
  }

  // Build once so that section errors surface at load time.
  (void)cfg.density();
  (void)cfg.kernel();
  (void)cfg.field();

  if (!j.contains("n_schedule")) fail("config needs n_schedule");
  cfg.n_schedule = get<std::vector<std::int64_t>>(j, "n_schedule", "config");
  if (cfg.n_schedule.empty()) fail("n_schedule must be non-empty");
  for (std::size_t i = 0; i < cfg.n_schedule.size(); ++i) {
    const auto n = cfg.n_schedule[i];
    if (n < 2 || (n & (n - 1)) != 0) fail("n_schedule entries must be powers of two >= 2");
    if (i > 0 && n <= cfg.n_schedule[i - 1]) fail("n_schedule must be strictly increasing");
  }

  cfg.eps_rule.exponent = 1.0 / (2.0 * cfg.dim);
  if (j.contains("eps_rule")) {
    const json& e = j.at("eps_rule");
    const std::string type = get<std::string>(e, "type", "eps_rule");
    if (type == "power_law") {
      allow_keys(e, {"type", "c", "exponent"}, "eps_rule");
      cfg.eps_rule.kind = EpsRule::Kind::PowerLaw;
      cfg.eps_rule.c = get_or<double>(e, "c", 0.6, "eps_rule");
      cfg.eps_rule.exponent = get_or<double>(e, "exponent", cfg.eps_rule.exponent, "eps_rule");
    } else if (type == "explicit") {
      allow_keys(e, {"type", "values"}, "eps_rule");
      cfg.eps_rule.kind = EpsRule::Kind::Explicit;
      cfg.eps_rule.values = get<std::vector<double>>(e, "values", "eps_rule");
      if (cfg.eps_rule.values.size() != cfg.n_schedule.size())
        fail("explicit eps list must match n_schedule in length");
    } else {
      fail("eps_rule type must be power_law or explicit (got '" + type + "')");
    }
  }
  const EpsValidation v = validate_eps_rule(cfg.eps_rule, cfg.n_schedule, cfg.dim);
  if (!v.ok) fail("eps_rule rejected: " + v.message);

  cfg.seeds = j.contains("seeds") ? get<std::vector<std::uint64_t>>(j, "seeds", "config")
                                  : std::vector<std::uint64_t>{1};
  if (cfg.seeds.empty()) fail("seeds must be non-empty");

  if (j.contains("output")) {
    const json& o = j.at("output");
    allow_keys(o, {"dir"}, "output");
    cfg.output_dir = get<std::string>(o, "dir", "output");
  }
  if (j.contains("report")) {
    const json& r = j.at("report");
    allow_keys(r, {"wallclock", "interior"}, "report");
    cfg.report_wallclock = get_or<bool>(r, "wallclock", true, "report");
    cfg.interior_variant = get_or<bool>(r, "interior", true, "report");
  }
  if (j.contains("diagnostics")) {
    const json& dj = j.at("diagnostics");
    allow_keys(dj, {"enabled"}, "diagnostics");
    cfg.diagnostics = get_or<bool>(dj, "enabled", false, "diagnostics");
  }
  cfg.threads = get_or<int>(j, "threads", 0, "config");
  if (cfg.threads < 0) fail("threads must be >= 0");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bdgraphtv
