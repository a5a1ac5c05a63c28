#include "bdgraphtv/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

void QuadratureSpec::validate() const {
  if (radial_nodes < 1 || angular_nodes < 1 || polar_nodes < 1 ||
      azimuth_nodes < 1 || mc_nodes < 1) {
    throw ArgumentError("quadrature spec needs at least one node per rule");
  }
}

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ArgumentError("Gauss-Legendre rule needs n >= 1");
  std::unique_ptr<gsl_integration_glfixed_table,
                  decltype(&gsl_integration_glfixed_table_free)>
      table(gsl_integration_glfixed_table_alloc(static_cast<size_t>(n)),
            &gsl_integration_glfixed_table_free);
  if (!table) throw Error("gsl_integration_glfixed_table_alloc failed");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(a, b, static_cast<size_t>(i), &rule.nodes[i],
                                  &rule.weights[i], table.get());
  }
  return rule;
}

double unit_sphere_area(int d) {
  if (d < 1) throw ArgumentError("dimension must be positive");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double unit_ball_volume(int d) {
  return unit_sphere_area(d) / static_cast<double>(d);
}

double uniform01(std::mt19937_64& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void sample_direction(std::mt19937_64& rng, std::span<double> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& v : out) {
      v = normal(rng);
      norm2 += v * v;
    }
  } while (norm2 < 1e-300);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
}

void sample_ball(std::mt19937_64& rng, double radius, std::span<double> out) {
  const int d = static_cast<int>(out.size());
  if (d == 1) {
    out[0] = radius * (2.0 * uniform01(rng) - 1.0);
    return;
  }
  sample_direction(rng, out);
  const double r = radius * std::pow(uniform01(rng), 1.0 / d);
  for (double& v : out) v *= r;
}

}  // namespace bdgraphtv
