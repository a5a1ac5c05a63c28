#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bdgraphtv {

/// How an integral over R^d (or a subset) is discretized.
///
/// `Auto` picks a product rule where one exists (polar Gauss–Legendre in
/// radius, trapezoid in angle, d <= 3) and falls back to Monte Carlo
/// otherwise. Two calls with the same spec use identical nodes.
struct QuadratureSpec {
  enum class Method { Auto, Polar, MonteCarlo };

  Method method = Method::Auto;
  int radial_nodes = 32;      // Gauss–Legendre nodes per radial panel
  int angular_nodes = 4096;   // trapezoid nodes on the circle (d = 2)
  int polar_nodes = 96;       // Gauss–Legendre nodes in cos(polar angle), d = 3
  int azimuth_nodes = 192;    // trapezoid nodes in azimuth, d = 3
  std::size_t mc_nodes = 1'000'000;
  std::uint64_t seed = 20240521;

  void validate() const;
};

/// Value with an error estimate and the node count used to produce it.
struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t nodes = 0;
};

/// Gauss–Legendre rule mapped to [a, b].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n, double a, double b);

/// Surface area of the unit sphere S^{d-1}; 2 for d = 1.
double unit_sphere_area(int d);

/// Lebesgue measure of the unit ball in R^d.
double unit_ball_volume(int d);

/// Uniform point in the ball of radius `radius` centred at the origin.
void sample_ball(std::mt19937_64& rng, double radius, std::span<double> out);

/// Uniform direction on S^{d-1}.
void sample_direction(std::mt19937_64& rng, std::span<double> out);

double uniform01(std::mt19937_64& rng);

}  // namespace bdgraphtv
