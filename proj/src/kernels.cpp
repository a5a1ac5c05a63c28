#include "bdgraphtv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

// ---------------------------------------------------------------- SymMatrix

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw ArgumentError("SymMatrix needs a non-empty square matrix");
  const Eigen::Index d = m.rows();
  m_.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    m_(i, i) = m(i, i);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double s = 0.5 * (m(i, j) + m(j, i));
      m_(i, j) = s;
      m_(j, i) = s;
    }
  }
}

SymMatrix SymMatrix::zero(int d) { return SymMatrix(Eigen::MatrixXd::Zero(d, d)); }

SymMatrix SymMatrix::identity(int d) {
  return SymMatrix(Eigen::MatrixXd::Identity(d, d));
}

SymMatrix SymMatrix::sym_product(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw ArgumentError("sym_product needs equal-length vectors");
  const auto d = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = 0.5 * (a[i] * b[j] + b[i] * a[j]);
  return SymMatrix(m);
}

double SymMatrix::quadratic_form(std::span<const double> xi) const {
  const int d = dim();
  double diag = 0.0;
  double off = 0.0;
  for (int i = 0; i < d; ++i) {
    diag += m_(i, i) * xi[i] * xi[i];
    for (int j = i + 1; j < d; ++j) off += m_(i, j) * xi[i] * xi[j];
  }
  return diag + 2.0 * off;
}

double SymMatrix::spectral_norm() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SymMatrix SymMatrix::scaled(double t) const { return SymMatrix(t * m_); }

// ------------------------------------------------------------ radial pieces

namespace {

constexpr int kMonotoneSamples = 1024;

struct RadialIntegral {
  double value = 0.0;
  double error = 0.0;
  std::size_t nodes = 0;
};

// ∫_a^b g with a Gauss–Legendre rule of `n` nodes; error from the n/2 rule.
template <class G>
RadialIntegral gauss_panel(const G& g, double a, double b, int n) {
  RadialIntegral out;
  if (!(b > a)) return out;
  const GaussRule full = gauss_legendre(n, a, b);
  for (int i = 0; i < n; ++i) out.value += full.weights[i] * g(full.nodes[i]);
  out.nodes = static_cast<std::size_t>(n);
  const int half = std::max(1, n / 2);
  if (half < n) {
    const GaussRule coarse = gauss_legendre(half, a, b);
    double v = 0.0;
    for (int i = 0; i < half; ++i) v += coarse.weights[i] * g(coarse.nodes[i]);
    out.error = std::abs(out.value - v);
    out.nodes += static_cast<std::size_t>(half);
  }
  return out;
}

// Panel boundaries on [0, radius]: breakpoints plus `extra` uniform splits.
std::vector<double> radial_panels(double radius, const std::vector<double>& breaks,
                                  int extra) {
  std::vector<double> edges{0.0, radius};
  for (double b : breaks)
    if (b > 0.0 && b < radius) edges.push_back(b);
  for (int k = 1; k < extra; ++k) edges.push_back(radius * k / extra);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

template <class G>
RadialIntegral integrate_radial(const G& g, double radius,
                                const std::vector<double>& breaks, int extra,
                                int n) {
  RadialIntegral total;
  const std::vector<double> edges = radial_panels(radius, breaks, extra);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const RadialIntegral p = gauss_panel(g, edges[k], edges[k + 1], n);
    total.value += p.value;
    total.error += p.error;
    total.nodes += p.nodes;
  }
  return total;
}

}  // namespace

MomentResult second_moment_of_profile(const std::function<double(double)>& profile,
                                      double radius,
                                      const std::vector<double>& breakpoints,
                                      int d, const QuadratureSpec& quad,
                                      double tail_fraction) {
  quad.validate();
  if (d < 1) throw ArgumentError("dimension must be positive");
  const double area = unit_sphere_area(d);
  auto g = [&](double r) { return profile(r) * std::pow(r, d + 1); };
  MomentResult out;

  if (std::isfinite(radius)) {
    const int extra = breakpoints.empty() ? 8 : 1;
    const RadialIntegral ri =
        integrate_radial(g, radius, breakpoints, extra, quad.radial_nodes);
    out.value = area * ri.value;
    out.error_estimate = area * ri.error;
    out.nodes = ri.nodes;
    out.tail_radius = radius;
    return out;
  }

  // Unbounded support: dyadic panels [0,1], [1,2], [2,4], ... until the
  // geometric tail estimate drops below tail_fraction of the running total.
  const double tol = tail_fraction > 0.0 ? tail_fraction : 1e-8;
  double total = 0.0;
  double err = 0.0;
  double prev = -1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 64; ++k) {
    const RadialIntegral p = gauss_panel(g, lo, hi, quad.radial_nodes);
    total += p.value;
    err += p.error;
    out.nodes += p.nodes;
    if (k >= 3 && prev >= 0.0) {
      if (p.value == 0.0 && prev == 0.0) {
        out.value = area * total;
        out.error_estimate = area * err;
        out.tail_radius = hi;
        return out;
      }
      const double q = prev > 0.0 ? p.value / prev : 1.0;
      if (q < 0.9) {
        const double tail = p.value * q / (1.0 - q);
        if (tail <= tol * total) {
          out.value = area * total;
          out.error_estimate = area * (err + tail);
          out.tail_radius = hi;
          return out;
        }
      }
    }
    prev = p.value;
    lo = hi;
    hi *= 2.0;
  }
  out.value = std::numeric_limits<double>::infinity();
  out.error_estimate = std::numeric_limits<double>::infinity();
  out.infinite = true;
  out.tail_radius = std::numeric_limits<double>::infinity();
  return out;
}

// ------------------------------------------------------------------- Kernel

Kernel Kernel::indicator(double c, double b, int d) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw ArgumentError("indicator kernel needs c > 0 (profile(0) > 0)");
  if (!(b > 0.0) || !std::isfinite(b))
    throw ArgumentError("indicator kernel needs a finite radius b > 0");
  if (d < 1) throw ArgumentError("dimension must be positive");
  Kernel k;
  k.kind_ = Kind::Indicator;
  k.dim_ = d;
  k.radius_ = b;
  k.steps_ = {KernelStep{b, c}};
  k.breakpoints_ = {b};
  k.name_ = "indicator";
  k.finish_construction(QuadratureSpec{}, 0.0, false);
  return k;
}

Kernel Kernel::piecewise_constant(std::vector<KernelStep> steps, int d) {
  if (steps.empty()) throw ArgumentError("piecewise-constant kernel needs steps");
  if (d < 1) throw ArgumentError("dimension must be positive");
  double prev_r = 0.0;
  double prev_v = std::numeric_limits<double>::infinity();
  for (const KernelStep& s : steps) {
    if (!(s.radius > prev_r) || !std::isfinite(s.radius))
      throw ArgumentError("step radii must be finite and strictly increasing");
    if (!(s.value >= 0.0) || !std::isfinite(s.value))
      throw ArgumentError("step values must be finite and non-negative");
    if (s.value > prev_v)
      throw ArgumentError("kernel profile must be non-increasing (K2)");
    prev_r = s.radius;
    prev_v = s.value;
  }
  if (!(steps.front().value > 0.0))
    throw ArgumentError("kernel profile must be positive at 0 (K1)");
  // drop trailing zero steps so radius() is the true support
  while (steps.size() > 1 && steps.back().value == 0.0) steps.pop_back();
  Kernel k;
  k.kind_ = Kind::PiecewiseConstant;
  k.dim_ = d;
  k.radius_ = steps.back().radius;
  for (const KernelStep& s : steps) k.breakpoints_.push_back(s.radius);
  k.steps_ = std::move(steps);
  k.name_ = "piecewise_constant";
  k.finish_construction(QuadratureSpec{}, 0.0, false);
  return k;
}

Kernel Kernel::custom(std::function<double(double)> profile, double radius, int d,
                      CustomOptions options) {
  if (!profile) throw ArgumentError("custom kernel needs a profile");
  if (d < 1) throw ArgumentError("dimension must be positive");
  if (!(radius > 0.0)) throw ArgumentError("custom kernel radius must be positive");
  if (options.tail_fraction < 0.0)
    throw ArgumentError("tail fraction must be non-negative");
  Kernel k;
  k.kind_ = Kind::Custom;
  k.dim_ = d;
  k.radius_ = radius;
  k.custom_ = std::move(profile);
  k.name_ = options.name;

  const double eta0 = k.custom_(0.0);
  if (!(eta0 > 0.0) || !std::isfinite(eta0))
    throw ArgumentError("kernel profile must be finite and positive at 0 (K1)");
  const double scale = std::isfinite(radius) ? radius : 1.0;
  const double h = 1e-9 * scale;
  if (std::abs(k.custom_(h) - eta0) > 1e-6 * eta0)
    throw ArgumentError("kernel profile must be continuous at 0 (K1)");

  k.finish_construction(options.quadrature, options.tail_fraction,
                        options.tail_fraction > 0.0);

  // (K2) on a sampled grid over the integration range
  const double r_max = k.integration_radius_;
  double prev = eta0;
  for (int i = 1; i <= kMonotoneSamples; ++i) {
    const double t = r_max * i / kMonotoneSamples;
    const double v = k.profile(t);
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ArgumentError("kernel profile must be finite and non-negative");
    if (v > prev * (1.0 + 1e-12))
      throw ArgumentError("kernel profile must be non-increasing (K2)");
    prev = v;
  }
  return k;
}

void Kernel::finish_construction(const QuadratureSpec& quad, double tail_fraction,
                                 bool truncate) {
  auto prof = [this](double t) { return profile(t); };
  moment_ = second_moment_of_profile(prof, radius_, breakpoints_, dim_, quad,
                                     tail_fraction);
  if (moment_.infinite || !std::isfinite(moment_.value))
    throw InfeasibleIntegralError(
        "kernel second moment diverges (K3): tail decays too slowly");
  integration_radius_ = moment_.tail_radius;
  if (std::isfinite(radius_)) {
    truncation_.reset();
  } else if (truncate) {
    truncation_ = moment_.tail_radius;
  }
}

double Kernel::operator()(std::span<const double> x) const {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return profile(std::sqrt(r2));
}

double Kernel::interaction_radius() const {
  if (std::isfinite(radius_)) return radius_;
  if (truncation_) return *truncation_;
  throw UnsupportedError(
      "kernel has unbounded support and no truncation radius");
}

std::string Kernel::describe() const {
  std::ostringstream os;
  os << name_ << "(d=" << dim_;
  if (kind_ != Kind::Custom) {
    for (const KernelStep& s : steps_) os << ", [" << s.radius << "]=" << s.value;
  } else {
    os << ", radius=" << radius_;
    if (truncation_) os << ", truncated at " << *truncation_;
  }
  os << ")";
  return os.str();
}

RescaledKernel::RescaledKernel(const Kernel& kernel, double eps)
    : kernel_(&kernel), eps_(eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw ArgumentError("kernel rescaling needs eps > 0");
  inv_eps_d_ = 1.0 / std::pow(eps, kernel.dimension());
}

double RescaledKernel::operator()(std::span<const double> x) const {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return at_distance(std::sqrt(r2));
}

RescaledKernel rescale(const Kernel& kernel, double eps) {
  return RescaledKernel(kernel, eps);
}

MomentResult second_moment(const Kernel& kernel, const QuadratureSpec& quad) {
  auto prof = [&kernel](double t) { return kernel.profile(t); };
  return second_moment_of_profile(prof, kernel.radius(), kernel.breakpoints(),
                                  kernel.dimension(), quad);
}

// ------------------------------------------------------------------ phi_eta

namespace {

struct AngularIntegral {
  double value = 0.0;
  double error = 0.0;
  std::size_t nodes = 0;
};

// ∫_{S^{d-1}} |Aθ·θ| dσ(θ)
AngularIntegral angular_integral(const SymMatrix& a, const QuadratureSpec& quad) {
  const int d = a.dim();
  AngularIntegral out;
  if (d == 1) {
    out.value = 2.0 * std::abs(a(0, 0));
    out.nodes = 2;
    return out;
  }
  if (d == 2) {
    const int n = quad.angular_nodes;
    const double h = 2.0 * std::numbers::pi / n;
    double all = 0.0;
    double even = 0.0;
    for (int k = 0; k < n; ++k) {
      const double th = h * k;
      const double xi[2] = {std::cos(th), std::sin(th)};
      const double v = std::abs(a.quadratic_form(xi));
      all += v;
      if (k % 2 == 0) even += v;
    }
    out.value = h * all;
    out.error = n >= 2 ? std::abs(out.value - 2.0 * h * even) : 0.0;
    out.nodes = static_cast<std::size_t>(n);
    return out;
  }
  // d == 3: Gauss–Legendre in z = cos(polar), trapezoid in azimuth
  auto sphere = [&a](int nz, int nphi) {
    const GaussRule gz = gauss_legendre(nz, -1.0, 1.0);
    const double h = 2.0 * std::numbers::pi / nphi;
    double sum = 0.0;
    for (int i = 0; i < nz; ++i) {
      const double z = gz.nodes[i];
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      double ring = 0.0;
      for (int k = 0; k < nphi; ++k) {
        const double ph = h * k;
        const double xi[3] = {s * std::cos(ph), s * std::sin(ph), z};
        ring += std::abs(a.quadratic_form(xi));
      }
      sum += gz.weights[i] * h * ring;
    }
    return sum;
  };
  const int nz = quad.polar_nodes;
  const int nphi = quad.azimuth_nodes;
  out.value = sphere(nz, nphi);
  out.error = std::abs(out.value - sphere(std::max(1, nz / 2), std::max(1, nphi / 2)));
  out.nodes = static_cast<std::size_t>(nz) * nphi;
  return out;
}

QuadratureResult phi_polar(const Kernel& k, const SymMatrix& a,
                           const QuadratureSpec& quad) {
  const int d = k.dimension();
  auto g = [&k, d](double r) { return k.profile(r) * std::pow(r, d + 1); };
  const int extra = k.kind() == Kernel::Kind::Custom ? 8 : 1;
  const RadialIntegral radial = integrate_radial(g, k.integration_radius(),
                                                 k.breakpoints(), extra,
                                                 quad.radial_nodes);
  const AngularIntegral ang = angular_integral(a, quad);
  QuadratureResult out;
  out.value = radial.value * ang.value;
  out.error_estimate = radial.error * ang.value + radial.value * ang.error;
  out.nodes = radial.nodes * ang.nodes;
  return out;
}

QuadratureResult phi_monte_carlo(const Kernel& k, const SymMatrix& a,
                                 const QuadratureSpec& quad) {
  const int d = k.dimension();
  const double r = k.integration_radius();
  const double volume = unit_ball_volume(d) * std::pow(r, d);
  std::mt19937_64 rng(quad.seed);
  std::vector<double> xi(static_cast<std::size_t>(d));
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t s = 0; s < quad.mc_nodes; ++s) {
    sample_ball(rng, r, xi);
    const double v = k(xi) * std::abs(a.quadratic_form(xi));
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(quad.mc_nodes);
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
  QuadratureResult out;
  out.value = volume * mean;
  out.error_estimate = volume * std::sqrt(var / n);
  out.nodes = quad.mc_nodes;
  return out;
}

}  // namespace

QuadratureResult phi_eta(const Kernel& kernel, const SymMatrix& a,
                         const QuadratureSpec& quad) {
  quad.validate();
  if (a.dim() != kernel.dimension())
    throw ArgumentError("matrix dimension does not match kernel dimension");
  if (!std::isfinite(kernel.moment().value))
    throw InfeasibleIntegralError("kernel second moment is not finite");
  using M = QuadratureSpec::Method;
  M method = quad.method;
  if (method == M::Auto)
    method = (kernel.dimension() <= 3 && kernel.kind() != Kernel::Kind::Custom)
                 ? M::Polar
                 : M::MonteCarlo;
  if (method == M::Polar && kernel.dimension() > 3)
    throw UnsupportedError("polar quadrature is implemented for d <= 3");
  return method == M::Polar ? phi_polar(kernel, a, quad)
                            : phi_monte_carlo(kernel, a, quad);
}

double phi_eta_polar(const Kernel& kernel, const SymMatrix& a, MatrixNorm norm,
                     const QuadratureSpec& quad) {
  const double mag =
      norm == MatrixNorm::Frobenius ? a.frobenius_norm() : a.spectral_norm();
  if (mag == 0.0) return 0.0;
  return phi_eta(kernel, a.scaled(1.0 / mag), quad).value * mag;
}

}  // namespace bdgraphtv
