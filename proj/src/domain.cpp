#include "bdgraphtv/domain.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

// ------------------------------------------------------------------- Domain

Domain Domain::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size())
    throw ArgumentError("box corners must be non-empty and of equal dimension");
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]) || !(lo[k] < hi[k]))
      throw ArgumentError("box needs finite lo < hi in every coordinate");
  }
  Domain d;
  d.kind_ = Kind::Box;
  d.center_.resize(lo.size());
  for (std::size_t k = 0; k < lo.size(); ++k) d.center_[k] = 0.5 * (lo[k] + hi[k]);
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

Domain Domain::unit_box(int d) {
  if (d < 1) throw ArgumentError("dimension must be positive");
  return box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
}

Domain Domain::ball(std::vector<double> center, double radius) {
  if (center.empty()) throw ArgumentError("ball centre must be non-empty");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ArgumentError("ball radius must be positive and finite");
  Domain d;
  d.kind_ = Kind::Ball;
  d.radius_ = radius;
  d.lo_.resize(center.size());
  d.hi_.resize(center.size());
  for (std::size_t k = 0; k < center.size(); ++k) {
    d.lo_[k] = center[k] - radius;
    d.hi_[k] = center[k] + radius;
  }
  d.center_ = std::move(center);
  return d;
}

bool Domain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  if (kind_ == Kind::Box) {
    for (std::size_t k = 0; k < x.size(); ++k)
      if (!(x[k] > lo_[k] && x[k] < hi_[k])) return false;
    return true;
  }
  double r2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double t = x[k] - center_[k];
    r2 += t * t;
  }
  return r2 < radius_ * radius_;
}

double Domain::volume() const {
  if (kind_ == Kind::Ball) return unit_ball_volume(dim()) * std::pow(radius_, dim());
  double v = 1.0;
  for (int k = 0; k < dim(); ++k) v *= hi_[k] - lo_[k];
  return v;
}

double Domain::diameter() const {
  if (kind_ == Kind::Ball) return 2.0 * radius_;
  double s = 0.0;
  for (int k = 0; k < dim(); ++k) s += (hi_[k] - lo_[k]) * (hi_[k] - lo_[k]);
  return std::sqrt(s);
}

Domain Domain::shrunk(double margin) const {
  if (!(margin >= 0.0)) throw ArgumentError("shrink margin must be non-negative");
  if (kind_ == Kind::Ball) {
    if (!(radius_ - margin > 0.0))
      throw ArgumentError("shrink margin empties the ball");
    return ball(center_, radius_ - margin);
  }
  std::vector<double> lo(lo_), hi(hi_);
  for (int k = 0; k < dim(); ++k) {
    lo[k] += margin;
    hi[k] -= margin;
    if (!(lo[k] < hi[k])) throw ArgumentError("shrink margin empties the box");
  }
  return box(lo, hi);
}

void Domain::sample_uniform(std::mt19937_64& rng, std::span<double> out) const {
  if (kind_ == Kind::Box) {
    do {
      for (int k = 0; k < dim(); ++k)
        out[k] = lo_[k] + (hi_[k] - lo_[k]) * uniform01(rng);
    } while (!contains(out));
    return;
  }
  do {
    sample_ball(rng, radius_, out);
    for (int k = 0; k < dim(); ++k) out[k] += center_[k];
  } while (!contains(out));
}

Interval Domain::line_section(std::span<const double> y,
                              std::span<const double> xi) const {
  const int d = dim();
  if (static_cast<int>(y.size()) != d || static_cast<int>(xi.size()) != d)
    throw ArgumentError("line_section: dimension mismatch");
  if (kind_ == Kind::Box) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < d; ++k) {
      if (xi[k] == 0.0) {
        if (!(y[k] > lo_[k] && y[k] < hi_[k])) return {};
        continue;
      }
      double a = (lo_[k] - y[k]) / xi[k];
      double b = (hi_[k] - y[k]) / xi[k];
      if (a > b) std::swap(a, b);
      lo = std::max(lo, a);
      hi = std::min(hi, b);
    }
    if (!(hi > lo)) return {};
    return {lo, hi};
  }
  double a = 0.0, b = 0.0, c = -radius_ * radius_;
  for (int k = 0; k < d; ++k) {
    const double off = y[k] - center_[k];
    a += xi[k] * xi[k];
    b += 2.0 * xi[k] * off;
    c += off * off;
  }
  if (a == 0.0) throw ArgumentError("line direction must be non-zero");
  const double disc = b * b - 4.0 * a * c;
  if (!(disc > 0.0)) return {};
  const double s = std::sqrt(disc);
  return {(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)};
}

std::string Domain::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::Box) {
    os << "box(";
    for (int k = 0; k < dim(); ++k)
      os << (k ? " x " : "") << "(" << lo_[k] << "," << hi_[k] << ")";
    os << ")";
  } else {
    os << "ball(center=[";
    for (int k = 0; k < dim(); ++k) os << (k ? "," : "") << center_[k];
    os << "], r=" << radius_ << ")";
  }
  return os.str();
}

// ------------------------------------------------------------- integration

namespace {

// Tensor Gauss–Legendre on a box with `panels` per axis and `n` nodes each.
double tensor_gauss(const std::vector<double>& lo, const std::vector<double>& hi,
                    int panels, int n,
                    const std::function<double(std::span<const double>)>& f) {
  const int d = static_cast<int>(lo.size());
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (int k = 0; k < d; ++k) {
    const double h = (hi[k] - lo[k]) / panels;
    for (int p = 0; p < panels; ++p) {
      const GaussRule r = gauss_legendre(n, lo[k] + p * h, lo[k] + (p + 1) * h);
      nodes[k].insert(nodes[k].end(), r.nodes.begin(), r.nodes.end());
      weights[k].insert(weights[k].end(), r.weights.begin(), r.weights.end());
    }
  }
  const int m = panels * n;
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      x[k] = nodes[k][idx[k]];
      w *= weights[k][idx[k]];
    }
    sum += w * f(x);
    int k = 0;
    while (k < d && ++idx[k] == m) idx[k++] = 0;
    if (k == d) break;
  }
  return sum;
}

}  // namespace

QuadratureResult integrate(const Domain& dom,
                           const std::function<double(std::span<const double>)>& f,
                           const VolumeQuadrature& quad) {
  const int d = dom.dim();
  QuadratureResult out;
  if (dom.kind() == Domain::Kind::Box && d <= 2) {
    const int n = std::max(1, quad.nodes_per_panel);
    const int p = std::max(1, quad.panels_per_dim);
    out.value = tensor_gauss(dom.lo(), dom.hi(), p, n, f);
    const double coarse = tensor_gauss(dom.lo(), dom.hi(), p, std::max(1, n / 2), f);
    out.error_estimate = std::abs(out.value - coarse);
    out.nodes = static_cast<std::size_t>(std::pow(p * n, d));
    return out;
  }
  std::mt19937_64 rng(quad.seed);
  std::vector<double> x(d);
  double sum = 0.0, sum2 = 0.0;
  const std::size_t n = std::max<std::size_t>(1, quad.mc_nodes);
  for (std::size_t s = 0; s < n; ++s) {
    dom.sample_uniform(rng, x);
    const double v = f(x);
    sum += v;
    sum2 += v * v;
  }
  const double vol = dom.volume();
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0)) : 0.0;
  out.value = vol * mean;
  out.error_estimate = vol * std::sqrt(var / n);
  out.nodes = n;
  return out;
}

// ------------------------------------------------------------------ Density

Density::Density(Domain domain, Evaluator rho, double alpha, double beta,
                 Normalization mode, const VolumeQuadrature& quad)
    : domain_(std::move(domain)), rho_(std::move(rho)), mode_(mode) {
  if (!rho_) throw ArgumentError("density needs an evaluator");
  if (!(alpha > 0.0) || !(beta >= alpha) || !std::isfinite(beta))
    throw DensityError("density bounds need 0 < alpha <= beta < inf");
  alpha_ = alpha;
  beta_ = beta;

  // Construction-time bound check on a probe lattice inside D.
  const int d = domain_.dim();
  const int per_axis = d <= 3 ? 16 : 4;
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  while (true) {
    for (int k = 0; k < d; ++k)
      x[k] = domain_.lo()[k] +
             (domain_.hi()[k] - domain_.lo()[k]) * (idx[k] + 0.5) / per_axis;
    if (domain_.contains(x)) (void)checked(x);
    int k = 0;
    while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == d) break;
  }

  const QuadratureResult mass =
      integrate(domain_, [this](std::span<const double> p) { return checked(p); }, quad);
  if (!(mass.value > 0.0)) throw DensityError("density has non-positive mass");
  if (mode_ == Normalization::Probability) {
    scale_ = 1.0 / mass.value;
    alpha_ *= scale_;
    beta_ *= scale_;
    mass_ = mass.value * scale_;
  } else {
    mass_ = mass.value;
  }
}

Density Density::uniform(const Domain& domain) {
  Density rho;
  rho.domain_ = domain;
  rho.constant_ = true;
  rho.value_ = 1.0 / domain.volume();
  rho.alpha_ = rho.beta_ = rho.value_;
  rho.mass_ = 1.0;
  rho.mode_ = Normalization::Probability;
  return rho;
}

Density Density::constant(const Domain& domain, double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw DensityError("constant density must be positive and finite");
  Density rho;
  rho.domain_ = domain;
  rho.constant_ = true;
  rho.value_ = value;
  rho.alpha_ = rho.beta_ = value;
  rho.mass_ = value * domain.volume();
  rho.mode_ = Normalization::Raw;
  return rho;
}

double Density::checked(std::span<const double> x) const {
  if (constant_) return value_;
  const double v = scale_ * rho_(x);
  if (!(v >= alpha_ * (1.0 - 1e-12)) || !(v <= beta_ * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "density value " << v << " outside [" << alpha_ << ", " << beta_ << "]";
    throw DensityError(os.str());
  }
  return v;
}

Density Density::scaled(double s) const {
  if (!(s > 0.0) || !std::isfinite(s))
    throw ArgumentError("density scale must be positive");
  Density out = *this;
  out.scale_ *= s;
  out.value_ *= s;
  out.alpha_ *= s;
  out.beta_ *= s;
  out.mass_ *= s;
  out.mode_ = Normalization::Raw;
  return out;
}

// --------------------------------------------------------- EmpiricalMeasure

EmpiricalMeasure::EmpiricalMeasure(Eigen::MatrixXd points, std::uint64_t seed,
                                   std::optional<GridInfo> grid)
    : points_(std::move(points)), seed_(seed), grid_(std::move(grid)) {
  if (points_.rows() < 1 || points_.cols() < 1)
    throw ArgumentError("empirical measure needs n >= 1 points of dimension >= 1");
  if (!points_.allFinite()) throw ArgumentError("empirical measure has non-finite points");
}

EmpiricalMeasure sample(const Domain& dom, const Density& rho, Eigen::Index n,
                        std::uint64_t seed) {
  if (n < 1) throw ArgumentError("sample size must be >= 1");
  if (rho.domain().dim() != dom.dim())
    throw ArgumentError("density and domain dimensions differ");
  const int d = dom.dim();
  Eigen::MatrixXd pts(d, n);
  std::mt19937_64 rng(seed);
  std::vector<double> x(d);
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
  const double beta = rho.beta();
  for (Eigen::Index i = 0; i < n; ++i) {
    while (true) {
      dom.sample_uniform(rng, x);
      ++attempts;
      if (rho.is_constant() || uniform01(rng) * beta < rho(x)) break;
      if (attempts >= 100'000 &&
          static_cast<double>(accepted) < 1e-4 * static_cast<double>(attempts))
        throw PathologicalDensityError(
            "rejection sampling acceptance rate below 1e-4");
    }
    ++accepted;
    for (int k = 0; k < d; ++k) pts(k, i) = x[k];
  }
  return EmpiricalMeasure(std::move(pts), seed);
}

std::vector<int> balanced_grid_counts(Eigen::Index n, const std::vector<double>& sides) {
  if (n < 1) throw ArgumentError("grid size must be >= 1");
  std::vector<Eigen::Index> primes;
  Eigen::Index m = n;
  for (Eigen::Index p = 2; p * p <= m; ++p)
    while (m % p == 0) {
      primes.push_back(p);
      m /= p;
    }
  if (m > 1) primes.push_back(m);
  std::sort(primes.rbegin(), primes.rend());
  std::vector<int> counts(sides.size(), 1);
  for (Eigen::Index p : primes) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < sides.size(); ++k)
      if (sides[k] / counts[k] > sides[best] / counts[best]) best = k;
    counts[best] *= static_cast<int>(p);
  }
  return counts;
}

namespace {

class Stratifier {
 public:
  Stratifier(const Density& rho, std::vector<int> counts)
      : rho_(rho), counts_(std::move(counts)), d_(static_cast<int>(counts_.size())) {}

  void run(std::vector<double> lo, std::vector<double> hi) {
    recurse(0, lo, hi, mass(lo, hi));
  }

  std::vector<std::vector<double>> atoms;
  double spacing = 0.0;

 private:
  double mass(const std::vector<double>& lo, const std::vector<double>& hi) const {
    return tensor(lo, hi, [this](std::span<const double> x) { return rho_(x); });
  }

  double tensor(const std::vector<double>& lo, const std::vector<double>& hi,
                const std::function<double(std::span<const double>)>& f) const {
    return tensor_gauss(lo, hi, 2, 12, f);
  }

  void recurse(int axis, std::vector<double>& lo, std::vector<double>& hi,
               double cell_mass) {
    if (axis == d_) {
      std::vector<double> c(d_);
      for (int k = 0; k < d_; ++k) {
        c[k] = tensor(lo, hi, [&](std::span<const double> x) { return x[k] * rho_(x); }) /
               cell_mass;
        spacing = std::max(spacing, hi[k] - lo[k]);
      }
      atoms.push_back(std::move(c));
      return;
    }
    const int m = counts_[axis];
    const double a = lo[axis];
    const double b = hi[axis];
    double left = a;
    for (int k = 1; k <= m; ++k) {
      double right = b;
      if (k < m) {
        const double target = cell_mass * k / m;
        auto g = [&](double t) {
          if (t <= lo[axis]) return -target;
          std::vector<double> h2 = hi;
          h2[axis] = t;
          return mass(lo, h2) - target;
        };
        boost::math::tools::eps_tolerance<double> tol(48);
        std::uintmax_t iters = 100;
        const auto bracket = boost::math::tools::toms748_solve(
            g, left, b, g(left), g(b), tol, iters);
        right = 0.5 * (bracket.first + bracket.second);
      }
      std::vector<double> clo = lo, chi = hi;
      clo[axis] = left;
      chi[axis] = right;
      recurse(axis + 1, clo, chi, mass(clo, chi));
      left = right;
    }
  }

  const Density& rho_;
  std::vector<int> counts_;
  int d_;
};

}  // namespace

EmpiricalMeasure grid_reference(const Domain& dom, const Density& rho, Eigen::Index n) {
  if (dom.kind() != Domain::Kind::Box)
    throw UnsupportedError("grid_reference supports box domains only");
  if (n < 1) throw ArgumentError("grid size must be >= 1");
  const int d = dom.dim();
  std::vector<double> sides(d);
  for (int k = 0; k < d; ++k) sides[k] = dom.hi()[k] - dom.lo()[k];
  GridInfo info;
  info.counts = balanced_grid_counts(n, sides);
  info.domain = dom;
  Eigen::MatrixXd pts(d, n);

  if (rho.is_constant()) {
    std::vector<int> idx(d, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k)
        pts(k, i) = dom.lo()[k] + sides[k] * (idx[k] + 0.5) / info.counts[k];
      // last axis varies fastest, matching the stratified ordering
      int k = d - 1;
      while (k >= 0 && ++idx[k] == info.counts[k]) idx[k--] = 0;
    }
    for (int k = 0; k < d; ++k)
      info.spacing = std::max(info.spacing, sides[k] / info.counts[k]);
    info.regular = true;
    return EmpiricalMeasure(std::move(pts), 0, std::move(info));
  }

  if (d > 3) throw UnsupportedError("non-uniform grid_reference supports d <= 3");
  Stratifier strat(rho, info.counts);
  strat.run(dom.lo(), dom.hi());
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) pts(k, i) = strat.atoms[i][k];
  info.spacing = strat.spacing;
  return EmpiricalMeasure(std::move(pts), 0, std::move(info));
}

}  // namespace bdgraphtv
