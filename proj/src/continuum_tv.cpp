#include "bdgraphtv/continuum_tv.hpp"

#include <cmath>
#include <optional>
#include <vector>

#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

SymMatrix sym_gradient(const DisplacementField& u, std::span<const double> x) {
  return u.sym_gradient(x);
}

namespace {

double phi(const Kernel& k, const SymMatrix& a, const QuadratureSpec& quad) {
  return phi_eta_polar(k, a, MatrixNorm::Frobenius, quad);
}

double phi_rel_error(const Kernel& k, const SymMatrix& a, const QuadratureSpec& quad) {
  if (a.is_zero()) return 0.0;
  const QuadratureResult r = phi_eta(k, a.scaled(1.0 / a.frobenius_norm()), quad);
  return r.value > 0.0 ? r.error_estimate / r.value : 0.0;
}

QuadratureResult integral_rho2(const Domain& dom, const Density& rho,
                               const VolumeQuadrature& vq) {
  if (rho.is_constant()) {
    const double v = rho(dom.center());
    return {v * v * dom.volume(), 0.0, 1};
  }
  return integrate(dom, [&rho](std::span<const double> x) {
    const double r = rho(x);
    return r * r;
  }, vq);
}

// Splits a box along an axis-aligned plane; nullopt halves are empty.
struct Halves {
  std::optional<Domain> minus, plus;
};

std::optional<Halves> axis_split(const Domain& dom, const Hyperplane& h) {
  if (dom.kind() != Domain::Kind::Box) return std::nullopt;
  int axis = -1;
  for (int k = 0; k < dom.dim(); ++k) {
    if (h.normal[k] == 0.0) continue;
    if (axis >= 0) return std::nullopt;
    axis = k;
  }
  if (axis < 0) return std::nullopt;
  const double cut = h.point[axis];
  const bool flip = h.normal[axis] < 0.0;
  Halves out;
  std::vector<double> lo = dom.lo(), hi = dom.hi();
  std::optional<Domain> below, above;
  if (cut > lo[axis]) {
    std::vector<double> h2 = hi;
    h2[axis] = std::min(cut, hi[axis]);
    below = Domain::box(lo, h2);
  }
  if (cut < hi[axis]) {
    std::vector<double> l2 = lo;
    l2[axis] = std::max(cut, lo[axis]);
    above = Domain::box(l2, hi);
  }
  out.minus = flip ? above : below;
  out.plus = flip ? below : above;
  return out;
}

struct SurfaceRule {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

// Quadrature nodes on J ∩ D for a flat jump surface.
SurfaceRule surface_rule(const Domain& dom, const Hyperplane& h, const VolumeQuadrature& vq) {
  const int d = dom.dim();
  SurfaceRule rule;
  const std::vector<double> p(h.point.data(), h.point.data() + d);
  if (d == 1) {
    if (dom.contains(p)) {
      rule.points.push_back(p);
      rule.weights.push_back(1.0);
    }
    return rule;
  }
  if (d == 2) {
    const double tau[2] = {-h.normal[1], h.normal[0]};
    const Interval I = dom.line_section(p, tau);
    if (I.empty()) return rule;
    const int panels = std::max(1, vq.panels_per_dim);
    const double w = (I.hi - I.lo) / panels;
    for (int q = 0; q < panels; ++q) {
      const GaussRule g = gauss_legendre(vq.nodes_per_panel, I.lo + q * w, I.lo + (q + 1) * w);
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        rule.points.push_back({p[0] + g.nodes[i] * tau[0], p[1] + g.nodes[i] * tau[1]});
        rule.weights.push_back(g.weights[i]);
      }
    }
    return rule;
  }
  // d >= 3: axis-aligned plane through a box, tensor rule on the face
  if (dom.kind() != Domain::Kind::Box)
    throw UnsupportedError("jump surfaces in d >= 3 require a box domain");
  int axis = -1;
  for (int k = 0; k < d; ++k)
    if (h.normal[k] != 0.0) {
      if (axis >= 0) throw UnsupportedError("jump surfaces in d >= 3 must be axis-aligned");
      axis = k;
    }
  if (!(p[axis] > dom.lo()[axis] && p[axis] < dom.hi()[axis])) return rule;
  std::vector<double> lo, hi;
  for (int k = 0; k < d; ++k)
    if (k != axis) {
      lo.push_back(dom.lo()[k]);
      hi.push_back(dom.hi()[k]);
    }
  const int per = std::max(1, vq.panels_per_dim) * vq.nodes_per_panel;
  std::vector<std::vector<double>> nodes(d - 1), wts(d - 1);
  for (int j = 0; j < d - 1; ++j) {
    const double w = (hi[j] - lo[j]) / std::max(1, vq.panels_per_dim);
    for (int q = 0; q < std::max(1, vq.panels_per_dim); ++q) {
      const GaussRule g = gauss_legendre(vq.nodes_per_panel, lo[j] + q * w, lo[j] + (q + 1) * w);
      nodes[j].insert(nodes[j].end(), g.nodes.begin(), g.nodes.end());
      wts[j].insert(wts[j].end(), g.weights.begin(), g.weights.end());
    }
  }
  std::vector<int> idx(d - 1, 0);
  while (true) {
    std::vector<double> x(d);
    double w = 1.0;
    for (int k = 0, j = 0; k < d; ++k) {
      if (k == axis) {
        x[k] = p[axis];
      } else {
        x[k] = nodes[j][idx[j]];
        w *= wts[j][idx[j]];
        ++j;
      }
    }
    rule.points.push_back(std::move(x));
    rule.weights.push_back(w);
    int j = 0;
    while (j < d - 1 && ++idx[j] == per) idx[j++] = 0;
    if (j == d - 1) break;
  }
  return rule;
}

}  // namespace

ContinuumTVResult tv_eta(const DisplacementField& u, const Domain& dom, const Density& rho,
                         const Kernel& k, const QuadratureSpec& quad,
                         const VolumeQuadrature& vquad) {
  const int d = dom.dim();
  if (u.dim() != d || k.dimension() != d || rho.domain().dim() != d)
    throw ArgumentError("tv_eta: dimension mismatch");
  ContinuumTVResult out;

  switch (u.kind()) {
    case DisplacementField::Kind::Linear: {
      const SymMatrix e(u.affine().A);
      const QuadratureResult m = integral_rho2(dom, rho, vquad);
      const double p = phi(k, e, quad);
      out.volume_part = p * m.value;
      out.quad_error = p * m.error_estimate + phi_rel_error(k, e, quad) * out.volume_part;
      break;
    }
    case DisplacementField::Kind::Smooth: {
      QuadratureSpec q = quad;
      if (d <= 3) q.method = QuadratureSpec::Method::Polar;
      const QuadratureResult r = integrate(dom, [&](std::span<const double> x) {
        const double rr = rho(x);
        return rr * rr * phi(k, u.sym_gradient(x), q);
      }, vquad);
      out.volume_part = r.value;
      const SymMatrix probe = u.sym_gradient(dom.center());
      out.quad_error = r.error_estimate + phi_rel_error(k, probe, q) * r.value;
      break;
    }
    case DisplacementField::Kind::PiecewiseRigid: {
      const SymMatrix em(u.minus().A), ep(u.plus().A);
      const double pm = phi(k, em, quad);
      const double pp = phi(k, ep, quad);
      if (pm != 0.0 || pp != 0.0) {
        if (auto halves = axis_split(dom, u.surface())) {
          if (halves->minus) {
            const QuadratureResult m = integral_rho2(*halves->minus, rho, vquad);
            out.volume_part += pm * m.value;
            out.quad_error += pm * m.error_estimate;
          }
          if (halves->plus) {
            const QuadratureResult m = integral_rho2(*halves->plus, rho, vquad);
            out.volume_part += pp * m.value;
            out.quad_error += pp * m.error_estimate;
          }
        } else {
          const QuadratureResult r = integrate(dom, [&](std::span<const double> x) {
            const double rr = rho(x);
            return rr * rr * (u.side(x) >= 0.0 ? pp : pm);
          }, vquad);
          out.volume_part = r.value;
          out.quad_error = r.error_estimate;
        }
        out.quad_error += std::max(phi_rel_error(k, em, quad), phi_rel_error(k, ep, quad)) *
                          out.volume_part;
      }
      const Hyperplane& h = u.surface();
      const SurfaceRule rule = surface_rule(dom, h, vquad);
      const bool constant_jump = (u.plus().A - u.minus().A).isZero(0.0);
      std::optional<double> phi_const;
      double rel = 0.0;
      for (std::size_t i = 0; i < rule.points.size(); ++i) {
        const auto& x = rule.points[i];
        double ph;
        if (constant_jump && phi_const) {
          ph = *phi_const;
        } else {
          const Eigen::VectorXd jmp = u.jump_at(x);
          const SymMatrix s = SymMatrix::sym_product(
              {jmp.data(), static_cast<std::size_t>(d)},
              {h.normal.data(), static_cast<std::size_t>(d)});
          ph = phi(k, s, quad);
          if (!phi_const) rel = phi_rel_error(k, s, quad);
          phi_const = ph;
        }
        const double r = rho(x);
        out.jump_part += rule.weights[i] * r * r * ph;
      }
      out.quad_error += rel * out.jump_part;
      break;
    }
  }
  out.value = out.volume_part + out.jump_part;
  return out;
}

}  // namespace bdgraphtv
