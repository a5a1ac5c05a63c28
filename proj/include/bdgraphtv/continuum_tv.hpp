#pragma once

#include <span>

#include "bdgraphtv/domain.hpp"
#include "bdgraphtv/field.hpp"
#include "bdgraphtv/kernels.hpp"

namespace bdgraphtv {

struct ContinuumTVResult {
  double value = 0.0;
  double volume_part = 0.0;
  double jump_part = 0.0;
  double quad_error = 0.0;
};

/// e(u)(x); throws UndefinedPointError on a jump surface.
SymMatrix sym_gradient(const DisplacementField& u, std::span<const double> x);

/// TV_η(u; ρ²) = ∫_D ρ² φ_η(e(u)) dx + ∫_{J∩D} ρ² φ_η([u] ⊙ ν_J) dH^{d-1}.
/// φ_η is evaluated through its Frobenius polar form φ_η(M/|M|)|M|.
ContinuumTVResult tv_eta(const DisplacementField& u, const Domain& dom, const Density& rho,
                         const Kernel& k, const QuadratureSpec& quad = {},
                         const VolumeQuadrature& vquad = {});

}  // namespace bdgraphtv
