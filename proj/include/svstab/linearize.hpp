#pragma once

#include <memory>

#include "svstab/core.hpp"
#include "svstab/mat2.hpp"
#include "svstab/steady.hpp"

namespace svstab {

/// Linearized operator around a steady state:
///   A y_xx + y_t + B(x) y_x + C(x) y = 0
/// with A = diag(0, -4 mu) constant and B, C sampled per grid point.
struct LinearizedSystem {
    PhysicalParams params;
    std::shared_ptr<const SteadyState> steady;
    Mat2 A;
    std::vector<Mat2> B;
    std::vector<Mat2> C;
    BoundaryCoeffs bc;

    const Grid& grid() const { return steady->grid; }
};

/// Assembles A, B(x), C(x) from the steady profiles. Requires mu > 0 (the
/// source matrix C carries a 1/(3 mu) factor).
LinearizedSystem build_linear_system(const SteadyState& s, const PhysicalParams& p,
                                     const BoundaryCoeffs& bc);

/// Time derivative y_t = -(A y_xx + B y_x + C y) with centered second-order
/// stencils in the interior and one-sided second-order stencils at the ends.
StateVector apply_operator(const LinearizedSystem& sys, const StateVector& y);

/// Largest |eigenvalue| of B(x) over the grid (advective spectral radius).
double spectral_radius_B(const LinearizedSystem& sys);

}  // namespace svstab
