#pragma once

#include <optional>

#include "svstab/linearize.hpp"

namespace svstab {

/// Diagonal Lyapunov weights Q = diag(q1, q2) with
///   q1 = g + mu q~1,  q2 = H + mu q~2,  q~2 = H,  q~1 = g - 4(1+mu) V_x / H,
/// chosen so that QB is symmetric. Spatial derivatives are analytic.
struct LyapunovWeights {
    std::vector<double> q1, q2;
    std::vector<double> qt1, qt2;
    std::vector<double> qt1x;   // d(q~1)/dx
    std::vector<double> q2x, q2xx;
    double mu = 0.0;
};

LyapunovWeights build_weights(const SteadyState& s, const PhysicalParams& p);

/// W(y) = trapezoid of (q1 h^2 + q2 v^2).
double evaluate_W(const StateVector& y, const LyapunovWeights& w, const Grid& grid);

/// Q B and its analytic spatial derivative at one grid point.
Mat2 qb_at(const LinearizedSystem& sys, const LyapunovWeights& w, std::size_t i);
Mat2 qb_x_at(const LinearizedSystem& sys, const LyapunovWeights& w, std::size_t i);

/// phi(mu, gamma) = gamma Q - (QC + (QC)^T) - Q_xx A + (QB)_x at grid point i.
Mat2 compute_phi(const LinearizedSystem& sys, const LyapunovWeights& w, double gamma, std::size_t i);

/// Pointwise Sylvester certification of D = phi(gamma = 0); when D is negative
/// definite on the whole grid, bisects for the largest gamma in (0, gamma_hi]
/// that keeps phi(gamma) negative definite everywhere.
struct InteriorCertificate {
    std::optional<double> gamma;
    double detD_min = 0.0;
    bool negdef = false;
};
InteriorCertificate certify_interior(const LinearizedSystem& sys, const LyapunovWeights& w,
                                     double gamma_hi = 1.0, int bisections = 50);

/// Boundary-coefficient intervals evaluated on the steady profiles:
///   b0 in (b0_lo, b0_hi), b1 outside [b1_lo, b1_hi], c1 in (c1_lo, c1_hi),
/// plus the viscosity-corrected (c1mu_lo, c1mu_hi). The c1 intervals depend
/// on the chosen b1 and are NaN when the square root turns complex
/// (inadmissible b1).
struct CoefficientIntervals {
    double b0_lo = 0.0, b0_hi = 0.0;
    double b1_lo = 0.0, b1_hi = 0.0;
    double c1_lo = 0.0, c1_hi = 0.0;
    double c1mu_lo = 0.0, c1mu_hi = 0.0;
};
CoefficientIntervals coefficient_intervals(const SteadyState& s, const PhysicalParams& p, double b1);

/// Quadratic-form coefficients of the boundary term
///   B = a1 h(0)^2 + a2 h(L)^2 + a3 v_x(L)^2 + a4 h(L) v_x(L)
/// and the discriminants used for the negativity test.
struct BoundaryForm {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
    double delta_h = 0.0;            // a4^2 - 4 a2 a3
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
    double delta_d = 0.0;            // d2^2 - 4 d1 d3
    double alpha = 0.0;              // QB(L)[0][0]
    bool negative() const { return a1 < 0.0 && a2 < 0.0 && delta_h < 0.0; }
};
BoundaryForm boundary_form(const LinearizedSystem& sys, const LyapunovWeights& w,
                           const BoundaryCoeffs& bc);

/// Quadrature check of the decay decomposition dW/dt + gamma W = I + B for a
/// given smooth state; residual converges at the stencil order.
struct EnergyBalance {
    double I = 0.0;
    double Bterm = 0.0;
    double dWdt = 0.0;
    double W = 0.0;
    double residual = 0.0;
};
EnergyBalance energy_balance(const LinearizedSystem& sys, const LyapunovWeights& w,
                             const StateVector& y, double gamma);

/// Off-diagonal weights admit no decay certificate: for q3 != 0 on an interior
/// interval, the oscillatory compact sequence
///   h_n = phi(x) sin(n w x) / n^{1/2},  v_n = -sign(q3) phi(x) sin(n w x) / n^{3/4}
/// makes I_{y_x} = -8 mu int (q3 h_x v_x + q2 v_x^2) grow like n^{3/4} while
/// W(y_n) stays bounded.
struct ModeGrowth {
    int mode = 0;
    double I_yx = 0.0;
    double W = 0.0;
};
std::vector<ModeGrowth> offdiagonal_counterexample(const LyapunovWeights& w, const Grid& grid,
                                                   double mu, const std::vector<double>& q3,
                                                   const std::vector<int>& modes);

/// Per-condition outcome of the full certification pipeline.
struct StabilityFlags {
    bool subcritical = false;
    bool assumption15 = false;       // g H(0) < (2 + sqrt 2) V(0)^2
    bool b0_in_range = false;
    bool b1_admissible = false;
    bool c1_in_range = false;
    bool interior_negdef = false;
    bool boundary_negdef = false;
    bool certified = false;          // interior && boundary
};

struct StabilityReport {
    CoefficientIntervals intervals;
    std::optional<double> gamma_cert;
    double detD_min = 0.0;
    BoundaryForm boundary;
    StabilityFlags flags;
    BoundaryCoeffs bc;
    double subcritical_margin = 0.0;
};

/// Runs intervals + interior + boundary certification for the given gains.
StabilityReport check_stability(const SteadyState& s, const PhysicalParams& p,
                                const BoundaryCoeffs& bc);

}  // namespace svstab
