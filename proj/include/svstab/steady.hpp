#pragma once

#include <string>

#include "svstab/core.hpp"

namespace svstab {

/// Steady-state profiles of the viscous channel flow, sampled on a grid.
/// Hs*Vs is the constant flux Q0; Gamma(x) = g Hs/Vs - Vs > 0 is the
/// relaxation coefficient of the slope equation.
struct SteadyState {
    Grid grid;
    std::vector<double> Hs;    // depth [m]
    std::vector<double> Vs;    // velocity [m/s]
    std::vector<double> Vsx;   // dV/dx [1/s]
    std::vector<double> Vsxx;  // d2V/dx2 [1/(m s)]
    std::vector<double> Hsx;   // dH/dx [-]
    std::vector<double> Hsxx;  // d2H/dx2 [1/m]
    std::vector<double> Gamma; // [m/s]
    double Q0 = 0.0;           // flux [m^2/s]
    double C0 = 0.0;           // boundary-layer amplitude constant

    /// Checks flux constancy, subcriticality, Vsx >= -1e-12 and the
    /// chain-rule identity Hsx = -Q0 Vsx / Vs^2. Throws std::logic_error.
    void validate(const PhysicalParams& p) const;
};

/// Thrown when the steady-state trajectory leaves the admissible region:
/// the speed approaches the critical root, falls below the floor c_y, or the
/// slope exceeds the bound C_z. In all three cases the viscosity is too large
/// for this steady state.
struct OmegaExitError : std::runtime_error {
    enum class Bound { critical_root, speed_floor, slope_bound };
    Bound bound;
    double x_exit;
    OmegaExitError(Bound b, double x, const std::string& msg) : std::runtime_error(msg), bound(b), x_exit(x) {}
};

struct SteadySolverOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    std::size_t max_steps = 2'000'000;
};

/// Solves the steady-state slope system (y, z) = (V, V_x):
///   y' = z,   mu z' = z (y - g Q0 / y^2) / 4 + (3/4) mu f~(y) y / Q0 + mu z^2 / y
/// from (V0, 0), with an adaptive L-stable TR-BDF2 integrator (step-doubling
/// error control), and resamples onto the given uniform grid by cubic Hermite
/// interpolation.
/// Preconditions: H0 > 0, V0 > 0, g H0 - V0^2 > 0 (else std::domain_error).
/// Throws OmegaExitError if the trajectory leaves the admissible region.
SteadyState solve_steady(const PhysicalParams& p, double H0, double V0, const Grid& grid,
                         const SteadySolverOptions& opts = {});

/// Sup-norm residuals of the small-viscosity expansions:
///   R1 = sup |V - V0|
///   R2 = sup |V_x - (V f/(H (gH - V^2)) - C0 mu e^{-int Gamma/(4 mu)})|
///   R3 = sup |V_xx - (C0/(4V)) (gH - V^2) e^{-int Gamma/(4 mu)}|
struct AsymptoticsReport {
    double R1 = 0.0;
    double R2 = 0.0;
    double R3 = 0.0;
};
AsymptoticsReport verify_asymptotics(const SteadyState& s, const PhysicalParams& p);

/// Minimum of g H - V^2 over the grid; positive means subcritical everywhere.
double check_subcritical(const SteadyState& s, const PhysicalParams& p);

/// True iff g H(0) < (2 + sqrt 2) V(0)^2 (strict).
bool check_assumption_nearcritical(const SteadyState& s, const PhysicalParams& p);

/// Constants of the admissible region used by the solver; exposed so the
/// slope bound can be checked independently.
struct AdmissibleRegion {
    double eps;      // Gamma floor
    double c_y;      // speed floor
    double C_z;      // slope bound
    double C1;       // Duhamel constant
    double y1_eps;   // critical root of g Q0 - y^3 - eps y^2
};
AdmissibleRegion admissible_region(const PhysicalParams& p, double H0, double V0);

}  // namespace svstab
