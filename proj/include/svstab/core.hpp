#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace svstab {

/// Channel and fluid constants shared by every module.
/// Units: g [m/s^2], mu [m^2/s], kappa [m/s], L [m].
struct PhysicalParams {
    double g = 9.81;
    double mu = 1e-3;
    double kappa = 2e-3;
    double L = 1000.0;

    /// Throws std::domain_error unless g > 0, mu > 0, kappa >= 0, L > 0.
    void validate() const;
};

/// Uniform grid on [0, L] with x.front() == 0 and x.back() == L.
struct Grid {
    std::size_t n = 0;
    double dx = 0.0;
    std::vector<double> x;

    static Grid uniform(double L, std::size_t n);
    double length() const { return x.empty() ? 0.0 : x.back(); }
};

/// Water-depth and velocity perturbations (h, v) sampled on a grid.
struct StateVector {
    std::vector<double> h;
    std::vector<double> v;

    static StateVector zero(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }
    std::size_t size() const { return h.size(); }
};

/// Linearized boundary feedback gains:
///   v(0) = -b0 h(0),   v(L) = b1 h(L) + mu c1 v_x(L),   v_x(0) = 0.
struct BoundaryCoeffs {
    double b0 = 0.0;
    double b1 = 0.0;
    double c1 = 0.0;

    void validate() const;  // all finite
};

/// Modified friction force per density: kappa V / (1 + kappa H / (3 mu)).
/// Requires H > 0 and p.mu > 0.
double friction(double H, double V, const PhysicalParams& p);

/// Reduced friction used by the steady-state ODE: V^2 kappa / (3 mu V + kappa Q0).
/// Requires V > 0 and Q0 > 0.
double friction_tilde(double V, double Q0, const PhysicalParams& p);

/// Composite-trapezoid quadrature of f over the grid.
double trapezoid(const std::vector<double>& f, const Grid& grid);

/// Cumulative trapezoid integral; out[i] = integral of f over [x0, x_i].
std::vector<double> cumulative_trapezoid(const std::vector<double>& f, const Grid& grid);

/// sqrt of the trapezoid quadrature of (h^2 + v^2).
double l2_norm(const StateVector& y, const Grid& grid);

/// Second-order first derivative on a uniform grid: centered interior,
/// one-sided 3-point at both ends. Requires f.size() >= 3.
std::vector<double> derivative_second_order(const std::vector<double>& f, double dx);

/// Second-order second derivative: centered interior, one-sided 4-point at
/// both ends. Requires f.size() >= 4.
std::vector<double> second_derivative_second_order(const std::vector<double>& f, double dx);

}  // namespace svstab
