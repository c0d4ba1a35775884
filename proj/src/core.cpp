#include "svstab/core.hpp"

#include <cmath>
#include <string>

namespace svstab {

void PhysicalParams::validate() const {
    if (!(g > 0.0)) throw std::domain_error("PhysicalParams: g must be positive");
    if (!(mu > 0.0)) throw std::domain_error("PhysicalParams: mu must be positive");
    if (!(kappa >= 0.0)) throw std::domain_error("PhysicalParams: kappa must be nonnegative");
    if (!(L > 0.0)) throw std::domain_error("PhysicalParams: L must be positive");
}

Grid Grid::uniform(double L, std::size_t n) {
    if (!(L > 0.0)) throw std::domain_error("Grid: L must be positive");
    if (n < 3) throw std::domain_error("Grid: need at least 3 points");
    Grid g;
    g.n = n;
    g.dx = L / static_cast<double>(n - 1);
    g.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.x[i] = g.dx * static_cast<double>(i);
    g.x.back() = L;
    return g;
}

void BoundaryCoeffs::validate() const {
    if (!std::isfinite(b0) || !std::isfinite(b1) || !std::isfinite(c1))
        throw std::domain_error("BoundaryCoeffs: gains must be finite");
}

double friction(double H, double V, const PhysicalParams& p) {
    if (!(H > 0.0)) throw std::domain_error("friction: depth H must be positive");
    if (!(p.mu > 0.0)) throw std::domain_error("friction: mu must be positive");
    return p.kappa * V / (1.0 + p.kappa * H / (3.0 * p.mu));
}

double friction_tilde(double V, double Q0, const PhysicalParams& p) {
    if (!(V > 0.0)) throw std::domain_error("friction_tilde: V must be positive");
    if (!(Q0 > 0.0)) throw std::domain_error("friction_tilde: Q0 must be positive");
    return V * V * p.kappa / (3.0 * p.mu * V + p.kappa * Q0);
}

double trapezoid(const std::vector<double>& f, const Grid& grid) {
    if (f.size() != grid.n) throw std::invalid_argument("trapezoid: size mismatch with grid");
    double acc = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
    return acc * grid.dx;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& f, const Grid& grid) {
    if (f.size() != grid.n) throw std::invalid_argument("cumulative_trapezoid: size mismatch with grid");
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 1; i < f.size(); ++i)
        out[i] = out[i - 1] + 0.5 * grid.dx * (f[i - 1] + f[i]);
    return out;
}

double l2_norm(const StateVector& y, const Grid& grid) {
    if (y.h.size() != grid.n || y.v.size() != grid.n)
        throw std::invalid_argument("l2_norm: state size does not match grid");
    std::vector<double> f(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) f[i] = y.h[i] * y.h[i] + y.v[i] * y.v[i];
    return std::sqrt(trapezoid(f, grid));
}

std::vector<double> derivative_second_order(const std::vector<double>& f, double dx) {
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("derivative_second_order: need at least 3 points");
    std::vector<double> d(n);
    const double inv2dx = 1.0 / (2.0 * dx);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2dx;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * inv2dx;
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2dx;
    return d;
}

std::vector<double> second_derivative_second_order(const std::vector<double>& f, double dx) {
    const std::size_t n = f.size();
    if (n < 4) throw std::invalid_argument("second_derivative_second_order: need at least 4 points");
    std::vector<double> d(n);
    const double invdx2 = 1.0 / (dx * dx);
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * invdx2;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * invdx2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * invdx2;
    return d;
}

}  // namespace svstab
