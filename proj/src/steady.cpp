#include "svstab/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svstab {

namespace {

// Right-hand side of the first-order slope system u = (y, z).
struct SlopeOde {
    double g, mu, kappa, Q0;

    double f_tilde(double y) const { return y * y * kappa / (3.0 * mu * y + kappa * Q0); }

    void eval(double y, double z, double& fy, double& fz) const {
        fy = z;
        fz = z * (y - g * Q0 / (y * y)) / (4.0 * mu) + 0.75 * f_tilde(y) * y / Q0 + z * z / y;
    }

    // Jacobian of (fy, fz) with respect to (y, z).
    void jacobian(double y, double z, double j[2][2]) const {
        j[0][0] = 0.0;
        j[0][1] = 1.0;
        const double denom = 3.0 * mu * y + kappa * Q0;
        // d/dy of f_tilde(y)*y = y^3 kappa / denom
        const double dfty_dy = (3.0 * y * y * kappa * denom - y * y * y * kappa * 3.0 * mu) / (denom * denom);
        j[1][0] = z * (1.0 + 2.0 * g * Q0 / (y * y * y)) / (4.0 * mu) + 0.75 * dfty_dy / Q0 - z * z / (y * y);
        j[1][1] = (y - g * Q0 / (y * y)) / (4.0 * mu) + 2.0 * z / y;
    }
};

struct OdeNode {
    double x;
    double y, z;
    double fy, fz;  // derivatives at the node
};

// Newton solve of u - a h F(u) = rhs starting from a given guess. Returns
// false if the iteration fails to converge or leaves y > 0.
bool implicit_solve(const SlopeOde& ode, double ah, double rhs_y, double rhs_z, double& y,
                    double& z) {
    for (int it = 0; it < 30; ++it) {
        double fy, fz;
        ode.eval(y, z, fy, fz);
        const double r0 = y - ah * fy - rhs_y;
        const double r1 = z - ah * fz - rhs_z;
        double j[2][2];
        ode.jacobian(y, z, j);
        const double a00 = 1.0 - ah * j[0][0];
        const double a01 = -ah * j[0][1];
        const double a10 = -ah * j[1][0];
        const double a11 = 1.0 - ah * j[1][1];
        const double det = a00 * a11 - a01 * a10;
        if (det == 0.0 || !std::isfinite(det)) return false;
        const double dy = (r0 * a11 - r1 * a01) / det;
        const double dz = (a00 * r1 - a10 * r0) / det;
        y -= dy;
        z -= dz;
        if (!(y > 0.0) || !std::isfinite(y) || !std::isfinite(z)) return false;
        if (std::abs(dy) <= 1e-14 * (1.0 + std::abs(y)) && std::abs(dz) <= 1e-14 * (1.0 + std::abs(z)))
            return true;
    }
    return false;
}

// One TR-BDF2 step of size h from (y0, z0): trapezoidal stage to gamma h
// followed by a BDF2 stage, L-stable and second order. L-stability matters
// here: the post-layer dynamics are very stiff and a trapezoidal propagator
// rings around the slow manifold.
bool trbdf2_step(const SlopeOde& ode, double y0, double z0, double h, double& y1, double& z1) {
    constexpr double gamma = 2.0 - M_SQRT2;
    constexpr double stage2_a = 1.0 - M_SQRT1_2;        // (1-gamma)/(2-gamma)
    const double c_g = 0.5 * (M_SQRT2 + 1.0);           // 1/(gamma (2-gamma))
    const double c_n = 0.5 * (M_SQRT2 - 1.0);           // (1-gamma)^2/(gamma (2-gamma))

    double f0y, f0z;
    ode.eval(y0, z0, f0y, f0z);
    const double ah1 = 0.5 * gamma * h;
    double yg = y0 + gamma * h * f0y;  // explicit predictor
    double zg = z0 + gamma * h * f0z;
    if (!(yg > 0.0)) yg = y0;
    if (!implicit_solve(ode, ah1, y0 + ah1 * f0y, z0 + ah1 * f0z, yg, zg)) return false;

    const double ah2 = stage2_a * h;
    double y = yg, z = zg;
    if (!implicit_solve(ode, ah2, c_g * yg - c_n * y0, c_g * zg - c_n * z0, y, z)) return false;
    y1 = y;
    z1 = z;
    return true;
}

double hermite(double s, double h, double u0, double u1, double d0, double d1) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * u0 + (s3 - 2.0 * s2 + s) * h * d0 +
           (-2.0 * s3 + 3.0 * s2) * u1 + (s3 - s2) * h * d1;
}

}  // namespace

AdmissibleRegion admissible_region(const PhysicalParams& p, double H0, double V0) {
    AdmissibleRegion r{};
    const double Q0 = H0 * V0;
    r.eps = (p.g * Q0 / (V0 * V0) - V0) / 4.0;  // Gamma(0)/4, so (y0, z0) sits in Omega(2 eps)
    r.c_y = V0 / 2.0;

    // Critical root of g Q0 - y^3 - eps y^2 (bisection; the polynomial is
    // strictly decreasing for y > 0).
    double lo = r.c_y, hi = std::cbrt(p.g * Q0);
    auto dfn = [&](double y) { return p.g * Q0 / (y * y) - y - r.eps; };
    if (dfn(lo) < 0.0) lo = 1e-12;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (dfn(mid) > 0.0 ? lo : hi) = mid;
    }
    r.y1_eps = 0.5 * (lo + hi);

    // Base Duhamel constant: (3/(4 Q0)) max |f~(y) y| over [c_y, y1_eps];
    // f~(y) y is increasing in y, so the max sits at the critical root.
    const double base = 0.75 / Q0 * friction_tilde(r.y1_eps, Q0, p) * r.y1_eps;
    r.C_z = 10.0 * base * (4.0 * p.mu / r.eps) + 1.0;
    r.C1 = base + r.C_z * r.C_z / r.c_y;
    return r;
}

SteadyState solve_steady(const PhysicalParams& p, double H0, double V0, const Grid& grid,
                         const SteadySolverOptions& opts) {
    p.validate();
    if (!(H0 > 0.0)) throw std::domain_error("solve_steady: H0 must be positive");
    if (!(V0 > 0.0)) throw std::domain_error("solve_steady: V0 must be positive");
    if (!(p.g * H0 - V0 * V0 > 0.0))
        throw std::domain_error("solve_steady: supercritical initial data (g H0 - V0^2 <= 0)");
    const double L = grid.x.back();

    const double Q0 = H0 * V0;
    const SlopeOde ode{p.g, p.mu, p.kappa, Q0};
    const AdmissibleRegion reg = admissible_region(p, H0, V0);

    auto omega_check = [&](double x, double y, double z) {
        if (p.g * Q0 / (y * y) - y <= reg.eps)
            throw OmegaExitError(OmegaExitError::Bound::critical_root, x,
                                 "steady-state trajectory approached the critical root (viscosity too large "
                                 "for this steady state)");
        if (y <= reg.c_y)
            throw OmegaExitError(OmegaExitError::Bound::speed_floor, x,
                                 "steady-state speed fell to the floor c_y (viscosity too large for this "
                                 "steady state)");
        if (std::abs(z) >= reg.C_z)
            throw OmegaExitError(OmegaExitError::Bound::slope_bound, x,
                                 "steady-state slope exceeded the bound C_z (viscosity too large for this "
                                 "steady state)");
    };

    std::vector<OdeNode> nodes;
    nodes.reserve(1024);
    {
        OdeNode n0{0.0, V0, 0.0, 0.0, 0.0};
        ode.eval(n0.y, n0.z, n0.fy, n0.fz);
        nodes.push_back(n0);
    }

    // Adaptive stepping: trapezoidal rule with step-doubling error control.
    double x = 0.0;
    double h = std::min(L * 1e-3, std::max(p.mu, 1e-9));
    const double hmax = L / 8.0;
    std::size_t steps = 0;
    while (x < L) {
        if (++steps > opts.max_steps)
            throw std::runtime_error("solve_steady: step limit exceeded");
        h = std::min(h, L - x);
        const OdeNode& cur = nodes.back();

        double yf, zf, ym, zm, y2, z2;
        const bool ok_full = trbdf2_step(ode, cur.y, cur.z, h, yf, zf);
        const bool ok_half = ok_full && trbdf2_step(ode, cur.y, cur.z, 0.5 * h, ym, zm) &&
                             trbdf2_step(ode, ym, zm, 0.5 * h, y2, z2);
        if (!ok_half) {
            h *= 0.25;
            if (h < 1e-16 * std::max(1.0, L))
                throw std::runtime_error("solve_steady: step size underflow (Newton failure)");
            continue;
        }
        const double sc_y = opts.abs_tol + opts.rel_tol * std::max(std::abs(cur.y), std::abs(y2));
        const double sc_z = opts.abs_tol + opts.rel_tol * std::max(std::abs(cur.z), std::abs(z2));
        const double ey = (y2 - yf) / 3.0;
        const double ez = (z2 - zf) / 3.0;
        const double err = std::sqrt(0.5 * ((ey / sc_y) * (ey / sc_y) + (ez / sc_z) * (ez / sc_z)));
        if (err <= 1.0) {
            x += h;
            OdeNode nn{x, y2, z2, 0.0, 0.0};
            ode.eval(nn.y, nn.z, nn.fy, nn.fz);
            nodes.push_back(nn);
            omega_check(x, y2, z2);
            const double fac = (err > 0.0) ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
            h = std::min(hmax, h * std::clamp(fac, 0.2, 5.0));
        } else {
            h *= std::max(0.1, 0.9 * std::pow(err, -1.0 / 3.0));
        }
    }

    // Resample onto the uniform grid (cubic Hermite in each step interval).
    SteadyState s;
    s.grid = grid;
    const std::size_t n = grid.n;
    s.Hs.resize(n); s.Vs.resize(n); s.Vsx.resize(n); s.Vsxx.resize(n);
    s.Hsx.resize(n); s.Hsxx.resize(n); s.Gamma.resize(n);
    s.Q0 = Q0;
    s.C0 = V0 * friction(H0, V0, p) / (H0 * (p.g * H0 - V0 * V0)) / p.mu;

    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = grid.x[i];
        while (k + 2 < nodes.size() && nodes[k + 1].x < xi) ++k;
        const OdeNode& a = nodes[k];
        const OdeNode& b = nodes[k + 1 < nodes.size() ? k + 1 : k];
        double y, z;
        if (&a == &b || b.x <= a.x) {
            y = a.y;
            z = a.z;
        } else {
            const double hseg = b.x - a.x;
            const double sfrac = std::clamp((xi - a.x) / hseg, 0.0, 1.0);
            y = hermite(sfrac, hseg, a.y, b.y, a.fy, b.fy);
            z = hermite(sfrac, hseg, a.z, b.z, a.fz, b.fz);
        }
        double fy, fz;
        ode.eval(y, z, fy, fz);
        s.Vs[i] = y;
        s.Vsx[i] = z;
        s.Vsxx[i] = fz;
        s.Hs[i] = Q0 / y;
        s.Hsx[i] = -Q0 * z / (y * y);
        s.Hsxx[i] = -Q0 * (fz / (y * y) - 2.0 * z * z / (y * y * y));
        s.Gamma[i] = p.g * s.Hs[i] / y - y;
    }
    s.validate(p);
    return s;
}

void SteadyState::validate(const PhysicalParams& p) const {
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (std::abs(Hs[i] * Vs[i] - Q0) > 1e-10 * std::abs(Q0))
            throw std::logic_error("SteadyState: mass flux not constant");
        if (!(p.g * Hs[i] - Vs[i] * Vs[i] > 0.0))
            throw std::logic_error("SteadyState: profile left the subcritical regime");
        if (Vsx[i] < -1e-12)
            throw std::logic_error("SteadyState: negative velocity slope");
        if (!(Gamma[i] > 0.0))
            throw std::logic_error("SteadyState: Gamma must be positive");
        const double hx_ref = -Q0 * Vsx[i] / (Vs[i] * Vs[i]);
        if (std::abs(Hsx[i] - hx_ref) > 1e-10 * std::max(1.0, std::abs(hx_ref)))
            throw std::logic_error("SteadyState: Hsx inconsistent with flux constancy");
    }
}

AsymptoticsReport verify_asymptotics(const SteadyState& s, const PhysicalParams& p) {
    AsymptoticsReport r;
    const double V0 = s.Vs.front();
    const std::vector<double> cumG = cumulative_trapezoid(s.Gamma, s.grid);
    for (std::size_t i = 0; i < s.grid.n; ++i) {
        const double layer = std::exp(-cumG[i] / (4.0 * p.mu));
        const double f = friction(s.Hs[i], s.Vs[i], p);
        const double margin = p.g * s.Hs[i] - s.Vs[i] * s.Vs[i];
        const double pred_x = s.Vs[i] * f / (s.Hs[i] * margin) - s.C0 * p.mu * layer;
        const double pred_xx = s.C0 / (4.0 * s.Vs[i]) * margin * layer;
        r.R1 = std::max(r.R1, std::abs(s.Vs[i] - V0));
        r.R2 = std::max(r.R2, std::abs(s.Vsx[i] - pred_x));
        r.R3 = std::max(r.R3, std::abs(s.Vsxx[i] - pred_xx));
    }
    return r;
}

double check_subcritical(const SteadyState& s, const PhysicalParams& p) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.grid.n; ++i)
        m = std::min(m, p.g * s.Hs[i] - s.Vs[i] * s.Vs[i]);
    return m;
}

bool check_assumption_nearcritical(const SteadyState& s, const PhysicalParams& p) {
    return p.g * s.Hs.front() < (2.0 + std::sqrt(2.0)) * s.Vs.front() * s.Vs.front();
}

}  // namespace svstab
