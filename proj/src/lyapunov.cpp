#include "svstab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svstab {

LyapunovWeights build_weights(const SteadyState& s, const PhysicalParams& p) {
    const std::size_t n = s.grid.n;
    LyapunovWeights w;
    w.mu = p.mu;
    w.q1.resize(n); w.q2.resize(n);
    w.qt1.resize(n); w.qt2.resize(n);
    w.qt1x.resize(n); w.q2x.resize(n); w.q2xx.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double H = s.Hs[i], Hx = s.Hsx[i], Hxx = s.Hsxx[i];
        const double Vx = s.Vsx[i], Vxx = s.Vsxx[i];
        w.qt2[i] = H;
        w.qt1[i] = p.g - 4.0 * (1.0 + p.mu) * Vx / H;
        w.q1[i] = p.g + p.mu * w.qt1[i];
        w.q2[i] = H + p.mu * w.qt2[i];
        w.qt1x[i] = -4.0 * (1.0 + p.mu) * (Vxx * H - Vx * Hx) / (H * H);
        w.q2x[i] = (1.0 + p.mu) * Hx;
        w.q2xx[i] = (1.0 + p.mu) * Hxx;
    }
    return w;
}

double evaluate_W(const StateVector& y, const LyapunovWeights& w, const Grid& grid) {
    if (y.h.size() != grid.n || y.v.size() != grid.n || w.q1.size() != grid.n)
        throw std::invalid_argument("evaluate_W: size mismatch");
    std::vector<double> f(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i)
        f[i] = w.q1[i] * y.h[i] * y.h[i] + w.q2[i] * y.v[i] * y.v[i];
    return trapezoid(f, grid);
}

Mat2 qb_at(const LinearizedSystem& sys, const LyapunovWeights& w, std::size_t i) {
    const Mat2& B = sys.B[i];
    return {w.q1[i] * B.m00, w.q1[i] * B.m01,
            w.q2[i] * B.m10, w.q2[i] * B.m11};
}

Mat2 qb_x_at(const LinearizedSystem& sys, const LyapunovWeights& w, std::size_t i) {
    const SteadyState& s = *sys.steady;
    const double mu = sys.params.mu;
    const double H = s.Hs[i], V = s.Vs[i], Hx = s.Hsx[i], Vx = s.Vsx[i], Vxx = s.Vsxx[i];
    const double q1x = mu * w.qt1x[i];
    Mat2 d;
    d.m00 = q1x * V + w.q1[i] * Vx;
    d.m01 = q1x * H + w.q1[i] * Hx;
    // row 2 differentiated directly; equals row 1 up to round-off since QB is
    // symmetric pointwise
    d.m10 = w.q2x[i] * (sys.params.g - 4.0 * mu * Vx / H) -
            4.0 * mu * w.q2[i] * (Vxx * H - Vx * Hx) / (H * H);
    d.m11 = -4.0 * mu * (1.0 + mu) * s.Hsxx[i];
    return d;
}

Mat2 compute_phi(const LinearizedSystem& sys, const LyapunovWeights& w, double gamma, std::size_t i) {
    const Mat2& C = sys.C[i];
    const double q1 = w.q1[i], q2 = w.q2[i];
    const Mat2 qc_sym{2.0 * q1 * C.m00, q1 * C.m01 + q2 * C.m10,
                      q1 * C.m01 + q2 * C.m10, 2.0 * q2 * C.m11};
    const Mat2 qxxA = Mat2::diag(0.0, -4.0 * sys.params.mu * w.q2xx[i]);
    const Mat2 gq = Mat2::diag(gamma * q1, gamma * q2);
    return gq - qc_sym - qxxA + qb_x_at(sys, w, i);
}

InteriorCertificate certify_interior(const LinearizedSystem& sys, const LyapunovWeights& w,
                                     double gamma_hi, int bisections) {
    const std::size_t n = sys.grid().n;
    InteriorCertificate cert;
    cert.detD_min = std::numeric_limits<double>::infinity();
    cert.negdef = true;
    for (std::size_t i = 0; i < n; ++i) {
        const Mat2 D = compute_phi(sys, w, 0.0, i);
        cert.detD_min = std::min(cert.detD_min, D.det());
        if (!negative_definite(D)) cert.negdef = false;
    }
    if (!cert.negdef) return cert;

    auto negdef_everywhere = [&](double gamma) {
        for (std::size_t i = 0; i < n; ++i)
            if (!negative_definite(compute_phi(sys, w, gamma, i))) return false;
        return true;
    };

    // phi is affine in gamma with positive-definite Q, so admissibility is a
    // lower interval: bisect its right endpoint.
    if (negdef_everywhere(gamma_hi)) {
        cert.gamma = gamma_hi;
        return cert;
    }
    double lo = 0.0, hi = gamma_hi;
    for (int it = 0; it < bisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        (negdef_everywhere(mid) ? lo : hi) = mid;
    }
    cert.gamma = lo;
    return cert;
}

CoefficientIntervals coefficient_intervals(const SteadyState& s, const PhysicalParams& p, double b1) {
    CoefficientIntervals iv;
    const double V0 = s.Vs.front(), H0 = s.Hs.front();
    const double VL = s.Vs.back(), HL = s.Hs.back();

    const double arg0 = 1.0 / (V0 * V0) - 1.0 / (p.g * H0);
    const double argL = 1.0 / (VL * VL) - 1.0 / (p.g * HL);
    if (arg0 < 0.0 || argL < 0.0)
        throw std::domain_error("coefficient_intervals: supercritical boundary values");
    const double m0 = p.g / V0, d0 = p.g * std::sqrt(arg0);
    iv.b0_lo = m0 - d0;
    iv.b0_hi = m0 + d0;
    const double mL = -p.g / VL, dL = p.g * std::sqrt(argL);
    iv.b1_lo = mL - dL;
    iv.b1_hi = mL + dL;

    // Inviscid c1 interval at x = L; the square-root argument has roots
    // exactly at b1_lo and b1_hi, so it is nonnegative for admissible b1.
    const double margin = HL * p.g - VL * VL;
    const double carg = VL * (HL * VL * b1 * b1 / p.g + 2.0 * HL * b1 + VL);
    if (carg >= 0.0) {
        const double root = std::sqrt(carg);
        const double lo = 4.0 * (-VL - b1 * HL - root) / margin;
        const double hi = 4.0 * (-VL - b1 * HL + root) / margin;
        iv.c1_lo = std::min(lo, hi);
        iv.c1_hi = std::max(lo, hi);
    } else {
        iv.c1_lo = iv.c1_hi = std::numeric_limits<double>::quiet_NaN();
    }

    // Viscosity-corrected interval: exact roots of the boundary polynomial
    // P_d(c1) = d1 c1^2 + d2 c1 + d3 evaluated at x = L. Its mu -> 0 limit is
    // the inviscid interval above.
    const double mu = p.mu;
    const double HxL = s.Hsx.back(), VxL = s.Vsx.back();
    const double q1L = p.g + mu * (p.g - 4.0 * (1.0 + mu) * VxL / HL);
    const double q2L = (1.0 + mu) * HL;
    const double q2xL = (1.0 + mu) * HxL;
    const double alpha = q1L * VL;
    const double beta = q1L * HL;
    const double gammaL = q2L * (VL - 4.0 * mu * HxL / HL);
    const double d1 = -4.0 * (alpha * gammaL - beta * beta) - 16.0 * alpha * mu * q2xL;
    const double d2 = 32.0 * q2L * (alpha + beta * b1);
    const double d3 = 64.0 * b1 * b1 * q2L * q2L;
    const double delta_d = d2 * d2 - 4.0 * d1 * d3;
    if (delta_d >= 0.0 && d1 > 0.0) {
        const double root = std::sqrt(delta_d);
        iv.c1mu_lo = (-d2 - root) / (2.0 * d1);
        iv.c1mu_hi = (-d2 + root) / (2.0 * d1);
    } else {
        iv.c1mu_lo = iv.c1mu_hi = std::numeric_limits<double>::quiet_NaN();
    }
    return iv;
}

namespace {

double quad_form(const Mat2& m, double x0, double x1) {
    return m.m00 * x0 * x0 + (m.m01 + m.m10) * x0 * x1 + m.m11 * x1 * x1;
}

}  // namespace

BoundaryForm boundary_form(const LinearizedSystem& sys, const LyapunovWeights& w,
                           const BoundaryCoeffs& bc) {
    const std::size_t last = sys.grid().n - 1;
    const double mu = sys.params.mu;
    const Mat2 qb0 = qb_at(sys, w, 0);
    const Mat2 qbL = qb_at(sys, w, last);
    const double q2L = w.q2[last];
    const double q2x0 = w.q2x[0], q2xL = w.q2x[last];
    const double b0 = bc.b0, b1 = bc.b1, c1 = bc.c1;

    BoundaryForm f;
    f.alpha = qbL.m00;
    const double beta = 0.5 * (qbL.m01 + qbL.m10);
    const double gammaL = qbL.m11;

    f.a1 = quad_form(qb0, 1.0, -b0) + 4.0 * mu * b0 * b0 * q2x0;
    f.a2 = -quad_form(qbL, 1.0, b1) - 4.0 * mu * b1 * b1 * q2xL;
    f.a3 = mu * mu * (-gammaL * c1 * c1 + 8.0 * c1 * q2L - 4.0 * mu * c1 * c1 * q2xL);
    f.a4 = mu * (-2.0 * beta * c1 - 2.0 * gammaL * b1 * c1 + 8.0 * b1 * q2L - 8.0 * mu * b1 * c1 * q2xL);
    f.delta_h = f.a4 * f.a4 - 4.0 * f.a2 * f.a3;

    f.d1 = -4.0 * qbL.det() - 16.0 * f.alpha * mu * q2xL;
    f.d2 = 32.0 * q2L * (f.alpha + beta * b1);
    f.d3 = 64.0 * b1 * b1 * q2L * q2L;
    f.delta_d = f.d2 * f.d2 - 4.0 * f.d1 * f.d3;
    return f;
}

EnergyBalance energy_balance(const LinearizedSystem& sys, const LyapunovWeights& w,
                             const StateVector& y, double gamma) {
    const Grid& g = sys.grid();
    const std::size_t n = g.n;
    const double mu = sys.params.mu;

    EnergyBalance eb;
    eb.W = evaluate_W(y, w, g);

    const StateVector yt = apply_operator(sys, y);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = 2.0 * (w.q1[i] * y.h[i] * yt.h[i] + w.q2[i] * y.v[i] * yt.v[i]);
    eb.dWdt = trapezoid(f, g);

    const std::vector<double> vx = derivative_second_order(y.v, g.dx);
    for (std::size_t i = 0; i < n; ++i) {
        const Mat2 phi = compute_phi(sys, w, gamma, i);
        f[i] = quad_form(phi, y.h[i], y.v[i]) - 8.0 * mu * w.q2[i] * vx[i] * vx[i];
    }
    eb.I = trapezoid(f, g);

    auto bflux = [&](std::size_t i) {
        const Mat2 qb = qb_at(sys, w, i);
        return -quad_form(qb, y.h[i], y.v[i]) - 4.0 * mu * w.q2x[i] * y.v[i] * y.v[i] +
               8.0 * mu * w.q2[i] * y.v[i] * vx[i];
    };
    eb.Bterm = bflux(n - 1) - bflux(0);
    eb.residual = std::abs(eb.dWdt + gamma * eb.W - eb.I - eb.Bterm);
    return eb;
}

std::vector<ModeGrowth> offdiagonal_counterexample(const LyapunovWeights& w, const Grid& grid,
                                                   double mu, const std::vector<double>& q3,
                                                   const std::vector<int>& modes) {
    if (q3.size() != grid.n)
        throw std::invalid_argument("offdiagonal_counterexample: q3 profile size mismatch");
    // Support of q3 must be a proper interior interval.
    std::size_t lo = grid.n, hi = 0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (q3[i] != 0.0) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    }
    if (lo > hi) throw std::invalid_argument("offdiagonal_counterexample: q3 is identically zero");
    if (lo == 0 || hi == grid.n - 1)
        throw std::invalid_argument("offdiagonal_counterexample: q3 support must be interior");

    const double xa = grid.x[lo], xb = grid.x[hi];
    const double width = xb - xa;
    const double omega = 2.0 * M_PI / width;

    // C-infinity bump on (xa, xb): exp(-1/(1 - t^2)) with t in (-1, 1).
    auto bump = [&](double x, double& b, double& bx) {
        const double t = 2.0 * (x - xa) / width - 1.0;
        if (t <= -1.0 || t >= 1.0) {
            b = bx = 0.0;
            return;
        }
        const double om = 1.0 - t * t;
        b = std::exp(-1.0 / om);
        bx = b * (-2.0 * t / (om * om)) * (2.0 / width);
    };

    std::vector<ModeGrowth> out;
    out.reserve(modes.size());
    for (int nm : modes) {
        if (nm < 1) throw std::invalid_argument("offdiagonal_counterexample: modes must be >= 1");
        const double sh = 1.0 / std::sqrt(static_cast<double>(nm));
        const double sv = 1.0 / std::pow(static_cast<double>(nm), 0.75);
        StateVector y = StateVector::zero(grid.n);
        std::vector<double> integrand(grid.n, 0.0);
        for (std::size_t i = 0; i < grid.n; ++i) {
            double b, bx;
            bump(grid.x[i], b, bx);
            const double ph = omega * static_cast<double>(nm) * (grid.x[i] - xa);
            const double snv = std::sin(ph), csv = std::cos(ph);
            const double mode_x = bx * snv + b * omega * static_cast<double>(nm) * csv;
            const double sgn = (q3[i] > 0.0) ? 1.0 : (q3[i] < 0.0 ? -1.0 : 1.0);
            y.h[i] = sh * b * snv;
            y.v[i] = -sgn * sv * b * snv;
            const double hx = sh * mode_x;
            const double vx = -sgn * sv * mode_x;
            integrand[i] = -8.0 * mu * (q3[i] * hx * vx + w.q2[i] * vx * vx);
        }
        ModeGrowth mg;
        mg.mode = nm;
        mg.I_yx = trapezoid(integrand, grid);
        mg.W = evaluate_W(y, w, grid);
        out.push_back(mg);
    }
    return out;
}

StabilityReport check_stability(const SteadyState& s, const PhysicalParams& p,
                                const BoundaryCoeffs& bc) {
    StabilityReport rep;
    rep.bc = bc;
    rep.intervals = coefficient_intervals(s, p, bc.b1);
    rep.subcritical_margin = check_subcritical(s, p);

    const LyapunovWeights w = build_weights(s, p);
    const LinearizedSystem sys = build_linear_system(s, p, bc);
    const InteriorCertificate interior = certify_interior(sys, w);
    rep.detD_min = interior.detD_min;
    rep.boundary = boundary_form(sys, w, bc);

    StabilityFlags& fl = rep.flags;
    fl.subcritical = rep.subcritical_margin > 0.0;
    fl.assumption15 = check_assumption_nearcritical(s, p);
    fl.b0_in_range = bc.b0 > rep.intervals.b0_lo && bc.b0 < rep.intervals.b0_hi;
    fl.b1_admissible = bc.b1 < rep.intervals.b1_lo || bc.b1 > rep.intervals.b1_hi;
    fl.c1_in_range = std::isfinite(rep.intervals.c1_lo) && bc.c1 > rep.intervals.c1_lo &&
                     bc.c1 < rep.intervals.c1_hi;
    fl.interior_negdef = interior.negdef;
    fl.boundary_negdef = rep.boundary.negative();
    fl.certified = fl.interior_negdef && fl.boundary_negdef;
    if (fl.certified) rep.gamma_cert = interior.gamma;
    return rep;
}

}  // namespace svstab
