#include "svstab/simulate.hpp"

#include <cmath>
#include <limits>

namespace svstab {

namespace {

// Characteristic flux splitting B = B+ + B- with B+- = R diag(max/min(lambda, 0)) R^-1.
void split_matrix(const Mat2& B, Mat2& Bp, Mat2& Bm) {
    if (std::abs(B.m01) < 1e-300 && std::abs(B.m10) < 1e-300) {
        Bp = {std::max(B.m00, 0.0), 0.0, 0.0, std::max(B.m11, 0.0)};
        Bm = B - Bp;
        return;
    }
    double lo, hi;
    eig2_real(B, lo, hi);
    // eigenvector basis: (B01, lambda - B00) or (lambda - B11, B10), whichever
    // off-diagonal entry is better conditioned
    double r0, s0, r1, s1;
    if (std::abs(B.m01) >= std::abs(B.m10)) {
        r0 = B.m01; s0 = lo - B.m00;
        r1 = B.m01; s1 = hi - B.m00;
    } else {
        r0 = lo - B.m11; s0 = B.m10;
        r1 = hi - B.m11; s1 = B.m10;
    }
    const double det = r0 * s1 - r1 * s0;
    const double lp0 = std::max(lo, 0.0), lp1 = std::max(hi, 0.0);
    // R diag(lp) R^-1 with R = [[r0, r1],[s0, s1]]
    Bp.m00 = (r0 * lp0 * s1 - r1 * lp1 * s0) / det;
    Bp.m01 = (r1 * lp1 * r0 - r0 * lp0 * r1) / det;
    Bp.m10 = (s0 * lp0 * s1 - s1 * lp1 * s0) / det;
    Bp.m11 = (s1 * lp1 * r0 - s0 * lp0 * r1) / det;
    Bm = B - Bp;
}

}  // namespace

ImexStepper::ImexStepper(const LinearizedSystem& sys, double dt) : sys_(&sys) {
    const Grid& g = sys.grid();
    n_ = g.n;
    if (n_ < 6) throw std::invalid_argument("ImexStepper: grid too small (need n >= 6)");
    dx_ = g.dx;
    dt_ = dt;
    mu_ = sys.params.mu;
    if (!(dt > 0.0)) throw std::invalid_argument("ImexStepper: dt must be positive");

    cfl_limit_ = 0.9 * dx_ / spectral_radius_B(sys);
    if (dt > cfl_limit_)
        throw std::invalid_argument("ImexStepper: dt violates the advective CFL limit");

    Bp_.resize(n_);
    Bm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) split_matrix(sys.B[i], Bp_[i], Bm_[i]);

    r_ = 4.0 * mu_ * dt_ / (dx_ * dx_);
    theta_ = mu_ * sys.bc.c1 / (2.0 * dx_);

    // Thomas factorization of the constant interior matrix
    // (-r, 1 + 2r, -r) acting on v[1..n-2].
    const std::size_t m = n_ - 2;
    cp_.resize(m);
    inv_den_.resize(m);
    const double b = 1.0 + 2.0 * r_, a = -r_, c = -r_;
    double den = b;
    cp_[0] = c / den;
    inv_den_[0] = 1.0 / den;
    for (std::size_t i = 1; i < m; ++i) {
        den = b - a * cp_[i - 1];
        cp_[i] = c / den;
        inv_den_[i] = 1.0 / den;
    }

    // Interior responses to unit boundary values.
    std::vector<double> rhs(m, 0.0);
    rhs[0] = r_;
    u0_ = solve_interior(rhs);
    rhs[0] = 0.0;
    rhs[m - 1] = r_;
    uL_ = solve_interior(rhs);

    // Closure system rows: the one-sided v_x(0) = 0 relation and the Robin
    // relation at L, with interior values eliminated through u0_/uL_.
    const double robin_den = 1.0 - 3.0 * theta_;
    if (std::abs(robin_den) < 1e-12)
        throw std::runtime_error("ImexStepper: Robin row is singular (mu c1 ~ 2 dx / 3)");
    if (sys.bc.b0 != 0.0) {
        cl00_ = -3.0 + 4.0 * u0_[0] - u0_[1];
        cl01_ = 4.0 * uL_[0] - uL_[1];
    } else {
        cl00_ = 1.0;  // Dirichlet v(0) = 0
        cl01_ = 0.0;
    }
    cl10_ = 4.0 * theta_ * u0_[m - 1] - theta_ * u0_[m - 2];
    cl11_ = robin_den + 4.0 * theta_ * uL_[m - 1] - theta_ * uL_[m - 2];
    const double cdet = cl00_ * cl11_ - cl01_ * cl10_;
    if (!(std::abs(cdet) > 1e-300))
        throw std::runtime_error("ImexStepper: boundary closure system is singular");
}

std::vector<double> ImexStepper::solve_interior(const std::vector<double>& rhs) const {
    const std::size_t m = rhs.size();
    std::vector<double> d(m);
    const double a = -r_;
    d[0] = rhs[0] * inv_den_[0];
    for (std::size_t i = 1; i < m; ++i) d[i] = (rhs[i] - a * d[i - 1]) * inv_den_[i];
    for (std::size_t i = m - 1; i-- > 0;) d[i] -= cp_[i] * d[i + 1];
    return d;
}

void ImexStepper::explicit_rhs(const StateVector& y, double t, const Forcing* forcing,
                               StateVector& k) const {
    const double inv2dx = 1.0 / (2.0 * dx_);
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
        double hm, vm;  // backward-biased derivative (for B+)
        double hp, vp;  // forward-biased derivative (for B-)
        if (i >= 2) {
            hm = (3.0 * y.h[i] - 4.0 * y.h[i - 1] + y.h[i - 2]) * inv2dx;
            vm = (3.0 * y.v[i] - 4.0 * y.v[i - 1] + y.v[i - 2]) * inv2dx;
        } else if (i == 1) {
            hm = (y.h[2] - y.h[0]) * inv2dx;
            vm = (y.v[2] - y.v[0]) * inv2dx;
        } else {
            hm = (-3.0 * y.h[0] + 4.0 * y.h[1] - y.h[2]) * inv2dx;
            vm = (-3.0 * y.v[0] + 4.0 * y.v[1] - y.v[2]) * inv2dx;
        }
        if (i + 2 < n) {
            hp = (-3.0 * y.h[i] + 4.0 * y.h[i + 1] - y.h[i + 2]) * inv2dx;
            vp = (-3.0 * y.v[i] + 4.0 * y.v[i + 1] - y.v[i + 2]) * inv2dx;
        } else if (i + 2 == n) {
            hp = (y.h[n - 1] - y.h[n - 3]) * inv2dx;
            vp = (y.v[n - 1] - y.v[n - 3]) * inv2dx;
        } else {
            hp = (3.0 * y.h[n - 1] - 4.0 * y.h[n - 2] + y.h[n - 3]) * inv2dx;
            vp = (3.0 * y.v[n - 1] - 4.0 * y.v[n - 2] + y.v[n - 3]) * inv2dx;
        }
        double th, tv, uh, uv, ch, cv;
        Bp_[i].mul_vec(hm, vm, th, tv);
        Bm_[i].mul_vec(hp, vp, uh, uv);
        sys_->C[i].mul_vec(y.h[i], y.v[i], ch, cv);
        k.h[i] = -(th + uh + ch);
        k.v[i] = -(tv + uv + cv);
    }
    if (forcing) {
        static thread_local std::vector<double> Fh, Fv;
        Fh.assign(n, 0.0);
        Fv.assign(n, 0.0);
        (*forcing)(t, Fh, Fv);
        for (std::size_t i = 0; i < n; ++i) {
            k.h[i] += Fh[i];
            k.v[i] += Fv[i];
        }
    }
}

void ImexStepper::close_algebraic(StateVector& y) const {
    const std::size_t n = n_;
    const BoundaryCoeffs& bc = sys_->bc;
    if (bc.b0 != 0.0) {
        y.v[0] = (4.0 * y.v[1] - y.v[2]) / 3.0;
        y.h[0] = -y.v[0] / bc.b0;
    } else {
        y.v[0] = 0.0;
        y.h[0] = 3.0 * y.h[1] - 3.0 * y.h[2] + y.h[3];
    }
    y.h[n - 1] = 3.0 * y.h[n - 2] - 3.0 * y.h[n - 3] + y.h[n - 4];
    y.v[n - 1] = (bc.b1 * y.h[n - 1] - 4.0 * theta_ * y.v[n - 2] + theta_ * y.v[n - 3]) /
                 (1.0 - 3.0 * theta_);
}

void ImexStepper::step(StateVector& y, double t, const Forcing* forcing) const {
    const std::size_t n = n_;
    static thread_local StateVector k1, k2, ytmp;
    if (k1.size() != n) {
        k1 = StateVector::zero(n);
        k2 = StateVector::zero(n);
        ytmp = StateVector::zero(n);
    }

    // explicit transport + source (Heun stages)
    explicit_rhs(y, t, forcing, k1);
    for (std::size_t i = 0; i < n; ++i) {
        ytmp.h[i] = y.h[i] + dt_ * k1.h[i];
        ytmp.v[i] = y.v[i] + dt_ * k1.v[i];
    }
    close_algebraic(ytmp);
    explicit_rhs(ytmp, t + dt_, forcing, k2);
    for (std::size_t i = 0; i < n; ++i) {
        y.h[i] += 0.5 * dt_ * (k1.h[i] + k2.h[i]);
        y.v[i] += 0.5 * dt_ * (k1.v[i] + k2.v[i]);
    }

    // outgoing-characteristic closure of h(L) before the Robin row needs it
    y.h[n - 1] = 3.0 * y.h[n - 2] - 3.0 * y.h[n - 3] + y.h[n - 4];

    // implicit diffusion solve for v
    const std::size_t m = n - 2;
    static thread_local std::vector<double> rhs, w;
    rhs.assign(y.v.begin() + 1, y.v.begin() + 1 + m);
    w = solve_interior(rhs);

    const BoundaryCoeffs& bc = sys_->bc;
    double rhs0, rhsL;
    if (bc.b0 != 0.0)
        rhs0 = -4.0 * w[0] + w[1];
    else
        rhs0 = 0.0;
    rhsL = bc.b1 * y.h[n - 1] - 4.0 * theta_ * w[m - 1] + theta_ * w[m - 2];
    const double cdet = cl00_ * cl11_ - cl01_ * cl10_;
    const double v0 = (rhs0 * cl11_ - rhsL * cl01_) / cdet;
    const double vL = (cl00_ * rhsL - cl10_ * rhs0) / cdet;

    y.v[0] = v0;
    y.v[n - 1] = vL;
    for (std::size_t i = 0; i < m; ++i) y.v[i + 1] = w[i] + v0 * u0_[i] + vL * uL_[i];

    if (bc.b0 != 0.0)
        y.h[0] = -v0 / bc.b0;
    else
        y.h[0] = 3.0 * y.h[1] - 3.0 * y.h[2] + y.h[3];
}

StateVector imex_step(const LinearizedSystem& sys, const StateVector& y, double dt) {
    ImexStepper stepper(sys, dt);
    StateVector out = y;
    stepper.step(out);
    return out;
}

SimulationTrace simulate(const LinearizedSystem& sys, const SimulationConfig& cfg) {
    const Grid& g = sys.grid();
    if (cfg.initial.h.size() != g.n || cfg.initial.v.size() != g.n)
        throw std::invalid_argument("simulate: initial state does not match grid");
    if (cfg.T < 0.0) throw std::invalid_argument("simulate: T must be nonnegative");

    const LyapunovWeights w = build_weights(*sys.steady, sys.params);
    SimulationTrace trace;
    StateVector y = cfg.initial;

    const std::size_t nsteps =
        (cfg.T == 0.0) ? 0 : static_cast<std::size_t>(std::ceil(cfg.T / cfg.dt - 1e-12));
    trace.times.reserve(nsteps + 1);
    trace.l2.reserve(nsteps + 1);
    trace.W.reserve(nsteps + 1);

    auto record = [&](double t, std::size_t step) {
        const double nrm = l2_norm(y, g);
        if (!std::isfinite(nrm)) throw SimulationDivergedError(step);
        trace.times.push_back(t);
        trace.l2.push_back(nrm);
        trace.W.push_back(evaluate_W(y, w, g));
        if (cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0)
            trace.snapshots.push_back({t, y});
    };

    record(0.0, 0);
    if (nsteps > 0) {
        ImexStepper stepper(sys, cfg.dt);
        for (std::size_t s = 1; s <= nsteps; ++s) {
            stepper.step(y);
            record(static_cast<double>(s) * cfg.dt, s);
        }
    }

    const LogLinearFit fit =
        fit_log_decay(trace.times, trace.l2, trace.times.size() / 2, trace.times.size());
    trace.has_fit = fit.valid;
    trace.gamma_fit = fit.valid ? -fit.slope : std::numeric_limits<double>::quiet_NaN();
    return trace;
}

std::size_t lyapunov_monotonicity(const SimulationTrace& trace) {
    const std::size_t n = trace.W.size();
    if (n < 2) return 0;
    const std::size_t skip = n / 20;
    std::size_t count = 0;
    for (std::size_t i = std::max<std::size_t>(skip, 1); i < n; ++i)
        if (trace.W[i] > trace.W[i - 1] * (1.0 + 1e-8)) ++count;
    return count;
}

LogLinearFit fit_log_decay(const std::vector<double>& t, const std::vector<double>& v,
                           std::size_t begin, std::size_t end) {
    LogLinearFit fit;
    if (end > t.size() || begin + 2 > end) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t i = begin; i < end; ++i) {
        if (!(v[i] > 0.0)) return fit;
        const double yi = std::log(v[i]);
        sx += t[i];
        sy += yi;
        sxx += t[i] * t[i];
        sxy += t[i] * yi;
        m += 1.0;
    }
    const double den = m * sxx - sx * sx;
    if (den == 0.0) return fit;
    fit.slope = (m * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / m;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / m;
    for (std::size_t i = begin; i < end; ++i) {
        const double yi = std::log(v[i]);
        const double pred = fit.intercept + fit.slope * t[i];
        ss_res += (yi - pred) * (yi - pred);
        ss_tot += (yi - ybar) * (yi - ybar);
    }
    fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    fit.valid = true;
    return fit;
}

}  // namespace svstab
