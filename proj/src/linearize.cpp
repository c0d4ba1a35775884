#include "svstab/linearize.hpp"

#include <cmath>

namespace svstab {

LinearizedSystem build_linear_system(const SteadyState& s, const PhysicalParams& p,
                                     const BoundaryCoeffs& bc) {
    p.validate();
    bc.validate();
    if (!(p.mu > 0.0))
        throw std::domain_error("build_linear_system: mu must be positive (C carries 1/(3 mu))");

    LinearizedSystem sys;
    sys.params = p;
    sys.steady = std::make_shared<SteadyState>(s);
    sys.bc = bc;
    sys.A = Mat2::diag(0.0, -4.0 * p.mu);

    const std::size_t n = s.grid.n;
    sys.B.resize(n);
    sys.C.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double H = s.Hs[i], V = s.Vs[i], Hx = s.Hsx[i], Vx = s.Vsx[i];
        const double f = friction(H, V, p);
        sys.B[i] = {V, H,
                    p.g - 4.0 * p.mu * Vx / H, V - 4.0 * p.mu * Hx / H};
        sys.C[i] = {Vx, Hx,
                    (4.0 * p.mu * Hx * Vx - f) / (H * H) - f * f / (3.0 * p.mu * H * V),
                    Vx + f / (H * V)};
    }
    return sys;
}

StateVector apply_operator(const LinearizedSystem& sys, const StateVector& y) {
    const Grid& g = sys.grid();
    if (y.h.size() != g.n || y.v.size() != g.n)
        throw std::invalid_argument("apply_operator: state size does not match grid");

    const std::vector<double> hx = derivative_second_order(y.h, g.dx);
    const std::vector<double> vx = derivative_second_order(y.v, g.dx);
    const std::vector<double> vxx = second_derivative_second_order(y.v, g.dx);

    StateVector out = StateVector::zero(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        double bh, bv, ch, cv;
        sys.B[i].mul_vec(hx[i], vx[i], bh, bv);
        sys.C[i].mul_vec(y.h[i], y.v[i], ch, cv);
        out.h[i] = -(bh + ch);
        out.v[i] = -(sys.A.m11 * vxx[i] + bv + cv);
    }
    return out;
}

double spectral_radius_B(const LinearizedSystem& sys) {
    double rho = 0.0;
    for (const Mat2& b : sys.B) {
        double lo, hi;
        eig2_real(b, lo, hi);
        rho = std::max(rho, std::max(std::abs(lo), std::abs(hi)));
    }
    return rho;
}

}  // namespace svstab
