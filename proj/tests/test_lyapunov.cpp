#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "svstab/lyapunov.hpp"
#include "test_support.hpp"

using namespace svstab;
using namespace svstab::testsup;

TEST_CASE("weights: zero-friction values and the inviscid limit") {
    PhysicalParams p = kSec5;
    p.kappa = 0.0;
    const Grid g = Grid::uniform(p.L, 101);
    const SteadyState s = solve_steady(p, 4.0, 1.0, g);
    const LyapunovWeights w = build_weights(s, p);
    for (std::size_t i = 0; i < g.n; ++i) {
        CHECK(w.qt1[i] == doctest::Approx(p.g).epsilon(1e-14));
        CHECK(w.q1[i] == doctest::Approx(p.g * (1.0 + p.mu)).epsilon(1e-14));
        CHECK(w.q2[i] == doctest::Approx(4.0 * (1.0 + p.mu)).epsilon(1e-14));
        CHECK(std::abs(w.qt1x[i]) <= 1e-12);
        CHECK(std::abs(w.q2x[i]) <= 1e-12);
    }

    // mu -> 0 recovers diag(g, H)
    const PhysicalParams tiny = with_mu(kSec5, 1e-8);
    const SteadyState st = solve_steady(tiny, 4.0, 1.0, g);
    const LyapunovWeights wt = build_weights(st, tiny);
    for (std::size_t i = 0; i < g.n; i += 10) {
        CHECK(wt.q1[i] == doctest::Approx(tiny.g).epsilon(1e-6));
        CHECK(wt.q2[i] == doctest::Approx(st.Hs[i]).epsilon(1e-6));
    }
}

TEST_CASE("QB is symmetric pointwise (weights are built for it)") {
    for (const BuiltSystem& b : {build_sec5(501), build_near_critical(501)}) {
        for (std::size_t i = 0; i < b.steady.grid.n; ++i) {
            const Mat2 qb = qb_at(b.sys, b.weights, i);
            CHECK(std::abs(qb.m01 - qb.m10) <= 1e-12 * qb.max_abs());
        }
    }
}

TEST_CASE("W quadrature: zero state, constant state, norm equivalence") {
    PhysicalParams p = kSec5;
    p.kappa = 0.0;
    const Grid g = Grid::uniform(p.L, 201);
    const SteadyState s = solve_steady(p, 4.0, 1.0, g);
    const LyapunovWeights w = build_weights(s, p);

    CHECK(evaluate_W(StateVector::zero(g.n), w, g) == 0.0);

    StateVector ones = StateVector::zero(g.n);
    std::fill(ones.h.begin(), ones.h.end(), 1.0);
    CHECK(evaluate_W(ones, w, g) == doctest::Approx(p.g * (1.0 + p.mu) * p.L).epsilon(1e-13));

    const double c_lo = std::min(*std::min_element(w.q1.begin(), w.q1.end()),
                                 *std::min_element(w.q2.begin(), w.q2.end()));
    const double c_hi = std::max(*std::max_element(w.q1.begin(), w.q1.end()),
                                 *std::max_element(w.q2.begin(), w.q2.end()));
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 10; ++k) {
        StateVector y = StateVector::zero(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            y.h[i] = nd(rng);
            y.v[i] = nd(rng);
        }
        const double W = evaluate_W(y, w, g);
        const double n2 = l2_norm(y, g);
        CHECK(W >= c_lo * n2 * n2 - 1e-9);
        CHECK(W <= c_hi * n2 * n2 + 1e-9);
    }
}

TEST_CASE("phi at gamma 0 matches the independently-coded source-term route") {
    // independent algebra: the same matrix written with
    // f1 = -f (3 mu + 2 kappa H)/(3 mu H + kappa H^2)
    for (const BuiltSystem& b : {build_sec5(301), build_near_critical(301)}) {
        const PhysicalParams& p = b.sys.params;
        const SteadyState& s = b.steady;
        for (std::size_t i = 0; i < s.grid.n; ++i) {
            const double H = s.Hs[i], V = s.Vs[i], Hx = s.Hsx[i], Vx = s.Vsx[i];
            const double f = friction(H, V, p);
            const double f1 = -f * (3.0 * p.mu + 2.0 * p.kappa * H) /
                              (3.0 * p.mu * H + p.kappa * H * H);
            const double q1 = b.weights.q1[i], q2 = b.weights.q2[i];
            const double D00 = -q1 * Vx + p.mu * b.weights.qt1x[i] * V;
            const double D01 = p.mu * b.weights.qt1x[i] * H -
                               q2 * (f1 / H + 4.0 * p.mu * Hx * Vx / (H * H));
            const double D11 = -2.0 * q2 * (Vx + f / (H * V));

            const Mat2 D = compute_phi(b.sys, b.weights, 0.0, i);
            const double scale = std::max(1e-30, D.max_abs());
            CHECK(std::abs(D.m00 - D00) <= 1e-10 * scale);
            CHECK(std::abs(D.m01 - D01) <= 1e-10 * scale);
            CHECK(std::abs(D.m10 - D01) <= 1e-10 * scale);
            CHECK(std::abs(D.m11 - D11) <= 1e-10 * scale);
            // assembled phi is symmetric up to round-off
            CHECK(std::abs(D.m01 - D.m10) <= 1e-12 * std::max(scale, 1e-30));
        }
    }
}

TEST_CASE("phi vanishes identically without friction") {
    PhysicalParams p = kSec5;
    p.kappa = 0.0;
    const Grid g = Grid::uniform(p.L, 101);
    const SteadyState s = solve_steady(p, 4.0, 1.0, g);
    const LinearizedSystem sys = build_linear_system(s, p, {9.81, 1.0, 0.0});
    const LyapunovWeights w = build_weights(s, p);
    for (std::size_t i = 0; i < g.n; ++i)
        CHECK(compute_phi(sys, w, 0.0, i).max_abs() <= 1e-13);
}

TEST_CASE("analytic (QB)_x agrees with central differences of QB") {
    double prev_err = 0.0;
    for (std::size_t n : {501u, 1001u}) {
        const BuiltSystem b = build_near_critical(n);
        const Grid& g = b.steady.grid;
        double err = 0.0;
        for (std::size_t i = 1; i + 1 < g.n; ++i) {
            if (g.x[i] < 0.5) continue;  // skip the boundary layer
            const Mat2 fd = (qb_at(b.sys, b.weights, i + 1) - qb_at(b.sys, b.weights, i - 1))
                                .scaled(1.0 / (2.0 * g.dx));
            const Mat2 an = qb_x_at(b.sys, b.weights, i);
            err = std::max(err, (fd - an).max_abs());
        }
        if (prev_err > 0.0) {
            const double rate = std::log2(prev_err / err);
            CHECK(rate > 1.5);
            CHECK(rate < 2.5);
        }
        prev_err = err;
    }
}

TEST_CASE("interior certification on the near-critical configuration") {
    const BuiltSystem b = build_near_critical(1001);
    const InteriorCertificate cert = certify_interior(b.sys, b.weights);
    REQUIRE(cert.negdef);
    REQUIRE(cert.gamma.has_value());
    CHECK(*cert.gamma > 0.0);
    CHECK(cert.detD_min > 0.0);

    // bisection bracket validity: any gamma below the certified one keeps phi
    // negative definite everywhere
    const double gmid = 0.5 * *cert.gamma;
    for (std::size_t i = 0; i < b.steady.grid.n; ++i)
        CHECK(negative_definite(compute_phi(b.sys, b.weights, gmid, i)));
}

TEST_CASE("certification degenerates without friction") {
    PhysicalParams p = kNearCrit;
    p.kappa = 0.0;
    const Grid g = Grid::uniform(p.L, 201);
    const SteadyState s = solve_steady(p, 0.2, 1.0, g);
    const LinearizedSystem sys = build_linear_system(s, p, {9.81, 1.0, 0.0});
    const LyapunovWeights w = build_weights(s, p);
    const InteriorCertificate cert = certify_interior(sys, w);
    CHECK_FALSE(cert.negdef);
    CHECK_FALSE(cert.gamma.has_value());
    CHECK(cert.detD_min == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("interior certification fails on the reference configuration") {
    // the steepness assumption is violated there and det D goes negative
    const BuiltSystem b = build_sec5(1001);
    const InteriorCertificate cert = certify_interior(b.sys, b.weights);
    CHECK_FALSE(cert.negdef);
    CHECK(cert.detD_min < 0.0);
}

TEST_CASE("boundary-gain intervals: frozen values and identities") {
    const Grid g = Grid::uniform(kSec5.L, 501);
    const SteadyState s = solve_steady(kSec5, 4.0, 1.0, g);
    const BoundaryCoeffs bc = positive_b1_gains(s, kSec5);
    const CoefficientIntervals iv = coefficient_intervals(s, kSec5, bc.b1);

    // direct evaluation at (H0, V0) = (4, 1)
    CHECK(iv.b0_lo == doctest::Approx(0.1258069).epsilon(1e-6));
    CHECK(iv.b0_hi == doctest::Approx(19.4941931).epsilon(1e-6));
    // midpoint identity is exact by construction
    CHECK(0.5 * (iv.b0_lo + iv.b0_hi) == doctest::Approx(kSec5.g / s.Vs.front()).epsilon(1e-15));
    // both b1 roots are negative, so b1 = 0 is admissible
    CHECK(iv.b1_lo < iv.b1_hi);
    CHECK(iv.b1_hi < 0.0);
    // the decay-experiment c1 equals the interval midpoint
    CHECK(bc.c1 == doctest::Approx(0.5 * (iv.c1_lo + iv.c1_hi)).epsilon(1e-10));
    // positive-branch b1 sits outside the forbidden interval
    CHECK(bc.b1 > iv.b1_hi);
}

TEST_CASE("intervals reject supercritical boundary values") {
    SteadyState fake;
    fake.grid = Grid::uniform(1.0, 3);
    fake.Hs = {0.05, 0.05, 0.05};
    fake.Vs = {1.0, 1.0, 1.0};
    fake.Vsx = fake.Vsxx = fake.Hsx = fake.Hsxx = {0.0, 0.0, 0.0};
    fake.Gamma = {1.0, 1.0, 1.0};
    fake.Q0 = 0.05;
    CHECK_THROWS_AS(coefficient_intervals(fake, kSec5, 0.0), std::domain_error);
}

TEST_CASE("viscosity-corrected c1 interval converges to the inviscid one at first order") {
    double dev_prev = 0.0;
    for (double mu : {1e-4, 1e-5}) {
        const PhysicalParams p = with_mu(kNearCrit, mu);
        const Grid g = Grid::uniform(p.L, 2001);
        const SteadyState s = solve_steady(p, 0.2, 1.0, g);
        const BoundaryCoeffs bc = auto_gains(s, p);
        const CoefficientIntervals iv = coefficient_intervals(s, p, bc.b1);
        const double dev = std::abs(iv.c1mu_lo - iv.c1_lo) + std::abs(iv.c1mu_hi - iv.c1_hi);
        if (dev_prev > 0.0) {
            const double ratio = dev_prev / dev;
            CHECK(ratio > 5.0);
            CHECK(ratio < 20.0);
        }
        dev_prev = dev;
        // the configured c1 (inviscid midpoint) also lies in the corrected interval
        CHECK(bc.c1 > iv.c1mu_lo);
        CHECK(bc.c1 < iv.c1mu_hi);
    }
}

TEST_CASE("boundary form: negativity on the certified configuration and the delta_d identity") {
    const BuiltSystem b = build_near_critical(801);
    const BoundaryForm f = boundary_form(b.sys, b.weights, b.sys.bc);
    CHECK(f.a1 < 0.0);
    CHECK(f.a2 < 0.0);
    CHECK(f.delta_h < 0.0);
    CHECK(f.negative());

    const std::size_t last = b.steady.grid.n - 1;
    const double q2L = b.weights.q2[last];
    CHECK(f.delta_d ==
          doctest::Approx(-1024.0 * q2L * q2L * f.alpha * f.a2).epsilon(1e-8));
}

TEST_CASE("a1 degenerates at the b0 interval endpoint as mu -> 0") {
    const PhysicalParams p = with_mu(kNearCrit, 1e-7);
    const Grid g = Grid::uniform(p.L, 501);
    const SteadyState s = solve_steady(p, 0.2, 1.0, g);
    const CoefficientIntervals iv = coefficient_intervals(s, p, 0.0);
    const LyapunovWeights w = build_weights(s, p);
    BoundaryCoeffs bc{iv.b0_hi, 0.0, 0.0};
    const LinearizedSystem sys = build_linear_system(s, p, bc);
    const BoundaryForm f = boundary_form(sys, w, bc);
    CHECK(std::abs(f.a1) < 1e-4 * std::abs(f.a2));
}

TEST_CASE("energy balance: zero state, compact support, quadrature convergence") {
    const double gamma = 1e-3;
    {
        const BuiltSystem b = build_near_critical(401);
        const EnergyBalance eb =
            energy_balance(b.sys, b.weights, StateVector::zero(401), gamma);
        CHECK(eb.I == 0.0);
        CHECK(eb.Bterm == 0.0);
        CHECK(eb.residual == 0.0);
    }

    // compactly supported state: the boundary term vanishes exactly
    {
        const BuiltSystem b = build_near_critical(801);
        const Grid& g = b.steady.grid;
        StateVector y = StateVector::zero(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            const double t = (g.x[i] - 0.5 * kNearCrit.L) / (0.3 * kNearCrit.L);
            if (std::abs(t) < 1.0) {
                const double bump = std::exp(-1.0 / (1.0 - t * t));
                y.h[i] = bump * std::sin(5.0 * g.x[i]);
                y.v[i] = bump * std::cos(3.0 * g.x[i]);
            }
        }
        const EnergyBalance eb = energy_balance(b.sys, b.weights, y, gamma);
        CHECK(eb.Bterm == 0.0);
        CHECK(eb.W > 0.0);
    }

    // residual of the decomposition converges at the stencil order
    double prev = 0.0;
    for (std::size_t n : {12501u, 25001u, 50001u}) {
        const BuiltSystem b = build_near_critical(n, 1e-3);
        const Grid& g = b.steady.grid;
        StateVector y = StateVector::zero(n);
        for (std::size_t i = 0; i < n; ++i) {
            y.h[i] = 0.01 * std::sin(3.0 * M_PI * g.x[i] / kNearCrit.L + 0.3);
            y.v[i] = 0.01 * std::cos(2.0 * M_PI * g.x[i] / kNearCrit.L);
        }
        const EnergyBalance eb = energy_balance(b.sys, b.weights, y, gamma);
        if (prev > 0.0) {
            const double rate = std::log2(prev / eb.residual);
            CHECK(rate > 1.7);
            CHECK(rate < 2.6);
        }
        prev = eb.residual;
    }
}

TEST_CASE("QA direction is dissipative for every state") {
    const BuiltSystem b = build_near_critical(401);
    const Grid& g = b.steady.grid;
    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 5; ++k) {
        std::vector<double> v(g.n);
        for (double& x : v) x = nd(rng);
        const std::vector<double> vx = derivative_second_order(v, g.dx);
        std::vector<double> integrand(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            CHECK(b.weights.q2[i] > 0.0);
            integrand[i] = -8.0 * b.sys.params.mu * b.weights.q2[i] * vx[i] * vx[i];
        }
        CHECK(trapezoid(integrand, g) <= 0.0);
    }
}

TEST_CASE("det(D)/mu^2 stays bounded below across the viscosity sweep") {
    std::vector<double> minima;
    for (double mu : {1e-3, 5e-4, 2.5e-4}) {
        const BuiltSystem b = build_near_critical(2001, mu);
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b.steady.grid.n; ++i)
            m = std::min(m, compute_phi(b.sys, b.weights, 0.0, i).det());
        minima.push_back(m / (mu * mu));
    }
    for (double m : minima) CHECK(m > 0.0);
    for (std::size_t k = 0; k + 1 < minima.size(); ++k) {
        const double rel = std::abs(minima[k + 1] - minima[k]) / std::abs(minima[k]);
        CHECK(rel < 0.5);
    }
}

TEST_CASE("polynomial stability window matches the closed-form bounds") {
    // -2 r^2 + 8 r - 4 > 0 iff 2 - sqrt 2 < r < 2 + sqrt 2, r = g H0 / V0^2
    const double lo = 2.0 - std::sqrt(2.0), hi = 2.0 + std::sqrt(2.0);
    int checked = 0;
    for (double r = 0.5; r <= 4.0 + 1e-12; r += 0.01) {
        const double P = -2.0 * r * r + 8.0 * r - 4.0;
        CHECK((P > 0.0) == (r > lo && r < hi));
        ++checked;
    }
    CHECK(checked == 351);
}

TEST_CASE("off-diagonal weights: gradient term grows while W stays bounded") {
    const BuiltSystem b = build_near_critical(4001);
    const Grid& g = b.steady.grid;
    const double amp = 2.0 * *std::max_element(b.weights.q2.begin(), b.weights.q2.end());
    std::vector<double> q3(g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i)
        if (g.x[i] >= 0.25 * kNearCrit.L && g.x[i] <= 0.75 * kNearCrit.L) q3[i] = amp;

    const std::vector<int> modes{4, 8, 16, 32, 64};
    const auto table =
        offdiagonal_counterexample(b.weights, g, b.sys.params.mu, q3, modes);
    REQUIRE(table.size() == modes.size());
    for (std::size_t k = 0; k + 1 < table.size(); ++k) CHECK(table[k].I_yx < table[k + 1].I_yx);
    const double ratio = table[3].I_yx / table[2].I_yx;  // n = 32 vs 16
    CHECK(ratio >= 1.45);
    CHECK(ratio <= 1.9);

    // W(y_n) ~ 1/n: the compensated sequence n W is flat and raw W decreases
    double nw_min = 1e300, nw_max = 0.0;
    for (const auto& row : table) {
        nw_min = std::min(nw_min, row.mode * row.W);
        nw_max = std::max(nw_max, row.mode * row.W);
    }
    CHECK(nw_max / nw_min < 3.0);
    for (std::size_t k = 0; k + 1 < table.size(); ++k) CHECK(table[k + 1].W < table[k].W);

    // rejection paths
    CHECK_THROWS_AS(
        offdiagonal_counterexample(b.weights, g, b.sys.params.mu, std::vector<double>(g.n, 0.0), modes),
        std::invalid_argument);
    std::vector<double> edge(g.n, 0.0);
    edge[0] = 1.0;
    edge[g.n / 2] = 1.0;
    CHECK_THROWS_AS(offdiagonal_counterexample(b.weights, g, b.sys.params.mu, edge, modes),
                    std::invalid_argument);
}

TEST_CASE("full report pipeline: flags and gamma gating") {
    const PhysicalParams p = kNearCrit;
    const Grid g = Grid::uniform(p.L, 801);
    const SteadyState s = solve_steady(p, 0.2, 1.0, g);
    const BoundaryCoeffs bc = auto_gains(s, p);
    const StabilityReport rep = check_stability(s, p, bc);
    CHECK(rep.flags.subcritical);
    CHECK(rep.flags.assumption15);
    CHECK(rep.flags.b0_in_range);
    CHECK(rep.flags.b1_admissible);
    CHECK(rep.flags.c1_in_range);
    CHECK(rep.flags.interior_negdef);
    CHECK(rep.flags.boundary_negdef);
    CHECK(rep.flags.certified);
    REQUIRE(rep.gamma_cert.has_value());
    CHECK(*rep.gamma_cert > 0.0);

    // b1 = 0 is admissible (both interval ends negative)
    const StabilityReport rep0 = check_stability(s, p, {bc.b0, 0.0, bc.c1});
    CHECK(rep0.flags.b1_admissible);

    // b1 inside the forbidden interval is flagged; no gamma is emitted when
    // the boundary quadratic form fails
    const double bad_b1 = 0.5 * (rep.intervals.b1_lo + rep.intervals.b1_hi);
    const StabilityReport repb = check_stability(s, p, {bc.b0, bad_b1, bc.c1});
    CHECK_FALSE(repb.flags.b1_admissible);
    if (!repb.flags.boundary_negdef) CHECK_FALSE(repb.gamma_cert.has_value());
}
