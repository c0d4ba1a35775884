#pragma once

#include <functional>

#include "svstab/linearize.hpp"
#include "svstab/lyapunov.hpp"

namespace svstab {

struct SimulationConfig {
    double dt = 0.033;
    double T = 3500.0;
    std::size_t snapshot_stride = 0;  // 0 disables snapshots
    StateVector initial;
};

struct Snapshot {
    double t = 0.0;
    StateVector y;
};

struct SimulationTrace {
    std::vector<double> times;
    std::vector<double> l2;
    std::vector<double> W;
    double gamma_fit = 0.0;
    bool has_fit = false;
    std::vector<Snapshot> snapshots;
};

struct SimulationDivergedError : std::runtime_error {
    std::size_t step;
    explicit SimulationDivergedError(std::size_t s)
        : std::runtime_error("simulation diverged at step " + std::to_string(s)), step(s) {}
};

/// Optional source term for manufactured-solution runs; fills (Fh, Fv) at time t.
using Forcing = std::function<void(double t, std::vector<double>& Fh, std::vector<double>& Fv)>;

/// One IMEX time step: a two-stage explicit update of the transport/source
/// part -(B y_x + C y) with per-point characteristic upwinding of B, followed
/// by a backward-Euler solve of the diffusion part v_t = 4 mu v_xx.
///
/// Boundary closure at every step:
///   - v_x(0) = 0 enters the implicit system as its first relation and
///     v(0) = -b0 h(0) is inverted for h(0) (for b0 = 0 the Dirichlet value
///     v(0) = 0 is used instead and h(0) is extrapolated);
///   - the Robin relation v(L) = b1 h(L) + mu c1 v_x(L) closes the last row
///     with one-sided v_x;
///   - h(L) is closed by quadratic extrapolation along the outgoing
///     characteristic.
class ImexStepper {
  public:
    ImexStepper(const LinearizedSystem& sys, double dt);

    void step(StateVector& y) const { step(y, 0.0, nullptr); }
    void step(StateVector& y, double t, const Forcing* forcing) const;

    double cfl_limit() const { return cfl_limit_; }
    double dt() const { return dt_; }

  private:
    void explicit_rhs(const StateVector& y, double t, const Forcing* forcing,
                      StateVector& k) const;
    void close_algebraic(StateVector& y) const;

    const LinearizedSystem* sys_;
    std::size_t n_;
    double dx_, dt_, mu_, r_, theta_, cfl_limit_;
    std::vector<Mat2> Bp_, Bm_;
    // cached Thomas factorization of the interior diffusion matrix
    std::vector<double> cp_, inv_den_;
    // responses of the interior solve to unit boundary values
    std::vector<double> u0_, uL_;
    // 2x2 closure system for (v(0), v(L))
    double cl00_, cl01_, cl10_, cl11_;

    std::vector<double> solve_interior(const std::vector<double>& rhs) const;
};

/// Convenience single step (builds a stepper; prefer ImexStepper for loops).
StateVector imex_step(const LinearizedSystem& sys, const StateVector& y, double dt);

/// Runs T/dt IMEX steps recording the L2 norm and the Lyapunov functional
/// every step; gamma_fit is the negative slope of the least-squares line
/// through (t, ln l2) over the second half of the trace.
SimulationTrace simulate(const LinearizedSystem& sys, const SimulationConfig& cfg);

/// Number of steps (after the first 5%) where W increased beyond a 1e-8
/// relative slack.
std::size_t lyapunov_monotonicity(const SimulationTrace& trace);

struct LogLinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool valid = false;
};

/// Least-squares line through (t_i, ln v_i) for i in [begin, end).
LogLinearFit fit_log_decay(const std::vector<double>& t, const std::vector<double>& v,
                           std::size_t begin, std::size_t end);

}  // namespace svstab
