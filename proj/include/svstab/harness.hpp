#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "svstab/io.hpp"

namespace svstab {

/// Batch configuration, read from a flat key=value file with CLI overrides.
/// Keys mirror the field names documented in the README.
struct RunConfig {
    PhysicalParams phys;
    double H0 = 4.0;
    double V0 = 1.0;
    std::size_t n = 2001;

    enum class BcPolicy { Auto, PositiveB1, Manual };
    BcPolicy bc_policy = BcPolicy::Auto;
    BoundaryCoeffs bc_manual;

    double dt = 0.033;
    double T = 3500.0;
    std::size_t snapshot_stride = 0;

    // cosine initial perturbations: amp * cos(freq * x + phase)
    double ic_h_amp = 0.01, ic_h_freq = 20.0, ic_h_phase = 15.0;
    double ic_v_amp = 0.01, ic_v_freq = 1.0, ic_v_phase = 0.0;

    std::string out_dir = "out";
    std::uint64_t seed = 0;

    std::vector<double> mu_sweep;                       // simulate: one curve per mu
    std::map<std::string, std::vector<double>> ranges;  // sweep: H0,V0,mu,b0,b1,c1
    bool sweep_spectrum = false;

    double q3_amp = 0.0;  // 0 = auto: 2 * max(q2)
    double q3_lo_frac = 0.25, q3_hi_frac = 0.75;
};

/// Applies one key=value pair; throws std::invalid_argument on unknown keys
/// or unparsable values.
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads a config file (empty path = defaults only) then applies overrides in
/// order.
RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

/// Boundary gains resolved per the configured policy:
///   auto:        b0 = g/V(0), b1 = b1_hi + 0.1 |b1_hi|, c1 = c1-interval midpoint
///   positive-b1: b0 = g/V(0), b1 = g sqrt(1/V(L)^2 - 1/(g H(L))), c1 = midpoint
///   manual:      the configured (b0, b1, c1)
BoundaryCoeffs resolve_bc(const RunConfig& cfg, const SteadyState& s, const PhysicalParams& p);

/// Cosine initial data sampled on the grid.
StateVector initial_state(const RunConfig& cfg, const Grid& grid);

/// Worker-pool size: SVSTAB_THREADS when set, hardware concurrency otherwise.
unsigned pool_size();

// Command entry points. Exit codes: 0 success, 1 bad configuration or
// precondition, 2 steady solver left the admissible region, 3 simulation
// diverged.
int cmd_steady(const RunConfig& cfg);
int cmd_check(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_demo_offdiag(const RunConfig& cfg);
int cmd_spectrum(const RunConfig& cfg);

}  // namespace svstab
