#include "svstab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace svstab {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: cannot parse value for '" + key + "': " + value);
    }
    if (pos != value.size())
        throw std::invalid_argument("config: trailing junk in value for '" + key + "': " + value);
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        // trim
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(parse_double(key, item.substr(b, e - b + 1)));
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "g") cfg.phys.g = parse_double(key, value);
    else if (key == "mu") cfg.phys.mu = parse_double(key, value);
    else if (key == "kappa") cfg.phys.kappa = parse_double(key, value);
    else if (key == "L") cfg.phys.L = parse_double(key, value);
    else if (key == "H0") cfg.H0 = parse_double(key, value);
    else if (key == "V0") cfg.V0 = parse_double(key, value);
    else if (key == "n") cfg.n = static_cast<std::size_t>(parse_double(key, value));
    else if (key == "bc") {
        if (value == "auto") cfg.bc_policy = RunConfig::BcPolicy::Auto;
        else if (value == "positive-b1") cfg.bc_policy = RunConfig::BcPolicy::PositiveB1;
        else if (value == "manual") cfg.bc_policy = RunConfig::BcPolicy::Manual;
        else throw std::invalid_argument("config: bc must be auto, positive-b1 or manual");
    } else if (key == "b0") { cfg.bc_manual.b0 = parse_double(key, value); cfg.bc_policy = RunConfig::BcPolicy::Manual; }
    else if (key == "b1") { cfg.bc_manual.b1 = parse_double(key, value); cfg.bc_policy = RunConfig::BcPolicy::Manual; }
    else if (key == "c1") { cfg.bc_manual.c1 = parse_double(key, value); cfg.bc_policy = RunConfig::BcPolicy::Manual; }
    else if (key == "dt") cfg.dt = parse_double(key, value);
    else if (key == "T") cfg.T = parse_double(key, value);
    else if (key == "snapshot_stride") cfg.snapshot_stride = static_cast<std::size_t>(parse_double(key, value));
    else if (key == "ic_h_amp") cfg.ic_h_amp = parse_double(key, value);
    else if (key == "ic_h_freq") cfg.ic_h_freq = parse_double(key, value);
    else if (key == "ic_h_phase") cfg.ic_h_phase = parse_double(key, value);
    else if (key == "ic_v_amp") cfg.ic_v_amp = parse_double(key, value);
    else if (key == "ic_v_freq") cfg.ic_v_freq = parse_double(key, value);
    else if (key == "ic_v_phase") cfg.ic_v_phase = parse_double(key, value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_double(key, value));
    else if (key == "mu_sweep") cfg.mu_sweep = parse_list(key, value);
    else if (key == "sweep_H0" || key == "sweep_V0" || key == "sweep_mu" || key == "sweep_b0" ||
             key == "sweep_b1" || key == "sweep_c1")
        cfg.ranges[key.substr(6)] = parse_list(key, value);
    else if (key == "sweep_spectrum") cfg.sweep_spectrum = parse_double(key, value) != 0.0;
    else if (key == "q3_amp") cfg.q3_amp = parse_double(key, value);
    else if (key == "q3_lo_frac") cfg.q3_lo_frac = parse_double(key, value);
    else if (key == "q3_hi_frac") cfg.q3_hi_frac = parse_double(key, value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                            " is not key=value");
            apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    for (const auto& [k, v] : overrides) apply_config_key(cfg, k, v);
    return cfg;
}

BoundaryCoeffs resolve_bc(const RunConfig& cfg, const SteadyState& s, const PhysicalParams& p) {
    if (cfg.bc_policy == RunConfig::BcPolicy::Manual) return cfg.bc_manual;
    BoundaryCoeffs bc;
    bc.b0 = p.g / s.Vs.front();
    if (cfg.bc_policy == RunConfig::BcPolicy::Auto) {
        const CoefficientIntervals iv0 = coefficient_intervals(s, p, 0.0);
        bc.b1 = iv0.b1_hi + 0.1 * std::abs(iv0.b1_hi);
        if (bc.b1 == iv0.b1_hi) bc.b1 += 1e-6;
    } else {
        const double VL = s.Vs.back(), HL = s.Hs.back();
        bc.b1 = p.g * std::sqrt(1.0 / (VL * VL) - 1.0 / (p.g * HL));
    }
    const CoefficientIntervals iv = coefficient_intervals(s, p, bc.b1);
    bc.c1 = 0.5 * (iv.c1_lo + iv.c1_hi);
    return bc;
}

StateVector initial_state(const RunConfig& cfg, const Grid& grid) {
    StateVector y = StateVector::zero(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        y.h[i] = cfg.ic_h_amp * std::cos(cfg.ic_h_freq * grid.x[i] + cfg.ic_h_phase);
        y.v[i] = cfg.ic_v_amp * std::cos(cfg.ic_v_freq * grid.x[i] + cfg.ic_v_phase);
    }
    return y;
}

unsigned pool_size() {
    if (const char* env = std::getenv("SVSTAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

namespace {

namespace fs = std::filesystem;

void ensure_out(const RunConfig& cfg) { fs::create_directories(cfg.out_dir); }

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    std::ofstream os(fs::path(cfg.out_dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + name);
    return os;
}

/// Maps exceptions to the documented exit codes.
int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const OmegaExitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SimulationDivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

nlohmann::json steady_summary(const SteadyState& s, const PhysicalParams& p) {
    return {{"Q0", s.Q0},
            {"C0", s.C0},
            {"subcritical_margin", check_subcritical(s, p)},
            {"assumption15", check_assumption_nearcritical(s, p)},
            {"mu", p.mu},
            {"n", s.grid.n},
            {"H0", s.Hs.front()},
            {"V0", s.Vs.front()},
            {"HL", s.Hs.back()},
            {"VL", s.Vs.back()}};
}

}  // namespace

int cmd_steady(const RunConfig& cfg) {
    return guarded([&] {
        cfg.phys.validate();
        const Grid grid = Grid::uniform(cfg.phys.L, cfg.n);
        const SteadyState s = solve_steady(cfg.phys, cfg.H0, cfg.V0, grid);
        ensure_out(cfg);
        {
            auto os = open_out(cfg, "steady.csv");
            write_steady_csv(os, s);
        }
        auto os = open_out(cfg, "steady_summary.json");
        os << steady_summary(s, cfg.phys).dump(2) << "\n";
        return 0;
    });
}

int cmd_check(const RunConfig& cfg) {
    return guarded([&] {
        cfg.phys.validate();
        const Grid grid = Grid::uniform(cfg.phys.L, cfg.n);
        const SteadyState s = solve_steady(cfg.phys, cfg.H0, cfg.V0, grid);
        const BoundaryCoeffs bc = resolve_bc(cfg, s, cfg.phys);
        const StabilityReport rep = check_stability(s, cfg.phys, bc);
        ensure_out(cfg);
        auto os = open_out(cfg, "stability_report.json");
        os << stability_report_json(rep);
        return 0;
    });
}

int cmd_simulate(const RunConfig& cfg) {
    return guarded([&] {
        cfg.phys.validate();
        std::vector<double> mus = cfg.mu_sweep.empty() ? std::vector<double>{cfg.phys.mu} : cfg.mu_sweep;
        ensure_out(cfg);

        std::vector<SimulationTrace> traces(mus.size());
        std::vector<std::string> labels(mus.size());
        nlohmann::json summary = nlohmann::json::array();
        for (std::size_t k = 0; k < mus.size(); ++k) {
            PhysicalParams p = cfg.phys;
            p.mu = mus[k];
            const Grid grid = Grid::uniform(p.L, cfg.n);
            const SteadyState s = solve_steady(p, cfg.H0, cfg.V0, grid);
            const BoundaryCoeffs bc = resolve_bc(cfg, s, p);
            const LinearizedSystem sys = build_linear_system(s, p, bc);

            SimulationConfig sc;
            sc.dt = cfg.dt;
            sc.T = cfg.T;
            sc.snapshot_stride = cfg.snapshot_stride;
            sc.initial = initial_state(cfg, grid);
            traces[k] = simulate(sys, sc);
            labels[k] = "mu=" + format_double(mus[k]);

            const std::string suffix = mus.size() > 1 ? "_mu" + format_double(mus[k]) : "";
            {
                auto os = open_out(cfg, "trace" + suffix + ".csv");
                write_trace_csv(os, traces[k]);
            }
            for (std::size_t si = 0; si < traces[k].snapshots.size(); ++si) {
                char name[64];
                std::snprintf(name, sizeof(name), "snapshot%s_%06zu.csv", suffix.c_str(), si);
                auto os = open_out(cfg, name);
                write_snapshot_csv(os, grid, traces[k].snapshots[si].y);
            }
            summary.push_back({{"mu", mus[k]},
                               {"l2_initial", traces[k].l2.front()},
                               {"l2_final", traces[k].l2.back()},
                               {"gamma_fit", traces[k].has_fit ? traces[k].gamma_fit : 0.0},
                               {"has_fit", traces[k].has_fit},
                               {"bc", {{"b0", bc.b0}, {"b1", bc.b1}, {"c1", bc.c1}}}});
        }

        std::vector<LabelledTrace> lts;
        for (std::size_t k = 0; k < mus.size(); ++k) lts.push_back({labels[k], &traces[k]});
        {
            auto os = open_out(cfg, "decay.svg");
            write_decay_svg(os, lts);
        }
        auto os = open_out(cfg, "simulate_summary.json");
        os << summary.dump(2) << "\n";
        return 0;
    });
}

int cmd_sweep(const RunConfig& cfg) {
    return guarded([&] {
        cfg.phys.validate();
        auto values = [&](const char* name, double fallback) {
            const auto it = cfg.ranges.find(name);
            if (it != cfg.ranges.end()) return it->second;
            return std::vector<double>{fallback};
        };
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const std::vector<double> H0s = values("H0", cfg.H0);
        const std::vector<double> V0s = values("V0", cfg.V0);
        const std::vector<double> mus = values("mu", cfg.phys.mu);
        // NaN marks "resolve from the BC policy" for gains without a range
        const bool manual = cfg.bc_policy == RunConfig::BcPolicy::Manual;
        const std::vector<double> b0s = values("b0", manual ? cfg.bc_manual.b0 : nan);
        const std::vector<double> b1s = values("b1", manual ? cfg.bc_manual.b1 : nan);
        const std::vector<double> c1s = values("c1", manual ? cfg.bc_manual.c1 : nan);

        struct Row {
            double H0, V0, mu, b0, b1, c1;
            StabilityReport rep;
            double max_real = 0.0;
            bool has_spectrum = false;
            bool ok = false;
            std::string error;
        };
        std::vector<Row> rows;
        for (double H0 : H0s)
            for (double V0 : V0s)
                for (double mu : mus)
                    for (double b0 : b0s)
                        for (double b1 : b1s)
                            for (double c1 : c1s)
                                rows.push_back({H0, V0, mu, b0, b1, c1, {}, 0.0, false, false, ""});

        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= rows.size()) return;
                Row& row = rows[idx];
                try {
                    PhysicalParams p = cfg.phys;
                    p.mu = row.mu;
                    const Grid grid = Grid::uniform(p.L, cfg.n);
                    const SteadyState s = solve_steady(p, row.H0, row.V0, grid);
                    BoundaryCoeffs bc;
                    if (std::isnan(row.b0) || std::isnan(row.b1) || std::isnan(row.c1)) {
                        RunConfig sub = cfg;
                        if (sub.bc_policy == RunConfig::BcPolicy::Manual)
                            sub.bc_policy = RunConfig::BcPolicy::Auto;
                        const BoundaryCoeffs policy = resolve_bc(sub, s, p);
                        bc.b0 = std::isnan(row.b0) ? policy.b0 : row.b0;
                        bc.b1 = std::isnan(row.b1) ? policy.b1 : row.b1;
                        bc.c1 = std::isnan(row.c1) ? policy.c1 : row.c1;
                    } else {
                        bc = {row.b0, row.b1, row.c1};
                    }
                    row.b0 = bc.b0;
                    row.b1 = bc.b1;
                    row.c1 = bc.c1;
                    row.rep = check_stability(s, p, bc);
                    if (cfg.sweep_spectrum && grid.n <= 1000) {
                        const LinearizedSystem sys = build_linear_system(s, p, bc);
                        row.max_real = spectrum(sys).max_real;
                        row.has_spectrum = true;
                    }
                    row.ok = true;
                } catch (const std::exception& e) {
                    std::string msg = e.what();
                    for (char& ch : msg)
                        if (ch == ',' || ch == '\n') ch = ';';
                    row.error = msg;
                }
            }
        };
        const unsigned nw = std::min<std::size_t>(pool_size(), std::max<std::size_t>(rows.size(), 1));
        std::vector<std::thread> threads;
        for (unsigned t = 0; t < nw; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();

        ensure_out(cfg);
        auto os = open_out(cfg, "sweep.csv");
        os << "H0,V0,mu,b0,b1,c1,subcritical,assumption15,b0_in_range,b1_admissible,c1_in_range,"
              "interior_negdef,boundary_negdef,certified,gamma_cert,detD_min,max_real,error\n";
        for (const Row& row : rows) {
            os << format_double(row.H0) << ',' << format_double(row.V0) << ','
               << format_double(row.mu) << ',' << format_double(row.b0) << ','
               << format_double(row.b1) << ',' << format_double(row.c1) << ',';
            if (row.ok) {
                const StabilityFlags& fl = row.rep.flags;
                os << fl.subcritical << ',' << fl.assumption15 << ',' << fl.b0_in_range << ','
                   << fl.b1_admissible << ',' << fl.c1_in_range << ',' << fl.interior_negdef << ','
                   << fl.boundary_negdef << ',' << fl.certified << ','
                   << (row.rep.gamma_cert ? format_double(*row.rep.gamma_cert) : "") << ','
                   << format_double(row.rep.detD_min) << ','
                   << (row.has_spectrum ? format_double(row.max_real) : "") << ",\n";
            } else {
                os << ",,,,,,,,,,," << row.error << "\n";
            }
        }
        return 0;
    });
}

int cmd_demo_offdiag(const RunConfig& cfg) {
    return guarded([&] {
        cfg.phys.validate();
        const Grid grid = Grid::uniform(cfg.phys.L, cfg.n);
        const SteadyState s = solve_steady(cfg.phys, cfg.H0, cfg.V0, grid);
        const LyapunovWeights w = build_weights(s, cfg.phys);

        double amp = cfg.q3_amp;
        if (amp <= 0.0) amp = 2.0 * *std::max_element(w.q2.begin(), w.q2.end());
        std::vector<double> q3(grid.n, 0.0);
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double fr = grid.x[i] / cfg.phys.L;
            if (fr >= cfg.q3_lo_frac && fr <= cfg.q3_hi_frac) q3[i] = amp;
        }
        const std::vector<int> modes{4, 8, 16, 32, 64};
        const auto table = offdiagonal_counterexample(w, grid, cfg.phys.mu, q3, modes);

        ensure_out(cfg);
        auto os = open_out(cfg, "offdiag_growth.csv");
        os << "n,I_yx,W\n";
        for (const auto& row : table)
            os << row.mode << ',' << format_double(row.I_yx) << ',' << format_double(row.W) << '\n';
        return 0;
    });
}

int cmd_spectrum(const RunConfig& cfg) {
    return guarded([&] {
        cfg.phys.validate();
        const Grid grid = Grid::uniform(cfg.phys.L, cfg.n);
        const SteadyState s = solve_steady(cfg.phys, cfg.H0, cfg.V0, grid);
        const BoundaryCoeffs bc = resolve_bc(cfg, s, cfg.phys);
        const LinearizedSystem sys = build_linear_system(s, cfg.phys, bc);
        const SpectrumReport rep = spectrum(sys);
        ensure_out(cfg);
        {
            auto os = open_out(cfg, "spectrum.csv");
            write_spectrum_csv(os, rep);
        }
        auto os = open_out(cfg, "spectrum_summary.json");
        nlohmann::json j{{"max_real", rep.max_real},
                         {"n", rep.n_used},
                         {"dim", rep.eigenvalues.size()},
                         {"bc", {{"b0", bc.b0}, {"b1", bc.b1}, {"c1", bc.c1}}}};
        os << j.dump(2) << "\n";
        return 0;
    });
}

}  // namespace svstab
