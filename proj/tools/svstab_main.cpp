#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "svstab/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string mu;
    std::string n;
    std::vector<std::string> sets;

    svstab::RunConfig resolve() const {
        std::vector<std::pair<std::string, std::string>> overrides;
        for (const std::string& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
            overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!mu.empty()) overrides.emplace_back("mu", mu);
        if (!n.empty()) overrides.emplace_back("n", n);
        if (!out_dir.empty()) overrides.emplace_back("out", out_dir);
        return svstab::load_config(config_path, overrides);
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "flat key=value configuration file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--mu", opts.mu, "viscosity override");
    cmd->add_option("--n", opts.n, "grid point count override");
    cmd->add_option("--set", opts.sets, "config override key=value (repeatable)")
        ->take_all();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"svstab: steady states, Lyapunov certificates and IMEX simulation of the "
                 "linearized viscous Saint-Venant equations"};
    app.require_subcommand(1);

    CommonOpts opts;
    int (*run)(const svstab::RunConfig&) = nullptr;

    auto add_cmd = [&](const char* name, const char* desc, int (*fn)(const svstab::RunConfig&)) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common(cmd, opts);
        cmd->callback([&run, fn] { run = fn; });
    };
    add_cmd("steady", "solve the steady state and write profiles (CSV + JSON summary)",
            svstab::cmd_steady);
    add_cmd("check", "build the Lyapunov certificate and write the stability report (JSON)",
            svstab::cmd_check);
    add_cmd("simulate", "run the IMEX simulation and write trace CSV + decay SVG",
            svstab::cmd_simulate);
    add_cmd("sweep", "certify a cartesian parameter range and write one CSV row per point",
            svstab::cmd_sweep);
    add_cmd("demo-offdiag", "growth table showing off-diagonal weights admit no certificate",
            svstab::cmd_demo_offdiag);
    add_cmd("spectrum", "eigenvalues of the discretized operator (CSV + JSON summary)",
            svstab::cmd_spectrum);

    CLI11_PARSE(app, argc, argv);

    try {
        return run(opts.resolve());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
