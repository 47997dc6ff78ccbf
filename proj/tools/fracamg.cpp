// Experiment runner: convergence tables, condition numbers, solver benchmarks.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "fracamg/cli.hpp"

namespace {

using fracamg::ExitCode;
using fracamg::ExperimentConfig;

int run(const std::string& command, const ExperimentConfig& cfg) {
    std::unique_ptr<std::ofstream> file;
    std::ostream* out = &std::cout;
    if (!cfg.output_path.empty()) {
        file = std::make_unique<std::ofstream>(cfg.output_path, std::ios::binary);
        if (!*file) throw fracamg::ConfigError("cannot open output file " + cfg.output_path);
        out = file.get();
    }
    ExitCode code = ExitCode::Success;
    if (command == "convergence")
        code = fracamg::cmd_convergence(cfg, *out, std::cerr);
    else if (command == "condest")
        code = fracamg::cmd_condest(cfg, *out, std::cerr);
    else if (command == "bench")
        code = fracamg::cmd_bench(cfg, *out, std::cerr);
    else if (command == "solve")
        code = fracamg::cmd_solve(cfg, *out, std::cerr);
    return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-fractional advection-diffusion FE solver with Toeplitz AMG"};
    app.set_config("--config", "", "key = value configuration file; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    ExperimentConfig cfg;
    double k1 = 0.0, tau = 0.0, theta = 0.0;
    std::string sizes_arg;
    app.add_option("--example", cfg.example, "ex1 or ex2")->check(CLI::IsMember({"ex1", "ex2"}));
    app.add_option("--alpha", cfg.alphas, "temporal orders, descending")->delimiter(',');
    app.add_option("--beta", cfg.beta, "advection order in (0,1/2)");
    app.add_option("--gamma", cfg.gamma, "diffusion order in (1/2,1)");
    auto* k1_opt = app.add_option("--k1", k1, "advection coefficient (ex2)");
    app.add_option("--k2", cfg.k2, "diffusion coefficient(s); several values sweep K2 in condest")->delimiter(',');
    app.add_option("--policy", cfg.policy, "tau-eq-h, tau-eq-h2 or tau-const");
    auto* tau_opt = app.add_option("--tau", tau, "time step for tau-const");
    auto* sizes_opt = app.add_option("--sizes", sizes_arg, "comma-separated list of M");
    app.add_option("--solver", cfg.solvers, "cg, icamg, camg-dense-oracle")->delimiter(',');
    app.add_option("--tol", cfg.tol, "relative residual tolerance");
    app.add_option("--maxit", cfg.maxit, "iteration cap");
    app.add_option("--max-cdofs", cfg.max_cdofs, "coarsest level size bound");
    app.add_option("--smoother", cfg.smoother, "cf-jacobi or jacobi");
    app.add_option("--omega", cfg.omega, "Jacobi weight in (0,1]");
    auto* theta_opt = app.add_option("--theta", theta, "strength threshold for the dense oracle");
    app.add_option("--seed", cfg.seed, "seed for random vectors");
    app.add_flag("--zero-guess", cfg.zero_guess, "start every time step from zero");
    app.add_option("--out", cfg.output_path, "output CSV file (default stdout)");

    std::string command;
    for (const char* name : {"convergence", "condest", "bench", "solve"}) {
        app.add_subcommand(name, std::string(name))->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::ConfigError);
    }

    try {
        if (*k1_opt) cfg.k1 = k1;
        if (*tau_opt) cfg.tau_const = tau;
        if (*theta_opt) cfg.theta_override = theta;
        if (*sizes_opt) {
            cfg.sizes.clear();
            std::stringstream ss(sizes_arg);
            for (std::string tok; std::getline(ss, tok, ',');) {
                if (tok.empty()) continue;
                std::size_t used = 0;
                const long v = std::stol(tok, &used);
                if (used != tok.size() || v < 0) throw fracamg::ConfigError("bad size '" + tok + "'");
                cfg.sizes.push_back(static_cast<std::size_t>(v));
            }
        }
        return run(command, cfg);
    } catch (const fracamg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::ConfigError);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::ConfigError);
    } catch (const fracamg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::SolverFailure);
    }
}
