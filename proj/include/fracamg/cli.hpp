#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracamg/amg.hpp"
#include "fracamg/analysis.hpp"
#include "fracamg/camg_dense.hpp"
#include "fracamg/csv.hpp"
#include "fracamg/errors.hpp"
#include "fracamg/problem.hpp"
#include "fracamg/timestepper.hpp"

namespace fracamg {

enum class ExitCode : int { Success = 0, SolverFailure = 1, ConfigError = 2 };

/// Raised for invalid experiment configurations (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct ExperimentConfig {
    std::string example = "ex1";  // ex1 | ex2
    std::vector<double> alphas{0.5, 0.2};
    double beta = 0.3;
    double gamma = 0.8;
    std::optional<double> k1;
    std::vector<double> k2;        // several values make condest sweep K2
    std::string policy = "tau-eq-h";  // tau-eq-h | tau-eq-h2 | tau-const
    std::optional<double> tau_const;
    std::vector<std::size_t> sizes{16, 32, 64, 128};
    std::vector<std::string> solvers{"icamg"};  // cg | camg-dense-oracle | icamg
    double tol = 1e-12;
    std::size_t maxit = 1000;
    std::size_t max_cdofs = 64;
    std::string smoother = "cf-jacobi";  // cf-jacobi | jacobi
    double omega = 1.0;
    std::optional<double> theta_override;
    std::uint64_t seed = kDefaultSeed;
    bool zero_guess = false;
    std::string output_path;  // empty: stdout

    TimePolicy time_policy() const {
        if (policy == "tau-eq-h") return TimePolicy::eq_h();
        if (policy == "tau-eq-h2") return TimePolicy::eq_h2();
        if (policy == "tau-const") {
            if (!tau_const || !(*tau_const > 0.0)) throw ConfigError("tau-const policy needs a positive --tau");
            return TimePolicy::constant(*tau_const);
        }
        throw ConfigError("unknown time policy '" + policy + "'");
    }

    AmgParams amg_params() const {
        AmgParams p;
        p.tol = tol;
        p.maxit = maxit;
        p.max_cdofs = max_cdofs;
        p.omega = omega;
        if (smoother == "cf-jacobi")
            p.smoother = Smoother::CFJacobi;
        else if (smoother == "jacobi")
            p.smoother = Smoother::Jacobi;
        else
            throw ConfigError("unknown smoother '" + smoother + "'");
        return p;
    }

    /// Problem for a given K2 (ignored by ex1, which fixes K1 = 1, K2 = 2).
    ProblemSpec problem(std::optional<double> k2_value = std::nullopt) const {
        if (alphas.size() != 2) throw ConfigError("built-in examples take exactly two temporal orders");
        try {
            if (example == "ex1") {
                if ((k1 && *k1 != 1.0) || (k2_value && *k2_value != 2.0))
                    throw ConfigError("ex1 fixes K1 = 1 and K2 = 2");
                return make_example_1(alphas[0], alphas[1], beta, gamma);
            }
            if (example == "ex2")
                return make_example_2(k1.value_or(5.0), k2_value.value_or(300.0), alphas[0], alphas[1], beta, gamma);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
        throw ConfigError("unknown example '" + example + "'");
    }

    std::vector<std::optional<double>> k2_values() const {
        if (k2.empty()) return {std::nullopt};
        return {k2.begin(), k2.end()};
    }

    void validate() const {
        if (sizes.empty()) throw ConfigError("sizes list is empty");
        for (std::size_t m : sizes)
            if (m < 4) throw ConfigError("every size must be at least 4");
        if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
        if (maxit == 0) throw ConfigError("maxit must be positive");
        if (!(omega > 0.0 && omega <= 1.0)) throw ConfigError("omega must lie in (0,1]");
        for (const auto& s : solvers)
            if (s != "cg" && s != "icamg" && s != "camg-dense-oracle")
                throw ConfigError("unknown solver '" + s + "'");
        if (solvers.empty()) throw ConfigError("solver list is empty");
        for (auto k : k2_values()) (void)problem(k);
        (void)time_policy();
        (void)amg_params();
    }
};

namespace detail {

inline std::string fmt_size(std::size_t v) { return std::to_string(v); }

}  // namespace detail

/// Errors and rates for each size. Returns the exit code.
inline ExitCode cmd_convergence(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.validate();
    const ProblemSpec spec = cfg.problem(cfg.k2.empty() ? std::nullopt : std::optional(cfg.k2.front()));
    SolverConfig sc;
    sc.amg = cfg.amg_params();
    sc.zero_initial_guess = cfg.zero_guess;
    CsvWriter csv(out);
    csv.row({"M", "N", "h", "tau", "l2_error", "rate_h", "rate_paper"});
    std::vector<ConvergenceRow> rows;
    try {
        rows = convergence_table(spec, cfg.time_policy(), cfg.sizes, sc);
    } catch (const StepFailure& e) {
        err << e.what() << '\n';
        return ExitCode::SolverFailure;
    }
    for (const auto& row : rows)
        csv.row({detail::fmt_size(row.m), detail::fmt_size(row.n), format_sci(row.h), format_sci(row.tau),
                 format_sci(row.error), format_sci(row.rate_h), format_sci(row.rate_paper)});
    return ExitCode::Success;
}

/// Extremal eigenvalues and condition numbers of the step matrix.
inline ExitCode cmd_condest(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.validate();
    SpectrumOptions so;
    so.seed = cfg.seed;
    CsvWriter csv(out);
    const auto k2s = cfg.k2_values();
    const bool sweep = k2s.size() > 1;
    if (sweep)
        csv.row({"K2", "M", "lambda_min", "lambda_max", "kappa", "ratio"});
    else
        csv.row({"M", "lambda_min", "lambda_max", "kappa", "ratio"});
    try {
        if (!sweep) {
            for (const auto& r : kappa_ratio_table(cfg.problem(k2s.front()), cfg.time_policy(), cfg.sizes, so))
                csv.row({detail::fmt_size(r.m), format_sci(r.lambda_min), format_sci(r.lambda_max),
                         format_sci(r.kappa), format_sci(r.ratio)});
            return ExitCode::Success;
        }
        for (std::size_t m : cfg.sizes) {
            std::optional<double> prev;
            for (const auto& k2 : k2s) {
                const ProblemSpec spec = cfg.problem(k2);
                const Mesh mesh = make_mesh(spec, m, cfg.time_policy());
                const SpectrumReport s = spectrum(step_matrix(spec, mesh, 1).a_full, so);
                std::optional<double> ratio;
                if (prev) ratio = *prev / s.kappa;
                csv.row({format_sci(*k2), detail::fmt_size(m), format_sci(s.lambda_min), format_sci(s.lambda_max),
                         format_sci(s.kappa), format_sci(ratio)});
                prev = s.kappa;
            }
        }
    } catch (const ConvergenceFailure& e) {
        err << e.what() << '\n';
        return ExitCode::SolverFailure;
    }
    return ExitCode::Success;
}

struct BenchRow {
    std::size_t m = 0;
    std::string solver;
    std::string branch;
    std::size_t iterations = 0;
    bool converged = false;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
};

/// Solve A x = A 1 from a zero guess with one solver; the step matrix is that of step 1.
inline BenchRow bench_cell(const ProblemSpec& spec, const Mesh& mesh, const std::string& solver,
                           const AmgParams& params, std::optional<double> theta_override = {}) {
    using clock = std::chrono::steady_clock;
    auto secs = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    const StepMatrix sm = step_matrix(spec, mesh, 1);
    const Vector b = sm.a_full.matvec(Vector(sm.a_full.m(), 1.0));
    BenchRow row;
    row.m = mesh.m();
    row.solver = solver;
    SolveReport rep;
    if (solver == "cg") {
        row.branch = "cg";
        const auto t0 = clock::now();
        rep = cg_solve(sm.a_full, b, params.tol, params.maxit).second;
        row.solve_seconds = secs(t0, clock::now());
    } else if (solver == "icamg") {
        AdaptiveSolver s(params);
        const auto t0 = clock::now();
        const bool cg = s.will_use_cg(sm, spec, mesh);
        if (!cg) s.prepare(sm);
        const auto t1 = clock::now();
        rep = s.solve(sm, b, spec, mesh).second;
        row.setup_seconds = secs(t0, t1);
        row.solve_seconds = secs(t1, clock::now());
        row.branch = cg ? "cg" : "amg";
    } else if (solver == "camg-dense-oracle") {
        row.branch = "camg";
        const auto t0 = clock::now();
        const DenseCamg oracle(sm.a_full, params, theta_override);
        const auto t1 = clock::now();
        rep = oracle.solve(b, params.tol, params.maxit).second;
        row.setup_seconds = secs(t0, t1);
        row.solve_seconds = secs(t1, clock::now());
    } else {
        throw ConfigError("unknown solver '" + solver + "'");
    }
    row.iterations = rep.iterations;
    row.converged = rep.converged;
    return row;
}

/// Iteration counts and timings per (M, solver). Non-convergence is data.
inline ExitCode cmd_bench(const ExperimentConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
    cfg.validate();
    for (const auto& s : cfg.solvers)
        if (s == "camg-dense-oracle")
            for (std::size_t m : cfg.sizes)
                if (m - 1 > DenseCamg::kSizeCap) throw ConfigError("dense oracle is capped at M <= 4097");
    const ProblemSpec spec = cfg.problem(cfg.k2.empty() ? std::nullopt : std::optional(cfg.k2.front()));
    CsvWriter csv(out);
    csv.row({"M", "solver", "branch", "iterations", "status", "setup_seconds", "solve_seconds"});
    for (std::size_t m : cfg.sizes) {
        const Mesh mesh = make_mesh(spec, m, cfg.time_policy());
        for (const auto& s : cfg.solvers) {
            const BenchRow r = bench_cell(spec, mesh, s, cfg.amg_params(), cfg.theta_override);
            csv.row({detail::fmt_size(r.m), r.solver, r.branch, detail::fmt_size(r.iterations),
                     r.converged ? "converged" : "non-converged", format_sci(r.setup_seconds),
                     format_sci(r.solve_seconds)});
        }
    }
    return ExitCode::Success;
}

/// March one problem (first size) and print the final state.
inline ExitCode cmd_solve(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.validate();
    const ProblemSpec spec = cfg.problem(cfg.k2.empty() ? std::nullopt : std::optional(cfg.k2.front()));
    const Mesh mesh = make_mesh(spec, cfg.sizes.front(), cfg.time_policy());
    SolverConfig sc;
    sc.amg = cfg.amg_params();
    sc.zero_initial_guess = cfg.zero_guess;
    RunResult res;
    try {
        res = march(spec, mesh, sc);
    } catch (const StepFailure& e) {
        err << e.what() << '\n';
        return ExitCode::SolverFailure;
    }
    CsvWriter csv(out);
    csv.row({"x", "u", "u_exact"});
    for (std::size_t j = 1; j < mesh.m(); ++j) {
        const double x = mesh.node(j);
        csv.row({format_sci(x), format_sci(res.final_state[j - 1]),
                 spec.exact ? format_sci((*spec.exact)(x, mesh.final_time())) : std::string()});
    }
    if (res.l2_error) err << "l2_error " << format_sci(*res.l2_error) << '\n';
    return ExitCode::Success;
}

}  // namespace fracamg
