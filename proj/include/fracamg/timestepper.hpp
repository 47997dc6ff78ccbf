#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fracamg/amg.hpp"
#include "fracamg/assembly.hpp"
#include "fracamg/errors.hpp"
#include "fracamg/problem.hpp"
#include "fracamg/solvers.hpp"

namespace fracamg {

struct SolverConfig {
    AmgParams amg;
    Branch branch = Branch::Adaptive;
    /// Start every step from zero instead of the previous state.
    bool zero_initial_guess = false;
    SourceQuadrature quadrature = SourceQuadrature::Adaptive;
    /// Keep U^0 ... U^N in the result.
    bool keep_states = false;
};

struct RunResult {
    Vector final_state;
    std::optional<double> l2_error;
    std::vector<SolveReport> per_step_reports;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
    std::vector<Vector> states;  // filled when keep_states is set
};

/// L2 norm of u(., T) minus the piecewise-linear function with nodal values
/// `state`, using 3-point Gauss-Legendre per cell.
inline double l2_error(std::span<const double> state, const ProblemSpec& spec, const Mesh& mesh,
                       std::optional<double> at_time = std::nullopt) {
    if (!spec.exact) throw InvalidArgument("l2_error needs an exact solution");
    if (state.size() != mesh.unknowns()) throw DimensionMismatch("l2_error state", mesh.unknowns(), state.size());
    using boost::math::quadrature::gauss;
    const double t = at_time.value_or(mesh.final_time());
    const auto& u = *spec.exact;
    const std::size_t m = mesh.m();
    const double h = mesh.h();
    auto nodal = [&](std::size_t j) { return (j == 0 || j == m) ? 0.0 : state[j - 1]; };
    double sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        const double xl = spec.a + static_cast<double>(c) * h;
        const double ul = nodal(c), ur = nodal(c + 1);
        auto sq = [&](double x) {
            const double d = u(x, t) - (ul + (ur - ul) * (x - xl) / h);
            return d * d;
        };
        sum += gauss<double, 3>::integrate(sq, xl, xl + h);
    }
    return std::sqrt(sum);
}

/// March all N steps of the scheme.
inline RunResult march(const ProblemSpec& spec, const Mesh& mesh, const SolverConfig& cfg = {}) {
    spec.validate();
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    RunResult res;
    auto t0 = clock::now();
    StepMatrixCache mats(spec, mesh);
    AdaptiveSolver solver(cfg.amg, cfg.branch);
    res.setup_seconds += seconds(t0, clock::now());

    TimeHistory history;
    history.push(initial_state(spec, mesh), 0.0);
    for (std::size_t n = 1; n <= mesh.steps(); ++n) {
        auto ts = clock::now();
        const auto step = mats.get(n);
        if (!solver.will_use_cg(*step, spec, mesh)) solver.prepare(*step);
        auto tr = clock::now();
        res.setup_seconds += seconds(ts, tr);
        const Vector b = rhs_vector(spec, mesh, n, history, *step, cfg.quadrature);
        auto tsolve = clock::now();
        std::span<const double> guess;
        if (!cfg.zero_initial_guess) guess = history.states.back();
        auto [u, rep] = solver.solve(*step, b, spec, mesh, guess);
        res.solve_seconds += seconds(tsolve, clock::now());
        if (!rep.converged)
            throw StepFailure(n, rep.method + " did not converge (relative residual " +
                                     std::to_string(rep.final_relres) + ")");
        res.per_step_reports.push_back(rep);
        history.push(std::move(u), mesh.time(n));
    }
    res.final_state = history.states.back();
    if (spec.exact) res.l2_error = l2_error(res.final_state, spec, mesh);
    if (cfg.keep_states) res.states = std::move(history.states);
    return res;
}

struct ConvergenceRow {
    std::size_t m = 0;
    std::size_t n = 0;
    double h = 0.0;
    double tau = 0.0;
    double error = 0.0;
    std::optional<double> rate_h;      // against h
    std::optional<double> rate_paper;  // against the number of time steps
};

/// Errors at t = T for each size in `sizes` and the observed rates.
inline std::vector<ConvergenceRow> convergence_table(const ProblemSpec& spec, TimePolicy policy,
                                                     const std::vector<std::size_t>& sizes,
                                                     const SolverConfig& cfg = {}) {
    if (sizes.empty()) throw InvalidArgument("sizes list is empty");
    if (!spec.exact) throw InvalidArgument("convergence table needs an exact solution");
    std::vector<ConvergenceRow> rows;
    for (std::size_t m : sizes) {
        const Mesh mesh = make_mesh(spec, m, policy);
        const RunResult r = march(spec, mesh, cfg);
        ConvergenceRow row{m, mesh.steps(), mesh.h(), mesh.tau(1), *r.l2_error, {}, {}};
        if (!rows.empty()) {
            const auto& p = rows.back();
            const double ratio = p.error / row.error;
            if (p.error == row.error) {
                row.rate_h = 0.0;
            } else if (p.h != row.h) {
                row.rate_h = std::log(ratio) / std::log(p.h / row.h);
            }
            if (p.n != row.n) row.rate_paper = std::log(ratio) / std::log(static_cast<double>(row.n) / static_cast<double>(p.n));
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fracamg
