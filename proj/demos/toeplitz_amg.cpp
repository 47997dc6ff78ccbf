// Builds one step matrix, sets up the Toeplitz AMG hierarchy and compares it with CG.

#include <chrono>
#include <cstdio>

#include "fracamg/fracamg.hpp"

int main(int argc, char** argv) {
    using namespace fracamg;
    const std::size_t m = argc > 1 ? std::stoul(argv[1]) : 1024;
    const ProblemSpec spec = make_example_1(0.7, 0.5, 0.15, 0.95);
    const Mesh mesh = make_mesh(spec, m, TimePolicy::eq_h());
    const StepMatrix a = step_matrix(spec, mesh, 1);
    const Vector b = a.a_full.matvec(Vector(a.a_full.m(), 1.0));

    const AmgHierarchy h = setup(a.a_full);
    std::printf("levels %zu, coarsest %zu, max theta %.5f, stored %zu\n", h.num_levels(), h.coarsest_size(),
                h.max_theta(), h.stored_entries());

    auto t0 = std::chrono::steady_clock::now();
    const auto [xa, ra] = amg_solve(h, b, 1e-12, 1000);
    auto t1 = std::chrono::steady_clock::now();
    const auto [xc, rc] = cg_solve(a.a_full, b, 1e-12, 1000);
    auto t2 = std::chrono::steady_clock::now();
    std::printf("amg: %zu cycles, relres %.2e, %.3f ms\n", ra.iterations, ra.final_relres,
                std::chrono::duration<double, std::milli>(t1 - t0).count());
    std::printf("cg : %zu iterations%s, relres %.2e, %.3f ms\n", rc.iterations, rc.converged ? "" : " (no convergence)",
                rc.final_relres, std::chrono::duration<double, std::milli>(t2 - t1).count());
}
