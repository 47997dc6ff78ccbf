// Marches the first manufactured problem on four meshes and prints errors and rates.

#include <cstdio>

#include "fracamg/fracamg.hpp"

int main() {
    using namespace fracamg;
    const ProblemSpec spec = make_example_1(0.5, 0.2, 0.3, 0.8);
    const auto rows = convergence_table(spec, TimePolicy::eq_h(), {16, 32, 64, 128});
    std::printf("%6s %6s %12s %8s\n", "M", "N", "L2 error", "rate");
    for (const auto& r : rows) {
        std::printf("%6zu %6zu %12.4e", r.m, r.n, r.error);
        if (r.rate_h) std::printf(" %8.3f", *r.rate_h);
        std::printf("\n");
    }
}
