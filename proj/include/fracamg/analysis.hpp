#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fracamg/amg.hpp"
#include "fracamg/assembly.hpp"
#include "fracamg/errors.hpp"
#include "fracamg/problem.hpp"
#include "fracamg/solvers.hpp"
#include "fracamg/toeplitz.hpp"
#include "fracamg/vecops.hpp"

namespace fracamg {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// g(mu) = 3^(3-2mu) - 2^(5-2mu) + 7; its sign is the sign of the first
/// off-diagonal numerator of the stiffness matrix.
inline double lag_one_numerator(double mu) {
    return std::pow(3.0, 3.0 - 2.0 * mu) - std::pow(2.0, 5.0 - 2.0 * mu) + 7.0;
}

/// Root of lag_one_numerator in (0, 1/2), by bisection.
inline double beta0() {
    static const double root = [] {
        double lo = 0.0, hi = 0.4;  // g(0) = 2 > 0, g(0.4) < 0; 1/2 is the excluded endpoint root
        for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
            const double mid = 0.5 * (lo + hi);
            (lag_one_numerator(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }();
    return root;
}

enum class OffDiagPattern { AllNegative, FirstOffDiagNonNegative, Other };

inline std::string to_string(OffDiagPattern p) {
    switch (p) {
        case OffDiagPattern::AllNegative: return "all-negative";
        case OffDiagPattern::FirstOffDiagNonNegative: return "first-offdiag-nonnegative";
        case OffDiagPattern::Other: return "other";
    }
    return "?";
}

struct MatrixReport {
    bool diag_positive = false;
    OffDiagPattern offdiag_pattern = OffDiagPattern::Other;
    bool diagonally_dominant = false;
    bool m_matrix = false;
    bool row_sums_positive = false;
    /// Lower bounds on row sums for h <= 1/7; true when not applicable.
    bool row_sum_bounds_hold = true;
    double min_row_sum = 0.0;
};

/// Lower bounds on the row sums of the order-mu stiffness matrix for h <= 1/7:
/// {boundary rows, interior rows}.
inline std::pair<double, double> stiffness_row_sum_bounds(double mu, double h) {
    const double c = std::cos(mu * std::numbers::pi);
    const double edge = -std::pow(h, 1.0 - 2.0 * mu) * (4.0 - std::pow(2.0, 3.0 - 2.0 * mu)) /
                        (2.0 * c * std::tgamma(4.0 - 2.0 * mu));
    const double inner = -std::pow(2.0, 2.0 * mu) * h * (2.0 * mu - 1.0) / (c * std::tgamma(2.0 - 2.0 * mu));
    return {edge, inner};
}

/// Sign pattern, dominance and M-matrix checks. When `mu` is given, T is
/// taken to be the order-mu stiffness matrix and its row-sum bounds are checked.
inline MatrixReport classify(const SymToeplitz& t, std::optional<double> mu = std::nullopt, double h = 0.0) {
    MatrixReport r;
    const std::size_t m = t.m();
    const auto& s = t.symbol();
    r.diag_positive = m > 0 && s[0] > 0.0;
    bool rest_negative = true;
    for (std::size_t l = 2; l < m; ++l) rest_negative = rest_negative && s[l] < 0.0;
    if (m < 2 || (s[1] < 0.0 && rest_negative))
        r.offdiag_pattern = OffDiagPattern::AllNegative;
    else if (s[1] >= 0.0 && rest_negative)
        r.offdiag_pattern = OffDiagPattern::FirstOffDiagNonNegative;

    // absolute off-diagonal row sums via prefix sums of |t_l|
    std::vector<double> pa(m);
    double acc = 0.0;
    for (std::size_t l = 0; l < m; ++l) pa[l] = (acc += (l == 0 ? 0.0 : std::abs(s[l])));
    double worst = 0.0;
    r.min_row_sum = m > 0 ? t.row_sum(0) : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        worst = std::max(worst, pa[i] + pa[m - 1 - i]);
        r.min_row_sum = std::min(r.min_row_sum, t.row_sum(i));
    }
    r.diagonally_dominant = r.diag_positive && s[0] > worst;
    r.row_sums_positive = r.min_row_sum > 0.0;
    const bool z_pattern = std::all_of(s.begin() + (m > 0 ? 1 : 0), s.end(), [](double v) { return v <= 0.0; });
    r.m_matrix = r.diag_positive && z_pattern && r.row_sums_positive;

    if (mu && h > 0.0 && h <= 1.0 / 7.0 && m >= 1) {
        const auto [edge, inner] = stiffness_row_sum_bounds(*mu, h);
        bool ok = t.row_sum(0) >= edge && t.row_sum(m - 1) >= edge;
        for (std::size_t i = 1; i + 1 < m; ++i) ok = ok && t.row_sum(i) >= inner;
        r.row_sum_bounds_hold = ok;
    }
    return r;
}

struct ClassConditions {
    bool class1 = false;
    bool class2 = false;
};

/// The two sufficient conditions for the step matrix to be an M-matrix.
inline ClassConditions class_conditions(const ProblemSpec& spec, const Mesh& mesh, std::size_t n) {
    const auto& o = spec.orders;
    const double h = mesh.h();
    const double tau = mesh.tau(n);
    const double beta = o.beta, gamma = o.gamma;
    double sum = 0.0;
    for (std::size_t i = 0; i < o.alphas.size(); ++i) sum += o.a_coeffs[i] / std::tgamma(3.0 - o.alphas[i]);
    const double gg = lag_one_numerator(gamma), gb = lag_one_numerator(beta);
    const double cg = std::cos(gamma * std::numbers::pi), cb = std::cos(beta * std::numbers::pi);
    const double time_lhs = std::pow(tau, o.alpha0()) / std::pow(h, 2.0 * gamma);
    const double time_rhs = -4.0 * cg * std::tgamma(4.0 - 2.0 * gamma) / (3.0 * spec.k2 * gg) * sum;
    const bool time_ok = time_lhs > time_rhs;
    ClassConditions c;
    c.class1 = beta >= beta0() && time_ok;
    if (beta < beta0()) {
        const double space_rhs = -0.5 * spec.k2 * gg / (cg * std::tgamma(4.0 - 2.0 * gamma)) * cb *
                                 std::tgamma(4.0 - 2.0 * beta) / (spec.k1 * gb);
        c.class2 = std::pow(h, 2.0 * (gamma - beta)) < space_rhs && time_ok;
    }
    return c;
}

struct SpectrumReport {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
    std::string method;
    double residual_tol_achieved = 0.0;
};

struct SpectrumOptions {
    double tol = 1e-6;
    std::size_t dense_cap = 4096;
    std::size_t max_iterations = 500;
    std::uint64_t seed = kDefaultSeed;
};

namespace detail {

inline Vector random_unit(std::size_t m, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vector v(m);
    for (auto& x : v) x = nd(rng);
    const double n = norm2(v);
    for (auto& x : v) x /= n;
    return v;
}

/// Largest eigenvalue by Lanczos with full reorthogonalization.
inline std::pair<double, double> lanczos_max(const SymToeplitz& t, const SpectrumOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    const std::size_t m = t.m();
    const std::size_t kmax = std::min(m, opt.max_iterations);
    std::vector<Vector> q{random_unit(m, rng)};
    std::vector<double> alpha, beta;
    double prev = 0.0, est = 0.0, resid = 1.0;
    for (std::size_t k = 0; k < kmax; ++k) {
        Vector w = t.matvec(q[k]);
        alpha.push_back(dot(w, q[k]));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& qj : q) axpy(-dot(w, qj), qj, w);
        const double b = norm2(w);
        Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
        Eigen::VectorXd e(static_cast<Eigen::Index>(alpha.size()) - 1);
        for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        const Eigen::Index top = d.size() - 1;
        est = es.eigenvalues()[top];
        resid = std::abs(b * es.eigenvectors()(top, top)) / std::abs(est);
        if (k > 0 && (resid <= opt.tol || b == 0.0) && std::abs(est - prev) <= opt.tol * std::abs(est))
            return {est, resid};
        if (b == 0.0) return {est, 0.0};
        prev = est;
        beta.push_back(b);
        for (auto& x : w) x /= b;
        q.push_back(std::move(w));
    }
    if (kmax == m) return {est, resid};
    throw ConvergenceFailure("lanczos: largest eigenvalue did not converge");
}

/// Smallest eigenvalue by inverse iteration; inner systems solved by CG.
inline std::pair<double, double> inverse_iteration_min(const SymToeplitz& t, const SpectrumOptions& opt) {
    std::mt19937_64 rng(opt.seed ^ 0x9E3779B97F4A7C15ULL);
    Vector x = random_unit(t.m(), rng);
    double lambda = dot(x, t.matvec(x)), change = 1.0;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        auto [y, rep] = cg_solve(t, x, 1e-12, 20 * t.m() + 100);
        if (!rep.converged && rep.final_relres > 1e-8)
            throw ConvergenceFailure("inverse iteration: inner CG failed");
        const double ny = norm2(y);
        for (auto& v : y) v /= ny;
        const double next = dot(y, t.matvec(y));
        change = std::abs(next - lambda) / std::abs(next);
        lambda = next;
        x = std::move(y);
        if (it > 0 && change <= opt.tol * 1e-2) return {lambda, change};
    }
    throw ConvergenceFailure("inverse iteration did not converge");
}

}  // namespace detail

/// Extremal eigenvalues and condition number of an SPD Toeplitz matrix.
inline SpectrumReport spectrum(const SymToeplitz& t, const SpectrumOptions& opt = {}) {
    SpectrumReport r;
    if (t.m() <= opt.dense_cap) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense(t, opt.dense_cap), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw ConvergenceFailure("dense eigensolver failed");
        r.lambda_min = es.eigenvalues().minCoeff();
        r.lambda_max = es.eigenvalues().maxCoeff();
        r.method = "dense";
        r.residual_tol_achieved = std::numeric_limits<double>::epsilon();
    } else {
        const auto [lmax, rmax] = detail::lanczos_max(t, opt);
        const auto [lmin, rmin] = detail::inverse_iteration_min(t, opt);
        r.lambda_max = lmax;
        r.lambda_min = lmin;
        r.method = "lanczos+inverse";
        r.residual_tol_achieved = std::max(rmax, rmin);
    }
    if (!(r.lambda_min > 0.0)) throw InvalidArgument("matrix is not positive definite");
    r.kappa = r.lambda_max / r.lambda_min;
    return r;
}

struct KappaRow {
    std::size_t m = 0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
    std::optional<double> ratio;  // kappa_prev / kappa
};

/// Condition numbers of the first step matrix for each M in m_list.
inline std::vector<KappaRow> kappa_ratio_table(const ProblemSpec& spec, TimePolicy policy,
                                               const std::vector<std::size_t>& m_list,
                                               const SpectrumOptions& opt = {}) {
    if (!std::is_sorted(m_list.begin(), m_list.end())) throw InvalidArgument("m_list must be ascending");
    std::vector<KappaRow> rows;
    for (std::size_t m : m_list) {
        const Mesh mesh = make_mesh(spec, m, policy);
        const SpectrumReport s = spectrum(step_matrix(spec, mesh, 1).a_full, opt);
        KappaRow row{m, s.lambda_min, s.lambda_max, s.kappa, std::nullopt};
        if (!rows.empty()) row.ratio = rows.back().kappa / s.kappa;
        rows.push_back(row);
    }
    return rows;
}

inline double energy_norm(const SymToeplitz& t, std::span<const double> e) {
    return std::sqrt(std::max(0.0, dot(e, t.matvec(e))));
}

struct ContractionOptions {
    std::size_t iterations = 20;
    std::size_t burn_in = 5;
    Smoother post = Smoother::GaussSeidel;
    std::uint64_t seed = kDefaultSeed;
};

/// Largest per-iteration energy-norm reduction of the two-level V(0,1)
/// error propagation over `trials` random unit initial errors.
inline double two_level_contraction(const SymToeplitz& a, std::size_t trials,
                                    const ContractionOptions& opt = {}) {
    if (trials < 10) throw InvalidArgument("two_level_contraction needs at least 10 trials");
    const TwoLevel tl(a, opt.post);
    const Vector zero(a.m(), 0.0);
    double worst = 0.0;
    for (std::size_t tr = 0; tr < trials; ++tr) {
        std::mt19937_64 rng(opt.seed + tr);
        Vector e = detail::random_unit(a.m(), rng);
        double prev = energy_norm(a, e);
        for (std::size_t it = 0; it < opt.iterations; ++it) {
            tl.cycle(zero, e);
            const double cur = energy_norm(a, e);
            if (it >= opt.burn_in && prev > 1e-250) worst = std::max(worst, cur / prev);
            if (cur <= 1e-250) break;
            prev = cur;
        }
    }
    return worst;
}

/// Geometric mean of successive energy-norm error ratios of V(1,1) cycles on A e = 0.
inline double vcycle_contraction(const AmgHierarchy& h, std::size_t iterations = 12,
                                 std::size_t burn_in = 2, std::uint64_t seed = kDefaultSeed) {
    const SymToeplitz& a = h.levels.at(0).matrix;
    std::mt19937_64 rng(seed);
    Vector e = detail::random_unit(a.m(), rng);
    const Vector zero(a.m(), 0.0);
    double prev = energy_norm(a, e), log_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t it = 0; it < iterations; ++it) {
        e = vcycle(h, zero, e);
        const double cur = energy_norm(a, e);
        if (it >= burn_in && prev > 1e-250 && cur > 0.0) {
            log_sum += std::log(cur / prev);
            ++counted;
        }
        prev = cur;
    }
    return counted ? std::exp(log_sum / static_cast<double>(counted)) : 0.0;
}

}  // namespace fracamg
