#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracamg/assembly.hpp"
#include "fracamg/errors.hpp"
#include "fracamg/problem.hpp"
#include "fracamg/solvers.hpp"
#include "fracamg/toeplitz.hpp"
#include "fracamg/vecops.hpp"

namespace fracamg {

/// Stride-2 coarse/fine partition, 0-based: C = {1, 3, 5, ...}, F = {0, 2, 4, ...}.
struct CFSplit {
    std::vector<std::size_t> c;
    std::vector<std::size_t> f;
};

inline std::size_t coarse_size(std::size_t m_fine) { return m_fine / 2; }

inline CFSplit split_cf(std::size_t m_fine) {
    if (m_fine < 2) throw InvalidArgument("split_cf needs at least 2 unknowns");
    CFSplit s;
    for (std::size_t i = 0; i < m_fine; ++i) (i % 2 == 1 ? s.c : s.f).push_back(i);
    return s;
}

/// Prolongation with weight 1/2: fine[2j+1] = c[j], fine[2j] = (c[j-1] + c[j]) / 2,
/// where missing neighbours contribute nothing.
inline Vector interp_apply(std::span<const double> coarse, std::size_t m_fine) {
    const std::size_t nc = coarse_size(m_fine);
    if (coarse.size() != nc) throw DimensionMismatch("interp_apply coarse vector", nc, coarse.size());
    Vector fine(m_fine, 0.0);
    for (std::size_t j = 0; j < nc; ++j) {
        fine[2 * j + 1] = coarse[j];
        fine[2 * j] += 0.5 * coarse[j];
        if (2 * j + 2 < m_fine) fine[2 * j + 2] += 0.5 * coarse[j];
    }
    return fine;
}

/// Transpose of interp_apply.
inline Vector restrict_apply(std::span<const double> fine, std::size_t m_fine) {
    if (fine.size() != m_fine) throw DimensionMismatch("restrict_apply fine vector", m_fine, fine.size());
    const std::size_t nc = coarse_size(m_fine);
    Vector coarse(nc);
    for (std::size_t j = 0; j < nc; ++j) {
        double s = fine[2 * j + 1] + 0.5 * fine[2 * j];
        if (2 * j + 2 < m_fine) s += 0.5 * fine[2 * j + 2];
        coarse[j] = s;
    }
    return coarse;
}

/// Symbol of P^T T P for the half-weight prolongation, truncated to n_coarse
/// entries (defaults to floor(m/2)).
inline Vector galerkin_symbol(std::span<const double> fine, std::size_t n_coarse = 0) {
    if (fine.size() < 3) throw InvalidArgument("galerkin_symbol needs a fine symbol of length >= 3");
    if (n_coarse == 0) n_coarse = coarse_size(fine.size());
    auto t = [&](std::size_t l) { return l < fine.size() ? fine[l] : 0.0; };
    Vector s(n_coarse);
    for (std::size_t l = 0; l < n_coarse; ++l) {
        const std::size_t a = 2 * l >= 2 ? 2 * l - 2 : 2 - 2 * l;
        const std::size_t b = 2 * l >= 1 ? 2 * l - 1 : 1;
        s[l] = 0.25 * t(a) + t(b) + 1.5 * t(2 * l) + t(2 * l + 1) + 0.25 * t(2 * l + 2);
    }
    return s;
}

enum class Smoother {
    Jacobi,       ///< plain (weighted) Jacobi
    CFJacobi,     ///< Jacobi restricted to C then F before, F then C after the coarse correction
    GaussSeidel   ///< forward Gauss-Seidel, O(m^2); two-level analysis only
};

inline std::string to_string(Smoother s) {
    switch (s) {
        case Smoother::Jacobi: return "jacobi";
        case Smoother::CFJacobi: return "cf-jacobi";
        case Smoother::GaussSeidel: return "gauss-seidel";
    }
    return "?";
}

struct AmgParams {
    double epsilon0 = 1e-8;
    std::size_t max_cdofs = 64;
    std::size_t max_levels = 25;
    double omega = 1.0;
    Smoother smoother = Smoother::CFJacobi;
    double switch_constant = 1.0;
    double tol = 1e-12;
    std::size_t maxit = 1000;
};

struct AmgLevel {
    SymToeplitz matrix;
    double theta = 0.0;
    std::size_t n_fine = 0;
    std::size_t n_coarse = 0;  // 0 on the coarsest level
};

/// Strength tolerance a_13 / a_12 + epsilon0 read from the first row.
inline double strength_theta(std::span<const double> symbol, double epsilon0) {
    if (symbol.size() < 3 || symbol[1] == 0.0) return epsilon0;
    return symbol[2] / symbol[1] + epsilon0;
}

/// Levels of Toeplitz Galerkin matrices, finest first.
///
/// Only symbols are stored. The coarsest system is assembled and eliminated
/// on the fly, which keeps the stored data below 3M numbers.
class AmgHierarchy {
public:
    std::vector<AmgLevel> levels;
    AmgParams params;

    std::size_t num_levels() const { return levels.size(); }
    std::size_t coarsest_size() const { return levels.back().matrix.m(); }

    /// Total symbol entries across levels.
    std::size_t stored_entries() const {
        std::size_t s = 0;
        for (const auto& l : levels) s += l.matrix.m();
        return s;
    }

    /// Entries held by the cached circulant spectra of FFT-backed levels.
    std::size_t fft_cache_entries() const {
        std::size_t s = 0;
        for (const auto& l : levels)
            if (l.matrix.uses_fft()) s += l.matrix.padded_size() / 2 + 1;
        return s;
    }

    /// Largest theta over the levels that were coarsened.
    double max_theta() const {
        double t = 0.0;
        for (const auto& l : levels)
            if (l.n_coarse > 0) t = std::max(t, l.theta);
        return t;
    }

    DenseMatrix coarsest_dense() const { return to_dense(levels.back().matrix); }
};

inline AmgHierarchy setup(const SymToeplitz& a0, const AmgParams& params = {}) {
    require_positive_diagonal(a0);
    if (params.max_levels < 1) throw InvalidArgument("max_levels must be at least 1");
    AmgHierarchy h;
    h.params = params;
    SymToeplitz current = a0;
    while (true) {
        AmgLevel lvl;
        lvl.n_fine = current.m();
        lvl.theta = strength_theta(current.symbol(), params.epsilon0);
        const bool last = current.m() <= params.max_cdofs || h.levels.size() + 1 >= params.max_levels ||
                          current.m() < 3;
        if (!last) lvl.n_coarse = coarse_size(current.m());
        lvl.matrix = current;
        h.levels.push_back(lvl);
        if (last) break;
        current = SymToeplitz(galerkin_symbol(current.symbol()));
        require_positive_diagonal(current);
    }
    return h;
}

namespace detail {

inline void smooth(const SymToeplitz& a, std::span<double> x, std::span<const double> b,
                   const AmgParams& p, bool pre) {
    switch (p.smoother) {
        case Smoother::Jacobi: jacobi_sweep_inplace(a, x, b, p.omega); break;
        case Smoother::CFJacobi:
            // C-points sit at odd 0-based positions
            parity_jacobi_sweep_inplace(a, x, b, p.omega, pre ? 1 : 0);
            parity_jacobi_sweep_inplace(a, x, b, p.omega, pre ? 0 : 1);
            break;
        case Smoother::GaussSeidel: gauss_seidel_sweep_inplace(a, x, b); break;
    }
}

inline double smoother_work(Smoother s) { return s == Smoother::CFJacobi ? 2.0 : 1.0; }

inline void vcycle_level(const AmgHierarchy& h, std::size_t k, std::span<const double> b,
                         std::span<double> x, double& work) {
    const AmgLevel& lvl = h.levels[k];
    const SymToeplitz& a = lvl.matrix;
    const double scale = static_cast<double>(a.m()) / static_cast<double>(h.levels[0].matrix.m());
    if (k + 1 == h.levels.size()) {
        const Vector sol = dense_solve(to_dense(a), b);
        std::copy(sol.begin(), sol.end(), x.begin());
        return;
    }
    smooth(a, x, b, h.params, true);
    const Vector ax = a.matvec(x);
    const Vector r = subtract(b, ax);
    const Vector rc = restrict_apply(r, a.m());
    Vector ec(rc.size(), 0.0);
    vcycle_level(h, k + 1, rc, ec, work);
    const Vector ef = interp_apply(ec, a.m());
    axpy(1.0, ef, x);
    smooth(a, x, b, h.params, false);
    work += scale * (2.0 * smoother_work(h.params.smoother) + 1.0);
}

}  // namespace detail

/// One V(1,1) cycle on the finest level, starting from x.
inline Vector vcycle(const AmgHierarchy& h, std::span<const double> b, std::span<const double> x) {
    const std::size_t m = h.levels.at(0).matrix.m();
    if (b.size() != m) throw DimensionMismatch("vcycle rhs", m, b.size());
    if (x.size() != m) throw DimensionMismatch("vcycle iterate", m, x.size());
    Vector y(x.begin(), x.end());
    double work = 0.0;
    detail::vcycle_level(h, 0, b, y, work);
    return y;
}

/// V(1,1) iteration until ||b - A x|| <= tol ||b||.
inline std::pair<Vector, SolveReport> amg_solve(const AmgHierarchy& h, std::span<const double> b,
                                                double tol, std::size_t maxit,
                                                std::span<const double> x0 = {}) {
    const SymToeplitz& a = h.levels.at(0).matrix;
    const std::size_t m = a.m();
    if (b.size() != m) throw DimensionMismatch("amg rhs", m, b.size());
    SolveReport rep;
    rep.method = "amg";
    Vector x(m, 0.0);
    if (!x0.empty()) {
        if (x0.size() != m) throw DimensionMismatch("amg initial guess", m, x0.size());
        x.assign(x0.begin(), x0.end());
    }
    const double nb = norm2(b);
    if (nb == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        rep.converged = true;
        return {x, rep};
    }
    auto relres = [&] {
        rep.work_estimate += 1.0;
        return norm2(subtract(b, a.matvec(x))) / nb;
    };
    rep.final_relres = x0.empty() ? 1.0 : relres();
    if (rep.final_relres <= tol) {
        rep.converged = true;
        return {x, rep};
    }
    for (std::size_t it = 1; it <= maxit; ++it) {
        detail::vcycle_level(h, 0, b, x, rep.work_estimate);
        rep.iterations = it;
        rep.final_relres = relres();
        if (!std::isfinite(rep.final_relres)) break;
        if (rep.final_relres <= tol) {
            rep.converged = true;
            break;
        }
    }
    return {x, rep};
}

/// True when tau^alpha0 h^(-2 gamma) <= c, i.e. the step matrix is well
/// conditioned enough for plain CG. Evaluated in log space with a relative
/// slack of 1e-12 so that exact equality counts as satisfied.
inline bool prefers_cg(double tau, double h, double alpha0, double gamma, double c) {
    const double lhs = alpha0 * std::log(tau) - 2.0 * gamma * std::log(h);
    return lhs <= std::log(c) + 1e-12;
}

enum class Branch { Adaptive, ForceCG, ForceAMG };

/// CG/AMG switch with a hierarchy cached per step matrix.
class AdaptiveSolver {
public:
    explicit AdaptiveSolver(AmgParams params = {}, Branch branch = Branch::Adaptive)
        : params_(params), branch_(branch) {}

    const AmgParams& params() const { return params_; }

    bool will_use_cg(const StepMatrix& a, const ProblemSpec& spec, const Mesh& mesh) const {
        if (branch_ == Branch::ForceCG) return true;
        if (branch_ == Branch::ForceAMG) return false;
        return prefers_cg(a.scale_record.tau, mesh.h(), spec.orders.alpha0(), spec.orders.gamma,
                          params_.switch_constant);
    }

    /// Builds (or reuses) the hierarchy for `a`; returns whether a new one was built.
    bool prepare(const StepMatrix& a) {
        if (hierarchy_ && hierarchy_->levels[0].matrix.symbol() == a.a_full.symbol()) return false;
        hierarchy_ = std::make_unique<AmgHierarchy>(setup(a.a_full, params_));
        return true;
    }

    const AmgHierarchy* hierarchy() const { return hierarchy_.get(); }

    std::pair<Vector, SolveReport> solve(const StepMatrix& a, std::span<const double> b,
                                         const ProblemSpec& spec, const Mesh& mesh,
                                         std::span<const double> x0 = {}) {
        if (will_use_cg(a, spec, mesh)) return cg_solve(a.a_full, b, params_.tol, params_.maxit, x0);
        prepare(a);
        return amg_solve(*hierarchy_, b, params_.tol, params_.maxit, x0);
    }

private:
    AmgParams params_;
    Branch branch_;
    std::unique_ptr<AmgHierarchy> hierarchy_;
};

/// One-shot adaptive solve of the step system.
inline std::pair<Vector, SolveReport> adaptive_solve(const StepMatrix& a, std::span<const double> b,
                                                     const Mesh& mesh, const ProblemSpec& spec,
                                                     const AmgParams& params = {},
                                                     std::span<const double> x0 = {}) {
    if (!(params.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    AdaptiveSolver s(params);
    return s.solve(a, b, spec, mesh, x0);
}

/// Two-level V(0,1) method: exact coarse-grid correction, then one post-smoothing sweep.
class TwoLevel {
public:
    TwoLevel(SymToeplitz a, Smoother post = Smoother::GaussSeidel, double omega = 1.0)
        : a_(std::move(a)), coarse_(galerkin_symbol(a_.symbol())), post_(post), omega_(omega) {
        require_positive_diagonal(a_);
        lu_ = DenseLU(to_dense(coarse_));
    }

    const SymToeplitz& matrix() const { return a_; }

    void cycle(std::span<const double> b, std::span<double> x) const {
        const Vector r = subtract(b, a_.matvec(x));
        const Vector ec = lu_.solve(restrict_apply(r, a_.m()));
        axpy(1.0, interp_apply(ec, a_.m()), x);
        AmgParams p;
        p.smoother = post_;
        p.omega = omega_;
        detail::smooth(a_, x, b, p, false);
    }

    std::pair<Vector, SolveReport> solve(std::span<const double> b, double tol, std::size_t maxit) const {
        SolveReport rep;
        rep.method = "two-level";
        Vector x(a_.m(), 0.0);
        const double nb = norm2(b);
        if (nb == 0.0) {
            rep.converged = true;
            return {x, rep};
        }
        for (std::size_t it = 1; it <= maxit; ++it) {
            cycle(b, x);
            rep.iterations = it;
            rep.final_relres = norm2(subtract(b, a_.matvec(x))) / nb;
            if (rep.final_relres <= tol) {
                rep.converged = true;
                break;
            }
        }
        return {x, rep};
    }

private:
    SymToeplitz a_;
    SymToeplitz coarse_;
    Smoother post_;
    double omega_;
    DenseLU lu_;
};

/// Single two-level V(0,1) cycle from x.
inline Vector two_level_vcycle01(const SymToeplitz& a, std::span<const double> b, std::span<const double> x,
                                 Smoother post = Smoother::GaussSeidel) {
    if (b.size() != a.m()) throw DimensionMismatch("two-level rhs", a.m(), b.size());
    if (x.size() != a.m()) throw DimensionMismatch("two-level iterate", a.m(), x.size());
    TwoLevel tl(a, post);
    Vector y(x.begin(), x.end());
    tl.cycle(b, y);
    return y;
}

}  // namespace fracamg
