#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracamg/errors.hpp"
#include "fracamg/toeplitz.hpp"
#include "fracamg/vecops.hpp"

namespace fracamg {

/// Outcome of an iterative or direct solve.
struct SolveReport {
    std::size_t iterations = 0;
    double final_relres = 0.0;
    bool converged = false;
    /// Matvec-equivalent operations on the finest matrix.
    double work_estimate = 0.0;
    /// Which method produced the result ("cg", "amg", ...).
    std::string method;
};

inline void require_positive_diagonal(const SymToeplitz& t) {
    if (t.m() == 0 || !(t.diagonal() > 0.0)) throw InvalidArgument("matrix diagonal must be positive");
}

/// One Jacobi sweep x <- x + omega D^{-1} (b - T x), in place.
inline void jacobi_sweep_inplace(const SymToeplitz& t, std::span<double> x, std::span<const double> b,
                                 double omega) {
    require_positive_diagonal(t);
    if (!(omega > 0.0 && omega <= 1.0)) throw InvalidArgument("Jacobi weight must lie in (0,1]");
    if (b.size() != t.m()) throw DimensionMismatch("jacobi rhs", t.m(), b.size());
    const Vector tx = t.matvec(x);
    const double s = omega / t.diagonal();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * (b[i] - tx[i]);
}

inline Vector jacobi_sweep(const SymToeplitz& t, std::span<const double> x, std::span<const double> b,
                           double omega = 1.0) {
    Vector y(x.begin(), x.end());
    jacobi_sweep_inplace(t, y, b, omega);
    return y;
}

/// Jacobi update restricted to indices with i % 2 == parity, using a fresh residual.
inline void parity_jacobi_sweep_inplace(const SymToeplitz& t, std::span<double> x,
                                        std::span<const double> b, double omega, std::size_t parity) {
    require_positive_diagonal(t);
    if (b.size() != t.m()) throw DimensionMismatch("jacobi rhs", t.m(), b.size());
    const Vector tx = t.matvec(x);
    const double s = omega / t.diagonal();
    for (std::size_t i = parity; i < x.size(); i += 2) x[i] += s * (b[i] - tx[i]);
}

/// Forward Gauss-Seidel sweep. O(m^2); meant for small analysis runs only.
inline void gauss_seidel_sweep_inplace(const SymToeplitz& t, std::span<double> x,
                                       std::span<const double> b) {
    require_positive_diagonal(t);
    const std::size_t m = t.m();
    if (b.size() != m) throw DimensionMismatch("gauss-seidel rhs", m, b.size());
    const auto& s = t.symbol();
    for (std::size_t i = 0; i < m; ++i) {
        double r = b[i];
        for (std::size_t j = 0; j < m; ++j) r -= s[i > j ? i - j : j - i] * x[j];
        x[i] += r / s[0];
    }
}

/// Called with (iteration, iterate) after every CG step.
using IterateObserver = std::function<void(std::size_t, std::span<const double>)>;

/// Unpreconditioned conjugate gradients from x0 (zero when empty).
///
/// Stops when the true residual satisfies ||b - T x|| <= tol ||b||. The true
/// residual is only formed once the recurrence residual has passed the test.
inline std::pair<Vector, SolveReport> cg_solve(const SymToeplitz& t, std::span<const double> b,
                                               double tol, std::size_t maxit,
                                               std::span<const double> x0 = {},
                                               const IterateObserver& observer = {}) {
    const std::size_t m = t.m();
    if (b.size() != m) throw DimensionMismatch("cg rhs", m, b.size());
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    SolveReport rep;
    rep.method = "cg";
    Vector x(m, 0.0);
    if (!x0.empty()) {
        if (x0.size() != m) throw DimensionMismatch("cg initial guess", m, x0.size());
        x.assign(x0.begin(), x0.end());
    }
    const double nb = norm2(b);
    if (nb == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        rep.converged = true;
        return {x, rep};
    }
    Vector r(b.begin(), b.end());
    if (!x0.empty()) {
        const Vector tx = t.matvec(x);
        for (std::size_t i = 0; i < m; ++i) r[i] -= tx[i];
        rep.work_estimate += 1.0;
    }
    double rr = dot(r, r);
    rep.final_relres = std::sqrt(rr) / nb;
    if (rep.final_relres <= tol) {
        rep.converged = true;
        return {x, rep};
    }
    Vector p = r;
    Vector tp(m);
    for (std::size_t it = 1; it <= maxit; ++it) {
        t.matvec(p, tp);
        rep.work_estimate += 1.0;
        const double ptp = dot(p, tp);
        if (!(ptp > 0.0)) throw ConvergenceFailure("cg: matrix is not positive definite");
        const double alpha = rr / ptp;
        axpy(alpha, p, x);
        axpy(-alpha, tp, r);
        const double rr_new = dot(r, r);
        rep.iterations = it;
        if (observer) observer(it, x);
        double relres = std::sqrt(rr_new) / nb;
        if (relres <= tol) {
            const Vector tx = t.matvec(x);
            rep.work_estimate += 1.0;
            Vector res = subtract(b, tx);
            relres = norm2(res) / nb;
        }
        rep.final_relres = relres;
        if (relres <= tol) {
            rep.converged = true;
            return {x, rep};
        }
        const double beta = rr_new / rr;
        for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
        rr = rr_new;
    }
    return {x, rep};
}

/// LU factors computed without pivoting.
class DenseLU {
public:
    DenseLU() = default;

    explicit DenseLU(DenseMatrix a) : lu_(std::move(a)) {
        const Eigen::Index n = lu_.rows();
        if (lu_.cols() != n) throw DimensionMismatch("dense LU (square)", static_cast<std::size_t>(n),
                                                      static_cast<std::size_t>(lu_.cols()));
        for (Eigen::Index k = 0; k < n; ++k) {
            const double piv = lu_(k, k);
            if (piv == 0.0 || !std::isfinite(piv)) throw ZeroPivot(static_cast<std::size_t>(k));
            for (Eigen::Index i = k + 1; i < n; ++i) lu_(i, k) /= piv;
            const Eigen::Index rest = n - k - 1;
            if (rest > 0)
                lu_.bottomRightCorner(rest, rest).noalias() -=
                    lu_.col(k).tail(rest) * lu_.row(k).tail(rest);
        }
    }

    std::size_t size() const { return static_cast<std::size_t>(lu_.rows()); }

    Vector solve(std::span<const double> b) const {
        const Eigen::Index n = lu_.rows();
        if (static_cast<Eigen::Index>(b.size()) != n)
            throw DimensionMismatch("dense solve rhs", static_cast<std::size_t>(n), b.size());
        Vector x(b.begin(), b.end());
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = x[i];
            for (Eigen::Index j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
            x[i] = s;
        }
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            double s = x[i];
            for (Eigen::Index j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
            x[i] = s / lu_(i, i);
        }
        return x;
    }

private:
    DenseMatrix lu_;
};

/// Gaussian elimination without pivoting. Throws ZeroPivot on breakdown.
inline Vector dense_solve(const DenseMatrix& a, std::span<const double> b) {
    return DenseLU(a).solve(b);
}

}  // namespace fracamg
