#pragma once

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fracamg/amg.hpp"
#include "fracamg/errors.hpp"
#include "fracamg/solvers.hpp"
#include "fracamg/toeplitz.hpp"
#include "fracamg/vecops.hpp"

namespace fracamg {

/// Classical AMG on dense matrices: Ruge-Stueben coarsening, direct
/// interpolation and explicit Galerkin products, O(M^2) per level.
/// Reference implementation for comparisons; capped at 4096 unknowns.
class DenseCamg {
public:
    static constexpr std::size_t kSizeCap = 4096;

    struct Level {
        DenseMatrix a;
        Eigen::SparseMatrix<double> p;  // empty on the coarsest level
        std::vector<char> is_coarse;
        double theta = 0.0;
    };

    DenseCamg(const SymToeplitz& a0, const AmgParams& params = {}, std::optional<double> theta_override = {})
        : params_(params), theta_override_(theta_override) {
        if (a0.m() > kSizeCap) throw InvalidArgument("dense CAMG oracle is capped at 4096 unknowns");
        require_positive_diagonal(a0);
        DenseMatrix a = to_dense(a0, kSizeCap);
        while (true) {
            Level lvl;
            const auto n = static_cast<std::size_t>(a.rows());
            lvl.theta = theta_override_.value_or(row_theta(a));
            const bool last = n <= params_.max_cdofs || levels_.size() + 1 >= params_.max_levels || n < 3;
            if (!last) {
                lvl.is_coarse = coarsen(a, lvl.theta);
                lvl.p = direct_interpolation(a, lvl.is_coarse, lvl.theta);
                if (lvl.p.cols() == 0 || static_cast<std::size_t>(lvl.p.cols()) == n) {
                    lvl.p.resize(0, 0);
                    lvl.a = std::move(a);
                    levels_.push_back(std::move(lvl));
                    break;
                }
                const DenseMatrix ap = a * lvl.p;
                DenseMatrix coarse = lvl.p.transpose() * ap;
                lvl.a = std::move(a);
                levels_.push_back(std::move(lvl));
                a = std::move(coarse);
                continue;
            }
            lvl.a = std::move(a);
            levels_.push_back(std::move(lvl));
            break;
        }
        coarse_lu_ = DenseLU(levels_.back().a);
    }

    std::size_t num_levels() const { return levels_.size(); }
    const std::vector<Level>& levels() const { return levels_; }

    std::pair<Vector, SolveReport> solve(std::span<const double> b, double tol, std::size_t maxit) const {
        const DenseMatrix& a = levels_[0].a;
        const auto n = static_cast<std::size_t>(a.rows());
        if (b.size() != n) throw DimensionMismatch("dense camg rhs", n, b.size());
        SolveReport rep;
        rep.method = "camg-dense-oracle";
        Eigen::VectorXd bb = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n));
        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        const double nb = bb.norm();
        if (nb == 0.0) {
            rep.converged = true;
            return {Vector(n, 0.0), rep};
        }
        rep.final_relres = 1.0;
        for (std::size_t it = 1; it <= maxit; ++it) {
            cycle(0, bb, x);
            rep.iterations = it;
            rep.final_relres = (bb - a * x).norm() / nb;
            if (!std::isfinite(rep.final_relres)) break;
            if (rep.final_relres <= tol) {
                rep.converged = true;
                break;
            }
        }
        return {Vector(x.data(), x.data() + x.size()), rep};
    }

private:
    double row_theta(const DenseMatrix& a) const {
        if (a.cols() < 3 || a(0, 1) == 0.0) return params_.epsilon0;
        return a(0, 2) / a(0, 1) + params_.epsilon0;
    }

    /// Strong connections: -a_ij >= theta * max_k(-a_ik).
    static std::vector<std::vector<std::size_t>> strength(const DenseMatrix& a, double theta) {
        const auto n = static_cast<std::size_t>(a.rows());
        std::vector<std::vector<std::size_t>> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            double mx = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) mx = std::max(mx, -a(i, j));
            if (mx <= 0.0) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && -a(i, j) >= theta * mx) s[i].push_back(j);
        }
        return s;
    }

    /// Two-pass Ruge-Stueben splitting.
    static std::vector<char> coarsen(const DenseMatrix& a, double theta) {
        const auto n = static_cast<std::size_t>(a.rows());
        const auto s = strength(a, theta);
        std::vector<std::vector<std::size_t>> st(n);  // points strongly influenced by j
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j : s[i]) st[j].push_back(i);
        enum : char { U = 0, C = 1, F = 2 };
        std::vector<char> state(n, U);
        std::vector<std::size_t> lambda(n);
        std::set<std::pair<long, long>> queue;  // (-lambda, index)
        for (std::size_t i = 0; i < n; ++i) {
            lambda[i] = st[i].size();
            queue.insert({-static_cast<long>(lambda[i]), static_cast<long>(i)});
        }
        auto bump = [&](std::size_t k, long delta) {
            if (state[k] != U) return;
            queue.erase({-static_cast<long>(lambda[k]), static_cast<long>(k)});
            lambda[k] = static_cast<std::size_t>(static_cast<long>(lambda[k]) + delta);
            queue.insert({-static_cast<long>(lambda[k]), static_cast<long>(k)});
        };
        while (!queue.empty()) {
            const auto i = static_cast<std::size_t>(queue.begin()->second);
            queue.erase(queue.begin());
            if (state[i] != U) continue;
            state[i] = C;
            for (std::size_t j : st[i]) {
                if (state[j] != U) continue;
                queue.erase({-static_cast<long>(lambda[j]), static_cast<long>(j)});
                state[j] = F;
                for (std::size_t k : s[j]) bump(k, 1);
            }
            for (std::size_t k : s[i]) bump(k, -1);
        }
        // second pass: strongly connected F-points must share a strong C-point
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i] != F) continue;
            for (std::size_t j : s[i]) {
                if (state[j] != F) continue;
                bool shared = false;
                for (std::size_t k : s[i])
                    if (state[k] == C && std::find(s[j].begin(), s[j].end(), k) != s[j].end()) {
                        shared = true;
                        break;
                    }
                if (!shared) state[j] = C;
            }
        }
        std::vector<char> coarse(n);
        for (std::size_t i = 0; i < n; ++i) coarse[i] = state[i] == C;
        return coarse;
    }

    /// Classical direct interpolation; positive couplings are lumped into the diagonal.
    static Eigen::SparseMatrix<double> direct_interpolation(const DenseMatrix& a, const std::vector<char>& coarse,
                                                            double theta) {
        const auto n = static_cast<std::size_t>(a.rows());
        const auto s = strength(a, theta);
        std::vector<Eigen::Index> cidx(n, -1);
        Eigen::Index nc = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (coarse[i]) cidx[i] = nc++;
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            if (coarse[i]) {
                trip.emplace_back(ii, cidx[i], 1.0);
                continue;
            }
            double neg_all = 0.0, pos_all = 0.0, neg_p = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double v = a(ii, static_cast<Eigen::Index>(j));
                (v < 0.0 ? neg_all : pos_all) += v;
            }
            for (std::size_t j : s[i])
                if (coarse[j] && a(ii, static_cast<Eigen::Index>(j)) < 0.0) neg_p += a(ii, static_cast<Eigen::Index>(j));
            if (neg_p == 0.0) continue;
            const double diag = a(ii, ii) + pos_all;
            for (std::size_t j : s[i]) {
                const double v = a(ii, static_cast<Eigen::Index>(j));
                if (coarse[j] && v < 0.0) trip.emplace_back(ii, cidx[j], -(neg_all / neg_p) * v / diag);
            }
        }
        Eigen::SparseMatrix<double> p(static_cast<Eigen::Index>(n), nc);
        p.setFromTriplets(trip.begin(), trip.end());
        return p;
    }

    void smooth(const Level& lvl, const Eigen::VectorXd& b, Eigen::VectorXd& x, bool pre) const {
        const double w = params_.omega;
        auto sweep = [&](int which) {  // 0: all, 1: C only, 2: F only
            const Eigen::VectorXd r = b - lvl.a * x;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const bool c = lvl.is_coarse[static_cast<std::size_t>(i)] != 0;
                if (which == 0 || (which == 1) == c) x[i] += w * r[i] / lvl.a(i, i);
            }
        };
        if (params_.smoother == Smoother::CFJacobi) {
            sweep(pre ? 1 : 2);
            sweep(pre ? 2 : 1);
        } else {
            sweep(0);
        }
    }

    void cycle(std::size_t k, const Eigen::VectorXd& b, Eigen::VectorXd& x) const {
        const Level& lvl = levels_[k];
        if (k + 1 == levels_.size()) {
            const Vector sol = coarse_lu_.solve(std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
            x = Eigen::Map<const Eigen::VectorXd>(sol.data(), b.size());
            return;
        }
        smooth(lvl, b, x, true);
        const Eigen::VectorXd rc = lvl.p.transpose() * (b - lvl.a * x);
        Eigen::VectorXd ec = Eigen::VectorXd::Zero(rc.size());
        cycle(k + 1, rc, ec);
        x += lvl.p * ec;
        smooth(lvl, b, x, false);
    }

    AmgParams params_;
    std::optional<double> theta_override_;
    std::vector<Level> levels_;
    DenseLU coarse_lu_;
};

}  // namespace fracamg
