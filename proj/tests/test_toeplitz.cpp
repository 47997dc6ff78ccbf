#include <gtest/gtest.h>

#include <thread>

#include "fracamg/toeplitz.hpp"
#include "fracamg/vecops.hpp"
#include "oracles.hpp"

using namespace fracamg;

namespace {

ToeplitzOptions force_fft() { return {0, 0}; }

double rel_diff(const Vector& a, const Eigen::VectorXd& b) {
    return (oracle::vec(a) - b).norm() / b.norm();
}

}  // namespace

TEST(Matvec, IdentitySymbol) {
    Vector sym(100, 0.0);
    sym[0] = 1.0;
    const SymToeplitz t(sym, force_fft());
    const Vector x = oracle::random_vector(100, 1);
    const Vector y = t.matvec(x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-14);
}

TEST(Matvec, LaplacianRowSums) {
    for (auto opts : {ToeplitzOptions{}, force_fft()}) {
        Vector sym(200, 0.0);
        sym[0] = 2.0;
        sym[1] = -1.0;
        const SymToeplitz t(sym, opts);
        const Vector y = t.matvec(Vector(200, 1.0));
        EXPECT_NEAR(y.front(), 1.0, 1e-13);
        EXPECT_NEAR(y.back(), 1.0, 1e-13);
        for (std::size_t i = 1; i + 1 < y.size(); ++i) EXPECT_NEAR(y[i], 0.0, 1e-13);
    }
}

TEST(Matvec, MatchesDenseProduct) {
    for (std::size_t m : {3, 64, 257, 1024}) {
        const Vector sym = oracle::random_vector(m, 10 + m);
        const Vector x = oracle::random_vector(m, 20 + m);
        const Eigen::VectorXd ref = oracle::toeplitz(sym) * oracle::vec(x);
        EXPECT_LT(rel_diff(SymToeplitz(sym, force_fft()).matvec(x), ref), 1e-10) << "m=" << m;
        EXPECT_LT(rel_diff(SymToeplitz(sym).matvec(x), ref), 1e-10) << "m=" << m;
    }
}

TEST(Matvec, SymmetricBilinearForm) {
    for (std::size_t m : {3, 64, 257, 1024}) {
        const Vector sym = oracle::random_vector(m, 30 + m);
        const SymToeplitz t(sym, force_fft());
        const Vector x = oracle::random_vector(m, 40 + m), y = oracle::random_vector(m, 50 + m);
        const double norm_t = oracle::toeplitz(sym).norm();
        EXPECT_LE(std::abs(dot(t.matvec(x), y) - dot(x, t.matvec(y))), 1e-12 * norm_t * norm2(x) * norm2(y));
    }
}

TEST(Matvec, PaddingIndependent) {
    for (std::size_t m : {3, 64, 257, 1024}) {
        const Vector sym = oracle::random_vector(m, 60 + m);
        const Vector x = oracle::random_vector(m, 70 + m);
        const SymToeplitz a(sym, {0, 0});
        const SymToeplitz b(sym, {0, 4 * m});
        EXPECT_EQ(a.padded_size() % 2, 0u);
        EXPECT_GE(a.padded_size(), 2 * m);
        const Vector ya = a.matvec(x), yb = b.matvec(x);
        const double scale = norm2(ya);
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(ya[i], yb[i], 1e-12 * scale);
    }
}

TEST(Matvec, Linear) {
    const std::size_t m = 500;
    const SymToeplitz t(oracle::random_vector(m, 80), force_fft());
    const Vector x = oracle::random_vector(m, 81), y = oracle::random_vector(m, 82);
    const double a = 1.7, b = -0.3;
    Vector comb(m);
    for (std::size_t i = 0; i < m; ++i) comb[i] = a * x[i] + b * y[i];
    const Vector lhs = t.matvec(comb), tx = t.matvec(x), ty = t.matvec(y);
    const double scale = norm2(lhs);
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(lhs[i], a * tx[i] + b * ty[i], 1e-12 * scale);
}

TEST(Matvec, DimensionMismatch) {
    const SymToeplitz t(Vector{2.0, -1.0, 0.0});
    EXPECT_THROW(t.matvec(Vector(4, 1.0)), DimensionMismatch);
}

TEST(Matvec, ConcurrentFirstUse) {
    const std::size_t m = 2048;
    const SymToeplitz t(oracle::random_vector(m, 90));
    const Vector x = oracle::random_vector(m, 91);
    const Eigen::VectorXd ref = oracle::toeplitz(t.symbol()) * oracle::vec(x);
    std::vector<double> errs(8);
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < errs.size(); ++k)
        pool.emplace_back([&, k] { errs[k] = rel_diff(t.matvec(x), ref); });
    for (auto& th : pool) th.join();
    for (double e : errs) EXPECT_LT(e, 1e-10);
}

TEST(ToDense, SmallCases) {
    const DenseMatrix a = to_dense(SymToeplitz(Vector{3.0}));
    ASSERT_EQ(a.rows(), 1);
    EXPECT_EQ(a(0, 0), 3.0);
    const DenseMatrix b = to_dense(SymToeplitz(Vector{2.0, -1.0}));
    EXPECT_EQ(b(0, 0), 2.0);
    EXPECT_EQ(b(0, 1), -1.0);
    EXPECT_EQ(b(1, 0), -1.0);
    EXPECT_EQ(b(1, 1), 2.0);
}

TEST(ToDense, RoundTripAndEntries) {
    const Vector sym = oracle::random_vector(37, 5);
    const SymToeplitz t(sym);
    const DenseMatrix d = to_dense(t);
    for (std::size_t j = 0; j < sym.size(); ++j) EXPECT_EQ(d(0, static_cast<Eigen::Index>(j)), sym[j]);
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) EXPECT_EQ(d(i, j), t.entry(i, j));
}

TEST(ToDense, CapEnforced) {
    const SymToeplitz t(Vector(20, 1.0));
    EXPECT_THROW(to_dense(t, 10), InvalidArgument);
}

TEST(RowSum, KnownSymbols) {
    Vector id(9, 0.0);
    id[0] = 1.0;
    const SymToeplitz t(id);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(row_sum(t, i), 1.0);
    Vector lap(9, 0.0);
    lap[0] = 2.0;
    lap[1] = -1.0;
    const SymToeplitz l(lap);
    for (std::size_t i = 1; i < 8; ++i) EXPECT_EQ(row_sum(l, i), 0.0);
    EXPECT_EQ(row_sum(l, 0), 1.0);
    EXPECT_THROW(row_sum(l, 9), InvalidArgument);
}

TEST(RowSum, MatchesDense) {
    const Vector sym = oracle::random_vector(301, 7);
    const SymToeplitz t(sym);
    const Eigen::VectorXd sums = oracle::toeplitz(sym).rowwise().sum();
    for (std::size_t i = 0; i < sym.size(); ++i) EXPECT_NEAR(row_sum(t, i), sums[static_cast<Eigen::Index>(i)], 1e-13);
}
