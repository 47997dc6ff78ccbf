#pragma once

#include <fftw3.h>

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "fracamg/errors.hpp"

namespace fracamg {

using Vector = std::vector<double>;
using DenseMatrix = Eigen::MatrixXd;

namespace detail {

// FFTW's planner is not reentrant; execution with the new-array interface is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex mu;
    return mu;
}

/// Real-to-complex / complex-to-real plan pair for one transform length.
class RealFftPair {
public:
    explicit RealFftPair(std::size_t n) : n_(n) {
        std::vector<double> re(n);
        std::vector<std::complex<double>> co(n / 2 + 1);
        auto* cp = reinterpret_cast<fftw_complex*>(co.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        std::lock_guard lock(fftw_planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), cp, flags);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), cp, re.data(), flags);
        if (!forward_ || !backward_) throw Error("FFTW plan creation failed");
    }
    RealFftPair(const RealFftPair&) = delete;
    RealFftPair& operator=(const RealFftPair&) = delete;
    ~RealFftPair() {
        std::lock_guard lock(fftw_planner_mutex());
        if (forward_) fftw_destroy_plan(forward_);
        if (backward_) fftw_destroy_plan(backward_);
    }

    std::size_t size() const { return n_; }

    void forward(double* in, std::complex<double>* out) const {
        fftw_execute_dft_r2c(forward_, in, reinterpret_cast<fftw_complex*>(out));
    }
    // destroys `in`
    void backward(std::complex<double>* in, double* out) const {
        fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
    }

private:
    std::size_t n_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace detail

/// Tuning knobs for SymToeplitz.
struct ToeplitzOptions {
    /// Use direct O(m^2) products at or below this size.
    std::size_t dense_threshold = 64;
    /// Circulant length; 0 selects the next power of two >= 2m.
    std::size_t padded_size = 0;
};

/// Symmetric Toeplitz matrix stored by its first row.
///
/// Copies share the lazily built circulant spectrum, which is created once
/// under std::call_once, so concurrent matvecs on one matrix are safe.
class SymToeplitz {
public:
    SymToeplitz() : state_(std::make_shared<State>()) {}

    explicit SymToeplitz(Vector symbol, ToeplitzOptions opts = {})
        : symbol_(std::move(symbol)), opts_(opts), state_(std::make_shared<State>()) {
        const std::size_t m = symbol_.size();
        if (opts_.padded_size == 0) {
            opts_.padded_size = std::bit_ceil(std::max<std::size_t>(2 * m, 2));
        } else if (opts_.padded_size + 1 < 2 * m) {
            throw InvalidArgument("circulant embedding needs length >= 2m-1");
        }
    }

    std::size_t m() const { return symbol_.size(); }
    const Vector& symbol() const { return symbol_; }
    double operator[](std::size_t lag) const { return symbol_[lag]; }
    double entry(std::size_t i, std::size_t j) const { return symbol_[i > j ? i - j : j - i]; }
    double diagonal() const { return symbol_.empty() ? 0.0 : symbol_[0]; }
    std::size_t padded_size() const { return opts_.padded_size; }
    const ToeplitzOptions& options() const { return opts_; }
    bool uses_fft() const { return m() > opts_.dense_threshold; }

    /// y = T x.
    void matvec(std::span<const double> x, std::span<double> y) const {
        const std::size_t m = this->m();
        if (x.size() != m) throw DimensionMismatch("matvec input", m, x.size());
        if (y.size() != m) throw DimensionMismatch("matvec output", m, y.size());
        if (!uses_fft()) {
            for (std::size_t i = 0; i < m; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < m; ++j) s += symbol_[i > j ? i - j : j - i] * x[j];
                y[i] = s;
            }
            return;
        }
        const State& st = spectrum_state();
        const std::size_t p = opts_.padded_size;
        std::vector<double> buf(p, 0.0);
        std::vector<std::complex<double>> freq(p / 2 + 1);
        std::copy(x.begin(), x.end(), buf.begin());
        st.fft->forward(buf.data(), freq.data());
        for (std::size_t k = 0; k < freq.size(); ++k) freq[k] *= st.eigenvalues[k];
        st.fft->backward(freq.data(), buf.data());
        const double scale = 1.0 / static_cast<double>(p);
        for (std::size_t i = 0; i < m; ++i) y[i] = buf[i] * scale;
    }

    Vector matvec(std::span<const double> x) const {
        Vector y(m());
        matvec(x, y);
        return y;
    }

    /// Sum of row i, O(1) after an O(m) prefix-sum pass.
    double row_sum(std::size_t i) const {
        const std::size_t m = this->m();
        if (i >= m) throw InvalidArgument("row index out of range");
        std::call_once(state_->prefix_once, [&] {
            state_->prefix.resize(m);
            double s = 0.0;
            for (std::size_t l = 0; l < m; ++l) state_->prefix[l] = (s += symbol_[l]);
        });
        // lags 0..i to the left, 0..m-1-i to the right, diagonal counted once
        return state_->prefix[i] + state_->prefix[m - 1 - i] - symbol_[0];
    }

private:
    struct State {
        std::once_flag spectrum_once;
        std::unique_ptr<detail::RealFftPair> fft;
        std::vector<double> eigenvalues;
        std::once_flag prefix_once;
        std::vector<double> prefix;
    };

    const State& spectrum_state() const {
        std::call_once(state_->spectrum_once, [&] {
            const std::size_t p = opts_.padded_size;
            const std::size_t m = this->m();
            auto fft = std::make_unique<detail::RealFftPair>(p);
            std::vector<double> col(p, 0.0);
            col[0] = symbol_[0];
            for (std::size_t l = 1; l < m; ++l) {
                col[l] = symbol_[l];
                col[p - l] = symbol_[l];
            }
            std::vector<std::complex<double>> freq(p / 2 + 1);
            fft->forward(col.data(), freq.data());
            // symmetric circulant: spectrum is real
            state_->eigenvalues.resize(freq.size());
            for (std::size_t k = 0; k < freq.size(); ++k) state_->eigenvalues[k] = freq[k].real();
            state_->fft = std::move(fft);
        });
        return *state_;
    }

    Vector symbol_;
    ToeplitzOptions opts_;
    std::shared_ptr<State> state_;
};

/// Default size cap for dense materialization.
inline constexpr std::size_t kDenseCap = 8192;

/// Full m x m matrix with entry (i,j) = symbol[|i-j|].
inline DenseMatrix to_dense(const SymToeplitz& t, std::size_t cap = kDenseCap) {
    const std::size_t m = t.m();
    if (m > cap) throw InvalidArgument("matrix exceeds the dense size cap");
    DenseMatrix d(m, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i) d(i, j) = t.entry(i, j);
    return d;
}

inline Vector matvec(const SymToeplitz& t, std::span<const double> x) { return t.matvec(x); }

inline double row_sum(const SymToeplitz& t, std::size_t i) { return t.row_sum(i); }

}  // namespace fracamg
