#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fracamg/errors.hpp"

namespace fracamg {

using Vector = std::vector<double>;
using SpaceFn = std::function<double(double)>;
using SpaceTimeFn = std::function<double(double, double)>;

/// Temporal orders alpha_0 > ... > alpha_s with weights a_i, and the two
/// spatial orders: beta in (0, 1/2) for advection, gamma in (1/2, 1) for diffusion.
struct FractionalOrders {
    std::vector<double> alphas;
    std::vector<double> a_coeffs;
    double beta = 0.0;
    double gamma = 0.0;

    void validate() const {
        if (alphas.empty()) throw InvalidArgument("at least one temporal order is required");
        if (alphas.size() != a_coeffs.size())
            throw InvalidArgument("alphas and a_coeffs must have the same length");
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (!(alphas[i] > 0.0 && alphas[i] < 1.0))
                throw InvalidArgument("temporal orders must lie in (0,1)");
            if (i > 0 && !(alphas[i] < alphas[i - 1]))
                throw InvalidArgument("temporal orders must be strictly decreasing");
            if (!(a_coeffs[i] >= 0.0)) throw InvalidArgument("a_coeffs must be nonnegative");
        }
        if (!(a_coeffs[0] > 0.0)) throw InvalidArgument("a_coeffs[0] must be positive");
        if (!(beta > 0.0 && beta < 0.5)) throw InvalidArgument("beta must lie in (0, 1/2)");
        if (!(gamma > 0.5 && gamma < 1.0)) throw InvalidArgument("gamma must lie in (1/2, 1)");
    }

    double alpha0() const { return alphas.front(); }
};

/// Continuous problem on (a, b) x (0, T] with homogeneous Dirichlet data.
struct ProblemSpec {
    FractionalOrders orders;
    double k1 = 1.0;
    double k2 = 1.0;
    double a = 0.0;
    double b = 1.0;
    double horizon = 1.0;
    SpaceTimeFn source;
    SpaceFn initial;
    std::optional<SpaceTimeFn> exact;

    void validate() const {
        orders.validate();
        if (!(k1 > 0.0)) throw InvalidArgument("k1 must be positive");
        if (!(k2 > 0.0)) throw InvalidArgument("k2 must be positive");
        if (!(horizon > 0.0)) throw InvalidArgument("final time must be positive");
        if (!(a < b)) throw InvalidArgument("domain must satisfy a < b");
        if (!source) throw InvalidArgument("source term is missing");
        if (!initial) throw InvalidArgument("initial data is missing");
    }
};

/// How the time step is tied to the spatial step.
struct TimePolicy {
    enum class Kind { TauEqH, TauEqH2, TauConst };
    Kind kind = Kind::TauEqH;
    double tau = 0.0;  // only read for TauConst

    static TimePolicy eq_h() { return {Kind::TauEqH, 0.0}; }
    static TimePolicy eq_h2() { return {Kind::TauEqH2, 0.0}; }
    static TimePolicy constant(double tau) { return {Kind::TauConst, tau}; }
};

/// Uniform spatial grid with m cells and a (possibly nonuniform) time grid.
class Mesh {
public:
    Mesh(double a, double b, std::size_t m, std::vector<double> taus)
        : a_(a), b_(b), m_(m), taus_(std::move(taus)) {
        if (m_ < 4) throw InvalidArgument("mesh needs at least 4 cells");
        if (!(a_ < b_)) throw InvalidArgument("domain must satisfy a < b");
        if (taus_.empty()) throw InvalidArgument("time grid needs at least one step");
        h_ = (b_ - a_) / static_cast<double>(m_);
        times_.reserve(taus_.size() + 1);
        times_.push_back(0.0);
        double t = 0.0;
        uniform_ = true;
        for (double tau : taus_) {
            if (!(tau > 0.0)) throw InvalidArgument("time steps must be positive");
            if (tau != taus_.front()) uniform_ = false;
            t += tau;
            times_.push_back(t);
        }
    }

    std::size_t m() const { return m_; }
    std::size_t unknowns() const { return m_ - 1; }
    std::size_t steps() const { return taus_.size(); }
    double h() const { return h_; }
    double a() const { return a_; }
    double b() const { return b_; }
    /// tau_n for 1 <= n <= N.
    double tau(std::size_t n) const { return taus_.at(n - 1); }
    double time(std::size_t n) const { return times_.at(n); }
    const std::vector<double>& taus() const { return taus_; }
    const std::vector<double>& times() const { return times_; }
    bool uniform() const { return uniform_; }
    double final_time() const { return times_.back(); }
    /// Interior node x_j, 1 <= j <= m-1.
    double node(std::size_t j) const { return a_ + static_cast<double>(j) * h_; }

private:
    double a_, b_;
    std::size_t m_;
    double h_ = 0.0;
    std::vector<double> taus_;
    std::vector<double> times_;
    bool uniform_ = true;
};

/// Uniform mesh with tau = h, h^2 or a constant; N is rounded up so that N*tau = T.
inline Mesh make_mesh(const ProblemSpec& spec, std::size_t m, TimePolicy policy) {
    if (m < 4) throw InvalidArgument("mesh needs at least 4 cells");
    const double h = (spec.b - spec.a) / static_cast<double>(m);
    double nominal = 0.0;
    switch (policy.kind) {
        case TimePolicy::Kind::TauEqH: nominal = h; break;
        case TimePolicy::Kind::TauEqH2: nominal = h * h; break;
        case TimePolicy::Kind::TauConst: nominal = policy.tau; break;
    }
    if (!(nominal > 0.0) || !std::isfinite(nominal))
        throw InvalidArgument("time policy gives a nonpositive step");
    const double ratio = spec.horizon / nominal;
    // guard against T/tau landing a hair above an integer
    const double steps = std::ceil(ratio * (1.0 - 1e-12));
    if (!(steps >= 1.0) || steps > 1e9) throw InvalidArgument("time policy gives N < 1");
    const auto n = static_cast<std::size_t>(steps);
    return Mesh(spec.a, spec.b, m, std::vector<double>(n, spec.horizon / steps));
}

namespace detail {

inline double bracket_ex1(double x, double mu) {
    const double y = 1.0 - x;
    return std::pow(y, 1.0 - 2.0 * mu) / std::tgamma(2.0 - 2.0 * mu) +
           (2.0 * std::pow(x, 2.0 - 2.0 * mu) - 4.0 * std::pow(y, 2.0 - 2.0 * mu)) /
               std::tgamma(3.0 - 2.0 * mu) +
           (6.0 * std::pow(y, 3.0 - 2.0 * mu) - 6.0 * std::pow(x, 3.0 - 2.0 * mu)) /
               std::tgamma(4.0 - 2.0 * mu);
}

inline double bracket_ex2(double x, double mu) {
    const double y = 1.0 - x;
    return (std::pow(x, 2.0 - 2.0 * mu) + std::pow(y, 2.0 - 2.0 * mu)) /
               std::tgamma(3.0 - 2.0 * mu) -
           6.0 * (std::pow(x, 3.0 - 2.0 * mu) + std::pow(y, 3.0 - 2.0 * mu)) /
               std::tgamma(4.0 - 2.0 * mu) +
           12.0 * (std::pow(x, 4.0 - 2.0 * mu) + std::pow(y, 4.0 - 2.0 * mu)) /
               std::tgamma(5.0 - 2.0 * mu);
}

inline FractionalOrders two_term_orders(double alpha0, double alpha1, double beta, double gamma) {
    FractionalOrders o{{alpha0, alpha1}, {1.0, 1.0}, beta, gamma};
    o.validate();
    return o;
}

}  // namespace detail

/// Manufactured problem with u = 100 (t^2+1)(x^2-x^3) on (0,1) x (0,0.5],
/// K1 = 1, K2 = 2, a_0 = a_1 = 1.
inline ProblemSpec make_example_1(double alpha0, double alpha1, double beta, double gamma) {
    ProblemSpec spec;
    spec.orders = detail::two_term_orders(alpha0, alpha1, beta, gamma);
    spec.k1 = 1.0;
    spec.k2 = 2.0;
    spec.a = 0.0;
    spec.b = 1.0;
    spec.horizon = 0.5;
    const double ga0 = std::tgamma(3.0 - alpha0), ga1 = std::tgamma(3.0 - alpha1);
    const double cb = std::cos(beta * std::numbers::pi), cg = std::cos(gamma * std::numbers::pi);
    spec.source = [=](double x, double t) {
        const double time_part = std::pow(t, 2.0 - alpha0) / ga0 + std::pow(t, 2.0 - alpha1) / ga1;
        const double s = t * t + 1.0;
        return 200.0 * (x * x - x * x * x) * time_part + 50.0 * s / cb * detail::bracket_ex1(x, beta) +
               100.0 * s / cg * detail::bracket_ex1(x, gamma);
    };
    spec.initial = [](double x) { return 100.0 * (x * x - x * x * x); };
    spec.exact = [](double x, double t) { return 100.0 * (t * t + 1.0) * (x * x - x * x * x); };
    return spec;
}

/// Manufactured problem with u = 100 (t^2+1) x^2 (1-x)^2 and caller-chosen K1, K2.
inline ProblemSpec make_example_2(double k1, double k2, double alpha0, double alpha1, double beta,
                                  double gamma) {
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw InvalidArgument("k1 and k2 must be positive");
    ProblemSpec spec;
    spec.orders = detail::two_term_orders(alpha0, alpha1, beta, gamma);
    spec.k1 = k1;
    spec.k2 = k2;
    spec.a = 0.0;
    spec.b = 1.0;
    spec.horizon = 0.5;
    const double ga0 = std::tgamma(3.0 - alpha0), ga1 = std::tgamma(3.0 - alpha1);
    const double cb = std::cos(beta * std::numbers::pi), cg = std::cos(gamma * std::numbers::pi);
    spec.source = [=](double x, double t) {
        const double time_part = std::pow(t, 2.0 - alpha0) / ga0 + std::pow(t, 2.0 - alpha1) / ga1;
        const double s = t * t + 1.0;
        const double q = x * (1.0 - x);
        return 200.0 * q * q * time_part + 100.0 * k1 * s / cb * detail::bracket_ex2(x, beta) +
               100.0 * k2 * s / cg * detail::bracket_ex2(x, gamma);
    };
    spec.initial = [](double x) {
        const double q = x * (1.0 - x);
        return 100.0 * q * q;
    };
    spec.exact = [](double x, double t) {
        const double q = x * (1.0 - x);
        return 100.0 * (t * t + 1.0) * q * q;
    };
    return spec;
}

}  // namespace fracamg
