#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstddef>
#include <utility>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "fracamg/errors.hpp"
#include "fracamg/problem.hpp"
#include "fracamg/toeplitz.hpp"
#include "fracamg/vecops.hpp"

namespace fracamg {

/// Mass matrix of the hat basis: symbol [4h/6, h/6, 0, ...] of size m-1.
inline SymToeplitz mass_symbol(std::size_t m, double h) {
    if (m < 4) throw InvalidArgument("mass_symbol needs m >= 4");
    if (!(h > 0.0)) throw InvalidArgument("mass_symbol needs h > 0");
    Vector s(m - 1, 0.0);
    s[0] = 4.0 * h / 6.0;
    s[1] = h / 6.0;
    return SymToeplitz(std::move(s));
}

namespace detail {

/// Fourth central difference of |t|^p at integer lag l.
///
/// Small lags are summed directly in extended precision. Beyond that the
/// direct sum cancels catastrophically (terms ~ l^p, result ~ l^(p-4)), so
/// the expansion delta^4 = D^4 + D^6/6 + D^8/80 + ... is used instead.
inline double fourth_difference(double p, std::size_t l) {
    constexpr std::size_t kSeriesFrom = 16;
    if (l < kSeriesFrom) {
        const long double lp = p;
        auto f = [&](long long x) {
            return std::pow(static_cast<long double>(x < 0 ? -x : x), lp);
        };
        const auto li = static_cast<long long>(l);
        const long double d = f(li + 2) - 4.0L * f(li + 1) + 6.0L * f(li) - 4.0L * f(li - 1) + f(li - 2);
        return static_cast<double>(d);
    }
    static constexpr double coeff[] = {1.0,
                                       1.0 / 6.0,
                                       1.0 / 80.0,
                                       17.0 / 30240.0,
                                       31.0 / 1814400.0,
                                       1.0 / 2661120.0,
                                       5461.0 / 871782912000.0};
    const double x = static_cast<double>(l);
    // falling factorial p (p-1) ... (p-k+1) times x^(p-k), for k = 4, 6, ...
    double fall = p * (p - 1.0) * (p - 2.0) * (p - 3.0);
    double power = std::pow(x, p - 4.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < std::size(coeff); ++j) {
        sum += coeff[j] * fall * power;
        const double k = 4.0 + 2.0 * static_cast<double>(j);
        fall *= (p - k) * (p - k - 1.0);
        power /= x * x;
    }
    return sum;
}

}  // namespace detail

/// Stiffness matrix of the Riesz derivative of order 2*mu on hat functions.
inline SymToeplitz stiffness_symbol(double mu, std::size_t m, double h) {
    if (!(mu > 0.0 && mu < 1.0)) throw InvalidArgument("stiffness order must lie in (0,1)");
    if (mu == 0.5) throw SingularOrder("stiffness order 1/2 makes cos(mu*pi) vanish");
    if (m < 4) throw InvalidArgument("stiffness_symbol needs m >= 4");
    if (!(h > 0.0)) throw InvalidArgument("stiffness_symbol needs h > 0");
    const double c = std::cos(mu * std::numbers::pi);
    if (std::abs(c) < 1e-14) throw SingularOrder("stiffness order too close to 1/2");
    const double pre = std::pow(h, 1.0 - 2.0 * mu) / (2.0 * c * std::tgamma(4.0 - 2.0 * mu));
    const double p = 3.0 - 2.0 * mu;
    Vector s(m - 1);
    for (std::size_t l = 0; l < s.size(); ++l) s[l] = pre * detail::fourth_difference(p, l);
    return SymToeplitz(std::move(s));
}

/// Scalars used to combine the component matrices into the step matrix.
struct ScaleRecord {
    std::vector<double> mass_terms;  // C_i = a_i G(3-a0) tau^(a0-a_i) / G(3-a_i)
    double mass_total = 0.0;         // sum of C_i
    double beta_coeff = 0.0;         // K1 G(3-a0) tau^a0 / 2
    double gamma_coeff = 0.0;        // K2 G(3-a0) tau^a0 / 2
    double tau = 0.0;
};

/// Per-step coefficient matrix and its components.
struct StepMatrix {
    SymToeplitz a_full;
    SymToeplitz mass;
    SymToeplitz stiff_beta;
    SymToeplitz stiff_gamma;
    ScaleRecord scale_record;
};

inline ScaleRecord step_scales(const ProblemSpec& spec, double tau) {
    const auto& o = spec.orders;
    const double a0 = o.alpha0();
    const double g0 = std::tgamma(3.0 - a0);
    ScaleRecord r;
    r.tau = tau;
    for (std::size_t i = 0; i < o.alphas.size(); ++i) {
        const double ci = o.a_coeffs[i] * g0 * std::pow(tau, a0 - o.alphas[i]) / std::tgamma(3.0 - o.alphas[i]);
        r.mass_terms.push_back(ci);
        r.mass_total += ci;
    }
    r.beta_coeff = spec.k1 * g0 * std::pow(tau, a0) / 2.0;
    r.gamma_coeff = spec.k2 * g0 * std::pow(tau, a0) / 2.0;
    return r;
}

/// Combine precomputed components with the scalars for step size tau.
inline StepMatrix combine_step_matrix(const ProblemSpec& spec, const SymToeplitz& mass,
                                      const SymToeplitz& stiff_beta, const SymToeplitz& stiff_gamma,
                                      double tau, ToeplitzOptions opts = {}) {
    StepMatrix s{{}, mass, stiff_beta, stiff_gamma, step_scales(spec, tau)};
    const auto& r = s.scale_record;
    Vector sym(mass.m());
    for (std::size_t l = 0; l < sym.size(); ++l)
        sym[l] = r.mass_total * mass[l] + r.beta_coeff * stiff_beta[l] + r.gamma_coeff * stiff_gamma[l];
    s.a_full = SymToeplitz(std::move(sym), opts);
    return s;
}

/// Coefficient matrix of step n (1 <= n <= N).
inline StepMatrix step_matrix(const ProblemSpec& spec, const Mesh& mesh, std::size_t n) {
    if (n < 1 || n > mesh.steps()) throw InvalidArgument("step index out of range");
    const double h = mesh.h();
    return combine_step_matrix(spec, mass_symbol(mesh.m(), h),
                               stiffness_symbol(spec.orders.beta, mesh.m(), h),
                               stiffness_symbol(spec.orders.gamma, mesh.m(), h), mesh.tau(n));
}

/// Builds step matrices once per distinct step size and hands out shared copies.
class StepMatrixCache {
public:
    StepMatrixCache(const ProblemSpec& spec, const Mesh& mesh)
        : spec_(spec),
          mass_(mass_symbol(mesh.m(), mesh.h())),
          beta_(stiffness_symbol(spec.orders.beta, mesh.m(), mesh.h())),
          gamma_(stiffness_symbol(spec.orders.gamma, mesh.m(), mesh.h())),
          mesh_(mesh) {}

    std::shared_ptr<const StepMatrix> get(std::size_t n) {
        if (n < 1 || n > mesh_.steps()) throw InvalidArgument("step index out of range");
        const double tau = mesh_.tau(n);
        std::lock_guard lock(mu_);
        auto it = cache_.find(tau);
        if (it != cache_.end()) return it->second;
        auto sm = std::make_shared<const StepMatrix>(combine_step_matrix(spec_, mass_, beta_, gamma_, tau));
        cache_.emplace(tau, sm);
        return sm;
    }

private:
    const ProblemSpec& spec_;
    SymToeplitz mass_, beta_, gamma_;
    const Mesh& mesh_;
    std::mutex mu_;
    std::map<double, std::shared_ptr<const StepMatrix>> cache_;
};

/// Quadrature for the source moments.
enum class SourceQuadrature {
    /// tanh-sinh on the two boundary cells and 8-point Gauss-Legendre elsewhere in x;
    /// 8-point Gauss-Legendre in t, geometrically graded on a step that starts at t = 0
    Adaptive,
    /// fixed 4-point Gauss-Legendre per cell in x and in t
    GaussLegendre4
};

namespace detail {

/// Time nodes and weights on [t0, t1].
inline std::vector<std::pair<double, double>> time_rule(double t0, double t1, SourceQuadrature rule) {
    std::vector<std::pair<double, double>> nodes;
    auto add = [&nodes](const auto& absc, const auto& wts, double a, double b) {
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        for (std::size_t i = 0; i < absc.size(); ++i) {
            if (absc[i] == 0.0) {
                nodes.emplace_back(c, r * wts[i]);
                continue;
            }
            nodes.emplace_back(c - r * absc[i], r * wts[i]);
            nodes.emplace_back(c + r * absc[i], r * wts[i]);
        }
    };
    using boost::math::quadrature::gauss;
    if (rule == SourceQuadrature::GaussLegendre4) {
        add(gauss<double, 4>::abscissa(), gauss<double, 4>::weights(), t0, t1);
        return nodes;
    }
    const auto& x8 = gauss<double, 8>::abscissa();
    const auto& w8 = gauss<double, 8>::weights();
    if (t0 > 0.0) {
        add(x8, w8, t0, t1);
        return nodes;
    }
    // pieces [t1 2^-(k+1), t1 2^-k]; sources carry powers t^(2-alpha) at the origin
    constexpr int kLevels = 20;
    double hi = t1;
    for (int k = 0; k < kLevels; ++k) {
        add(x8, w8, 0.5 * hi, hi);
        hi *= 0.5;
    }
    add(x8, w8, 0.0, hi);
    return nodes;
}

}  // namespace detail

/// Load vector entry l = int_{t_{n-1}}^{t_n} int f phi_l dx dt.
inline Vector source_moment(const ProblemSpec& spec, const Mesh& mesh, std::size_t n,
                            SourceQuadrature rule = SourceQuadrature::Adaptive) {
    if (n < 1 || n > mesh.steps()) throw InvalidArgument("step index out of range");
    using boost::math::quadrature::gauss;
    const std::size_t m = mesh.m();
    const double h = mesh.h();
    Vector out(m - 1, 0.0);
    const auto tnodes = detail::time_rule(mesh.time(n - 1), mesh.time(n), rule);
    thread_local boost::math::quadrature::tanh_sinh<double> ts;

    for (std::size_t c = 0; c < m; ++c) {
        const double xl = spec.a + static_cast<double>(c) * h;
        const double xr = (c + 1 == m) ? spec.b : xl + h;
        // hat rising on this cell belongs to node c+1, falling hat to node c
        auto cell = [&](bool rising) {
            auto g = [&](double x) {
                double ft = 0.0;
                for (const auto& [t, w] : tnodes) ft += w * spec.source(x, t);
                return (rising ? (x - xl) / h : (xr - x) / h) * ft;
            };
            if (rule == SourceQuadrature::GaussLegendre4) return gauss<double, 4>::integrate(g, xl, xr);
            // f may be singular at the ends of the domain only
            if (c == 0 || c + 1 == m) return ts.integrate(g, xl, xr, 1e-12);
            return gauss<double, 8>::integrate(g, xl, xr);
        };
        if (c + 1 <= m - 1) out[c] += cell(true);
        if (c >= 1) out[c - 1] += cell(false);
    }
    return out;
}

/// Weight of M_h (U^k - U^(k-1)) in the Caputo memory sum of step n for order alpha.
inline double history_weight(double alpha, std::size_t n, std::size_t k, const Mesh& mesh) {
    if (k < 1 || k >= n) throw InvalidArgument("history weight needs 1 <= k <= n-1");
    if (n > mesh.steps()) throw InvalidArgument("step index out of range");
    const long double e = 2.0L - static_cast<long double>(alpha);
    const long double tn = mesh.time(n), tn1 = mesh.time(n - 1);
    const long double tk = mesh.time(k), tk1 = mesh.time(k - 1);
    auto g = [&](long double s) { return std::pow(s, e); };
    const long double num = g(tn - tk1) - g(tn1 - tk1) - g(tn - tk) + g(tn1 - tk);
    return static_cast<double>(num / (static_cast<long double>(mesh.tau(k)) * std::tgamma(1.0L + e)));
}

/// Nodal states U^0 ... U^(n-1) and their times.
struct TimeHistory {
    std::vector<Vector> states;
    std::vector<double> times;

    std::size_t size() const { return states.size(); }
    void push(Vector u, double t) {
        states.push_back(std::move(u));
        times.push_back(t);
    }
};

/// Nodal interpolant of psi_0 at the interior nodes.
inline Vector initial_state(const ProblemSpec& spec, const Mesh& mesh) {
    Vector u(mesh.unknowns());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = spec.initial(mesh.node(j + 1));
    return u;
}

/// Right-hand side of step n given a precomputed load vector.
inline Vector rhs_vector(const ProblemSpec& spec, const Mesh& mesh, std::size_t n,
                         const TimeHistory& history, const StepMatrix& mats,
                         std::span<const double> load) {
    if (n < 1 || n > mesh.steps()) throw InvalidArgument("step index out of range");
    if (history.size() != n) throw DimensionMismatch("history length", n, history.size());
    const std::size_t dim = mesh.unknowns();
    if (load.size() != dim) throw DimensionMismatch("load vector", dim, load.size());
    const auto& o = spec.orders;
    const double tau = mesh.tau(n);
    const double a0 = o.alpha0();

    double cm = 0.0;
    for (std::size_t i = 0; i < o.alphas.size(); ++i)
        cm += o.a_coeffs[i] * std::pow(tau, 1.0 - o.alphas[i]) / std::tgamma(3.0 - o.alphas[i]);

    // memory term: sum_i a_i sum_k w_{n,k}^i (U^k - U^(k-1)), mass applied once at the end
    Vector memory(dim, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        double w = 0.0;
        for (std::size_t i = 0; i < o.alphas.size(); ++i)
            if (o.a_coeffs[i] != 0.0) w += o.a_coeffs[i] * history_weight(o.alphas[i], n, k, mesh);
        const Vector& uk = history.states[k];
        const Vector& ukm = history.states[k - 1];
        for (std::size_t j = 0; j < dim; ++j) memory[j] += w * (uk[j] - ukm[j]);
    }

    const Vector& prev = history.states[n - 1];
    // mass term minus memory share one mass product
    Vector mixed(dim);
    for (std::size_t j = 0; j < dim; ++j) mixed[j] = cm * prev[j] - memory[j];
    const Vector mv = mats.mass.matvec(mixed);
    const Vector bv = mats.stiff_beta.matvec(prev);
    const Vector gv = mats.stiff_gamma.matvec(prev);

    const double scale = std::tgamma(3.0 - a0) * std::pow(tau, a0 - 1.0);
    const double kb = spec.k1 * tau / 2.0, kg = spec.k2 * tau / 2.0;
    Vector rhs(dim);
    for (std::size_t j = 0; j < dim; ++j)
        rhs[j] = scale * (load[j] + mv[j] - kb * bv[j] - kg * gv[j]);
    return rhs;
}

/// Right-hand side of step n, computing the load vector with `rule`.
inline Vector rhs_vector(const ProblemSpec& spec, const Mesh& mesh, std::size_t n,
                         const TimeHistory& history, const StepMatrix& mats,
                         SourceQuadrature rule = SourceQuadrature::Adaptive) {
    if (history.size() != n) throw DimensionMismatch("history length", n, history.size());
    const Vector load = source_moment(spec, mesh, n, rule);
    return rhs_vector(spec, mesh, n, history, mats, load);
}

}  // namespace fracamg
