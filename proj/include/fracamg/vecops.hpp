#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fracamg/errors.hpp"

namespace fracamg {

using Vector = std::vector<double>;

inline double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("dot", x.size(), y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// y += a x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("axpy", y.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vector subtract(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("subtract", x.size(), y.size());
    Vector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

}  // namespace fracamg
