#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "bdf3/linalg.hpp"
#include "bdf3/time_grid.hpp"

namespace bdf3 {

/// Convolution kernels of the variable-step BDF formula at one level n:
/// D_3 v^n = b0 (v^n - v^{n-1}) + b1 (v^{n-1} - v^{n-2}) + b2 (v^{n-2} - v^{n-3}).
/// Level 1 is BDF1 (b1 = b2 = 0), level 2 is BDF2 (b2 = 0). Units 1/time.
struct BdfCoefficients {
    std::size_t level = 0;
    double b0 = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;

    double operator[](std::size_t j) const noexcept { return j == 0 ? b0 : j == 1 ? b1 : j == 2 ? b2 : 0.0; }
};

/// Kernels at level n from the local geometry (tau_n, r_n, r_{n-1}).
/// Ratios that the level does not use are ignored (r_n for n = 1, r_{n-1} for n <= 2).
inline BdfCoefficients level_coefficients(std::size_t level, double tau, double r, double r_prev) {
    if (level == 0) throw std::invalid_argument("BDF level must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("BDF step must be positive");
    BdfCoefficients c{.level = level};
    if (level == 1) {
        c.b0 = 1.0 / tau;
        return c;
    }
    if (level == 2) {
        c.b0 = (1.0 + 2.0 * r) / (tau * (1.0 + r));
        c.b1 = -r * r / (tau * (1.0 + r));
        return c;
    }
    const double s = r_prev;
    const double den = tau * (1.0 + r) * (1.0 + s) * (1.0 + s + r * s);
    c.b0 = (1.0 + s) * (1.0 + 2.0 * r + s * (1.0 + 4.0 * r + 3.0 * r * r)) / den;
    c.b1 = -r * r * ((1.0 + 2.0 * s + r * s) * (1.0 + 2.0 * s + r * s) - s * (1.0 + s)) / den;
    c.b2 = r * r * s * s * s * (1.0 + r) * (1.0 + r) / den;
    return c;
}

inline BdfCoefficients bdf_coefficients(const TimeGrid& grid, std::size_t n) {
    if (n < 1 || n > grid.size())
        throw std::out_of_range("BDF level " + std::to_string(n) + " outside 1.." + std::to_string(grid.size()));
    const double r = n >= 2 ? grid.ratio(n) : 0.0;
    const double r_prev = n >= 3 ? grid.ratio(n - 1) : 0.0;
    return level_coefficients(n, grid.step(n), r, r_prev);
}

/// Dimensionless kernels a_j^{(n)} = sqrt(tau_n tau_{n-j}) b_j^{(n)}, the
/// entries of A = Lambda^{1/2} B Lambda^{1/2}, evaluated from their closed forms.
/// They depend on the ratios only.
struct ScaledCoefficients {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
};

inline ScaledCoefficients scaled_coefficients(std::size_t level, double r, double r_prev) {
    if (level == 0) throw std::invalid_argument("BDF level must be >= 1");
    if (level == 1) return {1.0, 0.0, 0.0};
    if (level == 2) return {(1.0 + 2.0 * r) / (1.0 + r), -std::pow(r, 1.5) / (1.0 + r), 0.0};
    const double s = r_prev;
    const double den = (1.0 + r) * (1.0 + s) * (1.0 + s + r * s);
    const double q = 1.0 + 2.0 * s + r * s;
    return {
        (1.0 + s) * (1.0 + 2.0 * r + s * (1.0 + 4.0 * r + 3.0 * r * r)) / den,
        -std::pow(r, 1.5) * (q * q - s * (1.0 + s)) / den,
        std::pow(r, 1.5) * std::pow(s, 2.5) * (1.0 + r) * (1.0 + r) / den,
    };
}

/// Scaled kernels at level n of a ratio sequence laid out like TimeGrid::ratios()
/// (ratios[0] = r_2).
inline ScaledCoefficients scaled_coefficients(std::span<const double> ratios, std::size_t n) {
    const double r = n >= 2 ? ratios[n - 2] : 0.0;
    const double r_prev = n >= 3 ? ratios[n - 3] : 0.0;
    return scaled_coefficients(n, r, r_prev);
}

/// B (lower triangular, bandwidth 3), D = B^{-1} via the DOC recursion,
/// Lambda = diag(tau_k) and A = Lambda^{1/2} B Lambda^{1/2}.
/// Row/column k-1 of each matrix corresponds to level k.
struct KernelMatrices {
    Matrix B;
    Matrix D;
    std::vector<double> lambda;
    Matrix A;
};

/// Fills B, Lambda and A. A is formed by scaling B, not from the closed forms,
/// so the two can be checked against each other.
inline KernelMatrices assemble_b(const TimeGrid& grid) {
    const std::size_t n = grid.size();
    KernelMatrices km;
    km.B = Matrix(n, n);
    km.A = Matrix(n, n);
    km.lambda.assign(grid.steps().begin(), grid.steps().end());
    for (std::size_t level = 1; level <= n; ++level) {
        const auto c = bdf_coefficients(grid, level);
        const std::size_t row = level - 1;
        for (std::size_t j = 0; j <= 2 && j <= row; ++j) km.B(row, row - j) = c[j];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = (i >= 2 ? i - 2 : 0); j <= i; ++j)
            km.A(i, j) = std::sqrt(km.lambda[i]) * km.B(i, j) * std::sqrt(km.lambda[j]);
    return km;
}

/// DOC kernels d_{n-k}^{(n)}, returned as the lower-triangular matrix D with
/// D(n-1, k-1) = d_{n-k}^{(n)}. Each row runs the backward recursion
///   d_0^{(n)} = 1 / b_0^{(n)},
///   d_{n-k}^{(n)} = -(1 / b_0^{(k)}) sum_{j=k+1}^{n} d_{n-j}^{(n)} b_{j-k}^{(j)},
/// where only j <= k+2 contributes because b vanishes beyond the band.
inline Matrix doc_kernels(const TimeGrid& grid) {
    const std::size_t n = grid.size();
    std::vector<BdfCoefficients> b(n + 1);
    for (std::size_t level = 1; level <= n; ++level) b[level] = bdf_coefficients(grid, level);

    Matrix d(n, n);
    for (std::size_t row = 1; row <= n; ++row) {
        d(row - 1, row - 1) = 1.0 / b[row].b0;
        for (std::size_t k = row - 1; k >= 1; --k) {
            double sum = 0.0;
            for (std::size_t j = k + 1; j <= row && j <= k + 2; ++j) sum += d(row - 1, j - 1) * b[j][j - k];
            d(row - 1, k - 1) = -sum / b[k].b0;
        }
    }
    return d;
}

/// All four matrices.
inline KernelMatrices kernel_matrices(const TimeGrid& grid) {
    auto km = assemble_b(grid);
    km.D = doc_kernels(grid);
    return km;
}

namespace detail {

template <class Value>
void accumulate_difference(Value& out, double coef, const Value& newer, const Value& older) {
    if constexpr (std::is_arithmetic_v<Value>) {
        out += coef * (newer - older);
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += coef * (newer[i] - older[i]);
    }
}

template <class Value>
Value zero_like(const Value& v) {
    if constexpr (std::is_arithmetic_v<Value>) {
        return Value{0};
    } else {
        Value z = v;
        for (auto& e : z) e = 0;
        return z;
    }
}

}  // namespace detail

/// Discrete time derivative at level n = history.size() - 1:
///   D_3 v^n = sum_{k=max(1,n-2)}^{n} b_{n-k}^{(n)} (v^k - v^{k-1}),
/// with BDF1/BDF2 kernels at n = 1, 2. `history` holds v^0..v^n; Value is a
/// scalar or a field (any sized container of doubles, applied elementwise).
template <class Value>
Value apply_d3(const TimeGrid& grid, std::span<const Value> history) {
    if (history.size() < 2) throw std::invalid_argument("apply_d3 needs at least two history values");
    const std::size_t n = history.size() - 1;
    const auto c = bdf_coefficients(grid, n);
    Value out = detail::zero_like(history[n]);
    for (std::size_t j = 0; j <= 2 && j < n; ++j)
        detail::accumulate_difference(out, c[j], history[n - j], history[n - j - 1]);
    return out;
}

template <class Value>
Value apply_d3(const TimeGrid& grid, const std::vector<Value>& history) {
    return apply_d3(grid, std::span<const Value>(history));
}

}  // namespace bdf3
