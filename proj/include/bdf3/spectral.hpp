#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdf3/linalg.hpp"

namespace bdf3 {

enum class OperatorKind { chebyshev_dirichlet, fourier_periodic };

inline const char* to_string(OperatorKind kind) {
    return kind == OperatorKind::chebyshev_dirichlet ? "chebyshev_dirichlet" : "fourier_periodic";
}

/// Tensor-product collocation operator on a square domain.
///
/// Unknowns are ordered row-major over (y, x): unknown i sits at
/// (nodes_x[i % nx], nodes_y[i / nx]). For the Chebyshev operator the
/// boundary nodes are eliminated (homogeneous Dirichlet), so only the
/// (M-1)^2 interior nodes are unknowns; the Fourier operator keeps all M^2.
struct SpectralOperator {
    OperatorKind kind = OperatorKind::chebyshev_dirichlet;
    std::size_t resolution = 0;  // M
    std::vector<double> nodes_x;
    std::vector<double> nodes_y;
    Matrix L;   // Laplacian, 1/length^2
    Matrix Gx;  // d/dx, 1/length
    Matrix Gy;  // d/dy
    std::vector<double> weights;  // quadrature weights of the unknowns
    double area = 0.0;            // |Omega|

    std::size_t unknowns() const noexcept { return nodes_x.size() * nodes_y.size(); }
    double x_of(std::size_t i) const { return nodes_x[i % nodes_x.size()]; }
    double y_of(std::size_t i) const { return nodes_y[i / nodes_x.size()]; }
};

/// Solution samples at one time level.
struct FieldState {
    std::vector<double> values;
    double time = 0.0;
};

/// Chebyshev-Gauss-Lobatto nodes x_j = cos(j pi / M), j = 0..M, evaluated
/// through the sine form so the set is exactly antisymmetric.
inline std::vector<double> chebyshev_nodes(std::size_t m) {
    std::vector<double> x(m + 1);
    const double md = static_cast<double>(m);
    for (std::size_t j = 0; j <= m; ++j)
        x[j] = std::sin(std::numbers::pi * (md - 2.0 * static_cast<double>(j)) / (2.0 * md));
    return x;
}

/// (M+1)x(M+1) Chebyshev collocation first-derivative matrix.
inline Matrix chebyshev_differentiation(std::size_t m) {
    if (m < 1) throw std::invalid_argument("Chebyshev differentiation needs M >= 1");
    const auto x = chebyshev_nodes(m);
    const double md = static_cast<double>(m);
    Matrix d(m + 1, m + 1);
    auto c = [m](std::size_t j) { return (j == 0 || j == m) ? 2.0 : 1.0; };
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = 0; j <= m; ++j) {
            if (i == j) continue;
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            // x_i - x_j = 2 sin((i+j) pi / 2M) sin((j-i) pi / 2M), free of cancellation.
            const double diff = 2.0 * std::sin(static_cast<double>(i + j) * std::numbers::pi / (2.0 * md)) *
                                std::sin((static_cast<double>(j) - static_cast<double>(i)) * std::numbers::pi /
                                         (2.0 * md));
            d(i, j) = c(i) / c(j) * sign / diff;
        }
    }
    d(0, 0) = (2.0 * md * md + 1.0) / 6.0;
    d(m, m) = -(2.0 * md * md + 1.0) / 6.0;
    for (std::size_t j = 1; j < m; ++j) {
        const double s = std::sin(static_cast<double>(j) * std::numbers::pi / md);
        d(j, j) = -x[j] / (2.0 * s * s);
    }
    return d;
}

/// Clenshaw-Curtis weights on the M+1 Chebyshev-Gauss-Lobatto nodes of [-1, 1].
inline std::vector<double> clenshaw_curtis_weights(std::size_t m) {
    if (m < 1) throw std::invalid_argument("Clenshaw-Curtis weights need M >= 1");
    const double md = static_cast<double>(m);
    std::vector<double> w(m + 1, 0.0);
    const double end = (m % 2 == 0) ? 1.0 / (md * md - 1.0) : 1.0 / (md * md);
    w[0] = w[m] = end;
    for (std::size_t i = 1; i < m; ++i) {
        const double theta = std::numbers::pi * static_cast<double>(i) / md;
        double v = 1.0;
        if (m % 2 == 0) {
            for (std::size_t k = 1; k < m / 2; ++k) {
                const double kd = static_cast<double>(k);
                v -= 2.0 * std::cos(2.0 * kd * theta) / (4.0 * kd * kd - 1.0);
            }
            v -= std::cos(md * theta) / (md * md - 1.0);
        } else {
            for (std::size_t k = 1; k <= (m - 1) / 2; ++k) {
                const double kd = static_cast<double>(k);
                v -= 2.0 * std::cos(2.0 * kd * theta) / (4.0 * kd * kd - 1.0);
            }
        }
        w[i] = 2.0 * v / md;
    }
    return w;
}

namespace detail {

inline Matrix interior_block(const Matrix& full) {
    const std::size_t n = full.rows() - 2;
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = full(i + 1, j + 1);
    return b;
}

inline void assemble_tensor(SpectralOperator& op, const Matrix& d1, const Matrix& d2) {
    const auto eye = Matrix::identity(d1.rows());
    op.L = kronecker(eye, d2) + kronecker(d2, eye);
    op.Gx = kronecker(eye, d1);
    op.Gy = kronecker(d1, eye);
}

}  // namespace detail

/// Chebyshev collocation on (-1, 1)^2 with homogeneous Dirichlet data.
/// Second derivatives are D*D restricted to interior rows and columns; the
/// quadrature weights are the tensor Clenshaw-Curtis weights of the interior nodes.
inline SpectralOperator chebyshev_operator(std::size_t m) {
    if (m < 2) throw std::invalid_argument("Chebyshev operator needs M >= 2");
    const auto x = chebyshev_nodes(m);
    const auto d = chebyshev_differentiation(m);
    const auto w = clenshaw_curtis_weights(m);

    SpectralOperator op;
    op.kind = OperatorKind::chebyshev_dirichlet;
    op.resolution = m;
    op.nodes_x.assign(x.begin() + 1, x.end() - 1);
    op.nodes_y = op.nodes_x;
    detail::assemble_tensor(op, detail::interior_block(d), detail::interior_block(d * d));
    const std::size_t n1 = m - 1;
    op.weights.resize(n1 * n1);
    for (std::size_t iy = 0; iy < n1; ++iy)
        for (std::size_t ix = 0; ix < n1; ++ix) op.weights[iy * n1 + ix] = w[iy + 1] * w[ix + 1];
    op.area = 4.0;
    return op;
}

/// Fourier collocation on the periodic square (0, 2 pi)^2 with M equispaced
/// nodes per direction (M even).
inline SpectralOperator fourier_operator(std::size_t m) {
    if (m < 4 || m % 2 != 0) throw std::invalid_argument("Fourier operator needs an even M >= 4");
    const double h = 2.0 * std::numbers::pi / static_cast<double>(m);
    Matrix d1(m, m), d2(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) {
                d2(i, j) = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
                continue;
            }
            const double k = static_cast<double>(i) - static_cast<double>(j);
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            const double half = k * h / 2.0;
            d1(i, j) = 0.5 * sign / std::tan(half);
            d2(i, j) = -0.5 * sign / (std::sin(half) * std::sin(half));
        }
    }
    SpectralOperator op;
    op.kind = OperatorKind::fourier_periodic;
    op.resolution = m;
    op.nodes_x.resize(m);
    for (std::size_t j = 0; j < m; ++j) op.nodes_x[j] = h * static_cast<double>(j);
    op.nodes_y = op.nodes_x;
    detail::assemble_tensor(op, d1, d2);
    op.weights.assign(m * m, h * h);
    op.area = 4.0 * std::numbers::pi * std::numbers::pi;
    return op;
}

/// Samples f(x, y) at the unknowns of `op`.
template <class F>
std::vector<double> sample(const SpectralOperator& op, F&& f) {
    std::vector<double> v(op.unknowns());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(op.x_of(i), op.y_of(i));
    return v;
}

enum class NormKind {
    quadrature,  // sqrt(sum w_i f_i^2)
    rms,         // sqrt(mean f_i^2), unweighted
};

inline double l2_norm(const SpectralOperator& op, std::span<const double> f, NormKind kind = NormKind::quadrature) {
    if (f.size() != op.unknowns())
        throw std::invalid_argument("l2_norm: field has " + std::to_string(f.size()) + " values, operator has " +
                                    std::to_string(op.unknowns()) + " unknowns");
    double s = 0.0;
    if (kind == NormKind::quadrature) {
        for (std::size_t i = 0; i < f.size(); ++i) s += op.weights[i] * f[i] * f[i];
        return std::sqrt(s);
    }
    for (double v : f) s += v * v;
    return f.empty() ? 0.0 : std::sqrt(s / static_cast<double>(f.size()));
}

inline double l2_norm(const SpectralOperator& op, const FieldState& f, NormKind kind = NormKind::quadrature) {
    return l2_norm(op, std::span<const double>(f.values), kind);
}

/// ||grad f|| in the discrete L^2 norm, from the operator's gradient matrices.
inline double gradient_norm(const SpectralOperator& op, std::span<const double> f) {
    if (f.size() != op.unknowns()) throw std::invalid_argument("gradient_norm: shape mismatch");
    const auto gx = op.Gx * f;
    const auto gy = op.Gy * f;
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += op.weights[i] * (gx[i] * gx[i] + gy[i] * gy[i]);
    return std::sqrt(s);
}

/// Discrete Ginzburg-Landau energy E = (eps^2/2)||grad u||^2 + (1/4)||u^2 - 1||^2.
inline double energy(const SpectralOperator& op, std::span<const double> u, double eps2) {
    if (u.size() != op.unknowns()) throw std::invalid_argument("energy: shape mismatch");
    if (!(eps2 > 0.0)) throw std::invalid_argument("energy: eps^2 must be positive");
    const double g = gradient_norm(op, u);
    double bulk = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double p = u[i] * u[i] - 1.0;
        bulk += op.weights[i] * p * p;
    }
    return 0.5 * eps2 * g * g + 0.25 * bulk;
}

inline double energy(const SpectralOperator& op, const FieldState& f, double eps2) {
    return energy(op, std::span<const double>(f.values), eps2);
}

}  // namespace bdf3
