#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdf3/errors.hpp"

namespace bdf3 {

/// Dense row-major matrix of doubles. Kernel matrices, spectral operators and
/// Newton Jacobians are all small enough (a few thousand rows at most) that a
/// plain contiguous buffer is the right representation.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
        }
    }
    return c;
}

inline Matrix operator+(Matrix a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("matrix sum: shapes differ");
    auto ad = a.data();
    const auto bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i) ad[i] += bd[i];
    return a;
}

inline Matrix operator*(double s, Matrix a) {
    for (double& v : a.data()) v *= s;
    return a;
}

inline std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector product: size mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

/// Largest absolute entry.
inline double max_abs(const Matrix& m) {
    double v = 0.0;
    for (double x : m.data()) v = std::max(v, std::abs(x));
    return v;
}

/// Kronecker product a (x) b.
inline Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q) k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

/// LU factorization with partial pivoting (Eigen's blocked PartialPivLU).
class LuFactorization {
    using EigenMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

public:
    explicit LuFactorization(const Matrix& a) {
        if (!a.square()) throw std::invalid_argument("LU factorization needs a square matrix");
        n_ = a.rows();
        EigenMatrix m = Eigen::Map<const EigenMatrix>(a.data().data(), static_cast<Eigen::Index>(n_),
                                                      static_cast<Eigen::Index>(n_));
        lu_.compute(m);
        const auto& u = lu_.matrixLU();
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            const double pivot = u(i, i);
            if (pivot == 0.0 || !std::isfinite(pivot))
                throw SingularMatrix("LU factorization: zero pivot in row " + std::to_string(i));
        }
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        if (rhs.size() != n_) throw std::invalid_argument("LU solve: size mismatch");
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n_));
        Eigen::VectorXd x = lu_.solve(b);
        std::vector<double> out(x.data(), x.data() + x.size());
        for (double v : out)
            if (!std::isfinite(v)) throw SingularMatrix("LU solve produced a non-finite value");
        return out;
    }

    Matrix inverse() const {
        Matrix inv(n_, n_);
        std::vector<double> e(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            e[j] = 1.0;
            const auto col = solve(e);
            for (std::size_t i = 0; i < n_; ++i) inv(i, j) = col[i];
            e[j] = 0.0;
        }
        return inv;
    }

private:
    std::size_t n_ = 0;
    Eigen::PartialPivLU<EigenMatrix> lu_;
};

inline Matrix inverse(const Matrix& a) { return LuFactorization(a).inverse(); }

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Only the upper triangle is read.
inline std::vector<double> symmetric_eigenvalues(const Matrix& s, int max_sweeps = 100) {
    if (!s.square()) throw std::invalid_argument("symmetric eigenvalues need a square matrix");
    const std::size_t n = s.rows();
    Matrix a = s;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j);

    auto off_norm2 = [&] {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        return off;
    };
    double total = 0.0;
    for (double v : a.data()) total += v * v;

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_norm2() <= 1e-30 * total) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
            }
        }
    }
    if (sweep == max_sweeps && off_norm2() > 1e-30 * total)
        throw ConvergenceFailure("Jacobi eigenvalue sweeps did not converge");

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

/// Smallest eigenvalue of the symmetric part (M + M^T)/2. A real matrix is
/// positive definite exactly when this is positive.
inline double min_symmetric_eigenvalue(const Matrix& m) {
    if (!m.square()) throw std::invalid_argument("min_symmetric_eigenvalue needs a square matrix");
    if (m.rows() == 0) throw std::invalid_argument("min_symmetric_eigenvalue needs a non-empty matrix");
    Matrix h(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) h(i, j) = 0.5 * (m(i, j) + m(j, i));
    return symmetric_eigenvalues(h).front();
}

/// |M| = sqrt(rho(M^T M)), by power iteration on M^T M.
/// Converged when successive Rayleigh quotients agree to `rel_tol`.
inline double spectral_norm(const Matrix& m, double rel_tol = 1e-10, int max_iter = 10000) {
    if (!m.square()) throw std::invalid_argument("spectral_norm needs a square matrix");
    const std::size_t n = m.rows();
    if (n == 0 || max_abs(m) == 0.0) return 0.0;

    const Matrix mt = m.transpose();
    // A fixed, non-symmetric start vector keeps the result deterministic and
    // avoids being orthogonal to the dominant singular vector for structured inputs.
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + 3.0 * static_cast<double>(i));
    auto normalize = [](std::vector<double>& x) {
        double s = 0.0;
        for (double e : x) s += e * e;
        s = std::sqrt(s);
        for (double& e : x) e /= s;
        return s;
    };
    normalize(v);

    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        auto w = mt * std::span<const double>(m * std::span<const double>(v));
        double rq = 0.0;
        for (std::size_t i = 0; i < n; ++i) rq += v[i] * w[i];
        const double wn = normalize(w);
        if (wn == 0.0) return 0.0;
        v = std::move(w);
        if (it > 0 && std::abs(rq - lambda) <= rel_tol * std::abs(rq)) return std::sqrt(rq);
        lambda = rq;
    }
    throw ConvergenceFailure("spectral_norm: power iteration did not converge in " + std::to_string(max_iter) +
                             " iterations");
}

}  // namespace bdf3
