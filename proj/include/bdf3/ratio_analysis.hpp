#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bdf3/bdf_kernels.hpp"
#include "bdf3/linalg.hpp"
#include "bdf3/time_grid.hpp"

namespace bdf3 {

/// Constants of the variable-step positivity analysis. Fixed values, never tuned.
struct AnalysisConstants {
    static constexpr double gamma = 1.0 / 200.0;  // shift weight in B - gamma Lambda^{-1}
    static constexpr double kappa_min = 0.25;
    static constexpr double kappa_max = 1.4;
    static constexpr double lambda_min = 1.99;
    static constexpr double lambda_max = 3.99;
    static constexpr double r_s = kRatioBound;  // 1.405
};

/// Leading-minor pivots of a symmetric pentadiagonal matrix.
///
/// p_j = det K_j / det K_{j-1}, so K is positive definite iff every p_j > 0.
/// When both traces stop at the first p_j <= 0, every later entry of p and q
/// is NaN; `computed` counts the levels that were evaluated.
/// For j >= 3, mu/nu hold the envelope terms of the shifted recursion
/// (zero elsewhere and for the unshifted recursion).
struct SylvesterTrace {
    std::vector<double> p;
    std::vector<double> q;
    std::vector<double> mu;
    std::vector<double> nu;
    std::optional<std::size_t> first_negative;  // 1-based j
    std::size_t computed = 0;

    bool positive() const noexcept { return !first_negative.has_value(); }
};

namespace detail {

// Row elimination for K with diagonal a_j, first off-diagonal b_j (j >= 2)
// and second off-diagonal c_j (j >= 3); arrays are 0-based by j-1.
inline SylvesterTrace pentadiagonal_pivots(std::span<const double> a, std::span<const double> b,
                                           std::span<const double> c) {
    const std::size_t n = a.size();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    SylvesterTrace t;
    t.p.assign(n, nan);
    t.q.assign(n, nan);
    t.mu.assign(n, 0.0);
    t.nu.assign(n, 0.0);
    if (n == 0) return t;
    t.q[0] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == 0) {
            t.p[0] = a[0];
        } else if (j == 1) {
            t.q[1] = b[1];
            t.p[1] = a[1] - t.q[1] * t.q[1] / t.p[0];
        } else {
            t.q[j] = b[j] - t.q[j - 1] / t.p[j - 2] * c[j];
            t.p[j] = a[j] - c[j] * c[j] / t.p[j - 2] - t.q[j] * t.q[j] / t.p[j - 1];
        }
        t.computed = j + 1;
        if (!(t.p[j] > 0.0)) {
            t.first_negative = j + 1;
            break;
        }
    }
    return t;
}

}  // namespace detail

/// Pivots of A + A^T for a ratio sequence (ratios[0] = r_2); the sequence
/// defines a grid with ratios.size() + 1 levels. Dimensionless.
inline SylvesterTrace sylvester_trace_scaled(std::span<const double> ratios) {
    const std::size_t n = ratios.size() + 1;
    std::vector<double> diag(n), sub1(n, 0.0), sub2(n, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        const auto a = scaled_coefficients(ratios, j);
        diag[j - 1] = 2.0 * a.a0;
        sub1[j - 1] = a.a1;
        sub2[j - 1] = a.a2;
    }
    return detail::pentadiagonal_pivots(diag, sub1, sub2);
}

inline SylvesterTrace sylvester_trace_a(const TimeGrid& grid) { return sylvester_trace_scaled(grid.ratios()); }

/// r_2..r_n all equal to `ratio`, i.e. the ratio sequence of an n-level
/// geometric grid. The scaled trace never needs the step sizes themselves,
/// so this reaches lengths where tau_1 r^{n-1} would overflow.
inline std::vector<double> constant_ratios(double ratio, std::size_t levels) {
    if (levels == 0) throw std::invalid_argument("constant_ratios needs at least one level");
    return std::vector<double>(levels - 1, ratio);
}

/// Diagonal of B~ + B~^T where B~ = B - gamma Lambda^{-1}, written out as
/// 2 b_0^{(n)} - 2 gamma / tau_n with gamma = 1/200. Units 1/time.
inline double shifted_diagonal(std::size_t level, double tau, double r, double r_prev) {
    if (level == 1) return 1.99 / tau;
    if (level == 2) return (1.99 + 3.99 * r) / (tau * (1.0 + r));
    const double s = r_prev;
    return (1.0 + s) * (1.99 + 3.99 * r + s * (1.99 + 7.98 * r + 5.99 * r * r)) /
           (tau * (1.0 + r) * (1.0 + s) * (1.0 + s + r * s));
}

/// mu_j or nu_j (kappa = kappa_min or kappa_max) for j >= 3.
inline double envelope_term(double kappa, double tau, double r, double r_prev) {
    const double s = r_prev;
    return kappa * r * r * std::pow(s, 4) * (1.0 + r) / (tau * (1.0 + s) * (1.0 + s) * (1.0 + s + r * s));
}

/// Pivots of B~ + B~^T (B~ = B - gamma Lambda^{-1}) with the envelope terms
/// mu_j, nu_j filled in for j >= 3. Units 1/time.
inline SylvesterTrace sylvester_trace_shifted(const TimeGrid& grid) {
    const std::size_t n = grid.size();
    std::vector<double> diag(n), sub1(n, 0.0), sub2(n, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        const double tau = grid.step(j);
        const double r = j >= 2 ? grid.ratio(j) : 0.0;
        const double r_prev = j >= 3 ? grid.ratio(j - 1) : 0.0;
        const auto b = level_coefficients(j, tau, r, r_prev);
        diag[j - 1] = shifted_diagonal(j, tau, r, r_prev);
        sub1[j - 1] = b.b1;
        sub2[j - 1] = b.b2;
    }
    auto trace = detail::pentadiagonal_pivots(diag, sub1, sub2);
    for (std::size_t j = 3; j <= n; ++j) {
        const double tau = grid.step(j), r = grid.ratio(j), r_prev = grid.ratio(j - 1);
        trace.mu[j - 1] = envelope_term(AnalysisConstants::kappa_min, tau, r, r_prev);
        trace.nu[j - 1] = envelope_term(AnalysisConstants::kappa_max, tau, r, r_prev);
    }
    return trace;
}

struct Certification {
    bool certified = false;
    SylvesterTrace trace;
};

/// B - gamma Lambda^{-1} is positive definite iff every shifted pivot is
/// positive; when it is, sum_k w_k sum_j b_{k-j}^{(k)} w_j >= gamma sum_k w_k^2 / tau_k.
inline Certification certify_positive_definite(const TimeGrid& grid) {
    Certification c;
    c.trace = sylvester_trace_shifted(grid);
    c.certified = c.trace.positive();
    return c;
}

/// B - gamma Lambda^{-1} as a dense matrix (for eigenvalue cross-checks).
inline Matrix shifted_kernel_matrix(const TimeGrid& grid) {
    auto km = assemble_b(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) km.B(i, i) -= AnalysisConstants::gamma / km.lambda[i];
    return km.B;
}

/// g(x) = 2 a_2 x^2 + a_1 x + (a_0 - a_2), the symbol a_0 + a_1 cos(phi) + a_2 cos(2 phi)
/// of the BDF3 kernels at constant ratio r, written in x = cos(phi).
inline double generating_function(double r, double x) {
    if (!(r > 0.0)) throw std::invalid_argument("generating_function needs r > 0");
    const auto a = scaled_coefficients(3, r, r);
    return 2.0 * a.a2 * x * x + a.a1 * x + (a.a0 - a.a2);
}

/// The four bivariate functions whose signs drive the pivot envelopes.
/// Arguments are (x, y) = (r_j, r_{j-1}).
///   coupling       Psi(x, y; kappa), bounded in [1, 2.7]
///   offdiag_upper  psi(x, y) with kappa_max, <= 0
///   lower_margin   Phi(x, y) with lambda_min and kappa_min, >= 0
///   upper_margin   phi(x, y) with lambda_max and kappa_max, <= 0
/// The *_scale fields are sums of absolute values of the polynomial terms,
/// used as the magnitude against which cancellation error is judged.
struct EnvelopeFunctions {
    double coupling = 0.0;
    double offdiag_upper = 0.0;
    double lower_margin = 0.0;
    double lower_margin_scale = 0.0;
    double upper_margin = 0.0;
    double upper_margin_scale = 0.0;
};

namespace detail {

struct MarginTerms {
    double value;
    double scale;
};

inline MarginTerms pivot_margin(double x, double y, double lambda, double kappa) {
    const double y1 = 1.0 + y, x1 = 1.0 + x, w = 1.0 + y + x * y;
    const double t1 = (1.99 + 3.99 * x + y * (1.99 + 7.98 * x + 5.99 * x * x)) * x1 * std::pow(y1, 4) * w;
    const double t2 = lambda * x1 * x1 * std::pow(y1, 4) * w * w;
    const double t3 = std::pow(x, 3) * std::pow(y, 5) * std::pow(x1, 4) * y1 * y1 / lambda;
    const double inner = (1.0 + 2.0 * y + 2.0 * x * y) * y1 * y1 + y * y * x1 * x1 * (1.0 + y - kappa * y * y);
    const double t4 = std::pow(x, 3) * inner * inner / lambda;
    return {t1 - t2 - t3 - t4, std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4)};
}

}  // namespace detail

inline EnvelopeFunctions envelope_functions(double x, double y, double kappa) {
    constexpr double rs = AnalysisConstants::r_s;
    if (!(x >= 0.0 && x <= rs && y >= 0.0 && y <= rs))
        throw std::invalid_argument("envelope functions are only bounded on [0, 1.405]^2");
    if (!(kappa >= AnalysisConstants::kappa_min && kappa <= AnalysisConstants::kappa_max))
        throw std::invalid_argument("kappa must lie in [0.25, 1.4]");

    const double x1 = 1.0 + x, y1 = 1.0 + y, w = 1.0 + y + x * y;
    const double q = (1.0 + 2.0 * y + x * y) * (1.0 + 2.0 * y + x * y) - y * y1;

    EnvelopeFunctions f;
    f.coupling = q / (y1 * w) - kappa * std::pow(y, 4) * x1 * x1 / (y1 * y1 * w);
    f.offdiag_upper =
        -x * x * q / (x1 * y1 * w) + AnalysisConstants::kappa_max * x * x * std::pow(y, 4) * x1 / (y1 * y1 * w);
    const auto lower = detail::pivot_margin(x, y, AnalysisConstants::lambda_min, AnalysisConstants::kappa_min);
    const auto upper = detail::pivot_margin(x, y, AnalysisConstants::lambda_max, AnalysisConstants::kappa_max);
    f.lower_margin = lower.value;
    f.lower_margin_scale = lower.scale;
    f.upper_margin = upper.value;
    f.upper_margin_scale = upper.scale;
    return f;
}

/// Extremes of the envelope functions over a square sample of [0, 1.405]^2.
struct LemmaSweep {
    double resolution = 0.0;
    std::size_t points = 0;  // (x, y) samples per kappa
    double coupling_min = std::numeric_limits<double>::infinity();
    double coupling_max = -std::numeric_limits<double>::infinity();
    double offdiag_upper_max = -std::numeric_limits<double>::infinity();
    double lower_margin_min_scaled = std::numeric_limits<double>::infinity();  // min Phi / scale
    double upper_margin_max_scaled = -std::numeric_limits<double>::infinity();  // max phi / scale

    /// 1 <= Psi <= 2.7, psi <= 0, Phi >= 0, phi <= 0 up to the given slack.
    bool holds(double abs_tol = 1e-12, double rel_tol = 1e-9) const {
        return coupling_min >= 1.0 - abs_tol && coupling_max <= 2.7 + abs_tol && offdiag_upper_max <= abs_tol &&
               lower_margin_min_scaled >= -rel_tol && upper_margin_max_scaled <= rel_tol;
    }
};

/// Samples x, y = 0, h, 2h, ... and always includes the corner value 1.405.
/// The coupling function is swept for every kappa in `kappas`; the others do
/// not depend on kappa and are evaluated once per point.
inline LemmaSweep sweep_envelope_functions(double resolution,
                                           std::span<const double> kappas = std::span<const double>()) {
    if (!(resolution > 0.0) || resolution > AnalysisConstants::r_s)
        throw std::invalid_argument("sweep resolution must lie in (0, 1.405]");
    static constexpr double default_kappas[] = {0.25, 0.5, 1.0, 1.4};
    if (kappas.empty()) kappas = default_kappas;

    std::vector<double> axis;
    for (std::size_t i = 0;; ++i) {
        const double v = static_cast<double>(i) * resolution;
        if (v > AnalysisConstants::r_s - 1e-9 * resolution) break;
        axis.push_back(v);
    }
    axis.push_back(AnalysisConstants::r_s);

    LemmaSweep s;
    s.resolution = resolution;
    s.points = axis.size() * axis.size();
    for (double x : axis) {
        for (double y : axis) {
            for (std::size_t k = 0; k < kappas.size(); ++k) {
                const auto f = envelope_functions(x, y, kappas[k]);
                s.coupling_min = std::min(s.coupling_min, f.coupling);
                s.coupling_max = std::max(s.coupling_max, f.coupling);
                if (k > 0) continue;
                s.offdiag_upper_max = std::max(s.offdiag_upper_max, f.offdiag_upper);
                s.lower_margin_min_scaled = std::min(s.lower_margin_min_scaled, f.lower_margin / f.lower_margin_scale);
                s.upper_margin_max_scaled = std::max(s.upper_margin_max_scaled, f.upper_margin / f.upper_margin_scale);
            }
        }
    }
    return s;
}

}  // namespace bdf3
