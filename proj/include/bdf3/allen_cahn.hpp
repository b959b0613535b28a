#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdf3/bdf_kernels.hpp"
#include "bdf3/errors.hpp"
#include "bdf3/linalg.hpp"
#include "bdf3/ratio_analysis.hpp"
#include "bdf3/spectral.hpp"
#include "bdf3/time_grid.hpp"

namespace bdf3 {

// Manufactured solution u = (t^4 + 1)(1 - x^2)(1 - y^2) on (-1, 1)^2.

inline double exact_solution(double x, double y, double t) {
    return (t * t * t * t + 1.0) * (1.0 - x * x) * (1.0 - y * y);
}

/// g = u_t - eps^2 Lap u + u^3 - u for the manufactured solution.
inline double forcing(double x, double y, double t, double eps2) {
    const double shape = (1.0 - x * x) * (1.0 - y * y);
    const double amp = t * t * t * t + 1.0;
    const double u = amp * shape;
    const double ut = 4.0 * t * t * t * shape;
    const double lap = -2.0 * amp * ((1.0 - y * y) + (1.0 - x * x));
    return ut - eps2 * lap + u * u * u - u;
}

enum class Forcing { none, manufactured };

struct SolverConfig {
    double eps2 = 0.16;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    TimeGrid grid;
    std::shared_ptr<const SpectralOperator> op;
    Forcing forcing = Forcing::none;
    std::vector<double> initial;  // u^0 at the operator's unknowns

    void validate() const {
        if (!(eps2 > 0.0)) throw std::invalid_argument("eps^2 must be positive");
        if (!(newton_tol > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
        if (newton_max_iter < 1) throw std::invalid_argument("Newton iteration cap must be >= 1");
        if (!op) throw std::invalid_argument("solver needs a spatial operator");
        if (initial.size() != op->unknowns()) throw std::invalid_argument("initial data does not match the operator");
        if (forcing == Forcing::manufactured && op->kind != OperatorKind::chebyshev_dirichlet)
            throw std::invalid_argument("the manufactured solution lives on the Chebyshev/Dirichlet operator");
    }
};

struct StepDiagnostics {
    std::size_t level = 0;
    int newton_iterations = 0;
    double final_residual = 0.0;
    bool solvability_ok = false;
    bool energy_condition_ok = false;
    double energy_value = 0.0;
};

/// tau_n bound under which the level-n nonlinear system has a unique solution
/// (equivalently b_0^{(n)} > 1). Passing r_prev = 0 gives the BDF2 start-up
/// bound and r = r_prev = 0 the BDF1 one.
inline double solvability_bound(double r, double r_prev) {
    const double s = r_prev;
    return (1.0 + 2.0 * r + s * (1.0 + 4.0 * r + 3.0 * r * r)) / ((1.0 + r) * (1.0 + s + r * s));
}

inline double check_positive(double v, const char* what) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " must be non-negative");
    return v;
}

inline bool check_solvability(double tau, double r, double r_prev) {
    if (!(tau > 0.0)) throw std::invalid_argument("step size must be positive");
    check_positive(r, "r_n");
    check_positive(r_prev, "r_{n-1}");
    return tau < solvability_bound(r, r_prev);
}

/// Step restriction of the discrete energy law: tau_n <= min(solvability bound, 2 gamma).
inline bool check_energy_condition(double tau, double r, double r_prev) {
    if (!(tau > 0.0)) throw std::invalid_argument("step size must be positive");
    check_positive(r, "r_n");
    check_positive(r_prev, "r_{n-1}");
    return tau <= std::min(solvability_bound(r, r_prev), 2.0 * AnalysisConstants::gamma);
}

/// Uniform bound on ||u^n|| + ||grad u^n|| implied by E(u^n) <= E(u^0).
inline double solution_bound(double initial_energy, double eps2, double area) {
    return std::sqrt(4.0 * initial_energy / eps2 + (2.0 + eps2) * area);
}

struct StepResult {
    FieldState state;
    StepDiagnostics diagnostics;
};

/// Level-by-level solver. Holds -eps^2 L and the manufactured-solution
/// shape factors so repeated steps do not rebuild them.
class AllenCahnStepper {
public:
    explicit AllenCahnStepper(const SolverConfig& config) : config_(config) {
        config_.validate();
        const auto& op = *config_.op;
        stiffness_ = -config_.eps2 * op.L;
        if (config_.forcing == Forcing::manufactured) {
            shape_ = sample(op, [](double x, double y) { return (1.0 - x * x) * (1.0 - y * y); });
            lap_shape_ = sample(op, [](double x, double y) { return -2.0 * ((1.0 - y * y) + (1.0 - x * x)); });
        }
    }

    const SolverConfig& config() const noexcept { return config_; }

    /// Forcing samples g(., t) (zero without forcing).
    std::vector<double> forcing_at(double t) const {
        std::vector<double> g(config_.op->unknowns(), 0.0);
        if (config_.forcing != Forcing::manufactured) return g;
        const double amp = t * t * t * t + 1.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double u = amp * shape_[i];
            g[i] = 4.0 * t * t * t * shape_[i] - config_.eps2 * amp * lap_shape_[i] + u * u * u - u;
        }
        return g;
    }

    /// Solves level n given u^0..u^{n-1} in `history`.
    ///
    /// Residual form: b0 (u - u^{n-1}) + b1 grad u^{n-1} + b2 grad u^{n-2}
    ///                - eps^2 L u + u^3 - u - g^n.
    /// Full Newton with the Jacobian diag(b0 + 3u^2 - 1) - eps^2 L rebuilt each
    /// iteration, starting from u^{n-1}; converged when max |residual| <= tol.
    StepResult step(std::span<const std::vector<double>> history, std::size_t n) const {
        const auto& grid = config_.grid;
        if (n < 1 || n > grid.size()) throw std::out_of_range("step level out of range");
        if (history.size() < n) throw std::invalid_argument("step needs levels 0..n-1 in the history");
        const std::size_t size = config_.op->unknowns();
        const auto coef = bdf_coefficients(grid, n);
        const auto& prev = history[n - 1];
        if (prev.size() != size) throw std::invalid_argument("history field does not match the operator");

        std::vector<double> memory(size, 0.0);
        for (std::size_t j = 1; j <= 2 && j < n; ++j) {
            const auto& newer = history[n - j];
            const auto& older = history[n - j - 1];
            for (std::size_t i = 0; i < size; ++i) memory[i] += coef[j] * (newer[i] - older[i]);
        }
        const auto g = forcing_at(grid.time(n));

        std::vector<double> u = prev;
        auto residual = [&](std::vector<double>& r) {
            r = stiffness_ * std::span<const double>(u);
            double worst = 0.0;
            for (std::size_t i = 0; i < size; ++i) {
                r[i] += coef.b0 * (u[i] - prev[i]) + memory[i] + u[i] * u[i] * u[i] - u[i] - g[i];
                worst = std::max(worst, std::abs(r[i]));
            }
            return worst;
        };

        std::vector<double> r;
        double res = residual(r);
        int iterations = 0;
        while (!(res <= config_.newton_tol)) {
            if (iterations >= config_.newton_max_iter || !std::isfinite(res))
                throw NewtonDivergence(n, iterations, res);
            Matrix jac = stiffness_;
            for (std::size_t i = 0; i < size; ++i) jac(i, i) += coef.b0 + 3.0 * u[i] * u[i] - 1.0;
            const auto delta = LuFactorization(jac).solve(r);
            for (std::size_t i = 0; i < size; ++i) u[i] -= delta[i];
            ++iterations;
            res = residual(r);
        }

        StepResult out;
        out.state = {std::move(u), grid.time(n)};
        const double rn = n >= 2 ? grid.ratio(n) : 0.0;
        const double rp = n >= 3 ? grid.ratio(n - 1) : 0.0;
        out.diagnostics = {
            .level = n,
            .newton_iterations = iterations,
            .final_residual = res,
            .solvability_ok = check_solvability(grid.step(n), rn, rp),
            .energy_condition_ok = check_energy_condition(grid.step(n), rn, rp),
            .energy_value = energy(*config_.op, out.state.values, config_.eps2),
        };
        return out;
    }

private:
    SolverConfig config_;
    Matrix stiffness_;
    std::vector<double> shape_;
    std::vector<double> lap_shape_;
};

inline StepResult step(const SolverConfig& config, std::span<const std::vector<double>> history, std::size_t n) {
    return AllenCahnStepper(config).step(history, n);
}

struct RunResult {
    std::vector<FieldState> trajectory;        // levels 0..N
    std::vector<StepDiagnostics> diagnostics;  // levels 1..N
    std::vector<double> energies;              // E(u^n), n = 0..N
    std::vector<double> errors;                // manufactured mode: ||u(t_n) - u^n||, n = 0..N
    double final_error = 0.0;
};

/// Integrates levels 1..N. Step failures propagate as NewtonDivergence / SingularMatrix.
inline RunResult run(const SolverConfig& config, NormKind norm = NormKind::quadrature) {
    const AllenCahnStepper stepper(config);
    const auto& op = *config.op;
    const auto& grid = config.grid;

    RunResult result;
    std::vector<std::vector<double>> history;
    history.reserve(grid.size() + 1);
    history.push_back(config.initial);
    result.trajectory.push_back({config.initial, 0.0});
    result.energies.push_back(energy(op, std::span<const double>(config.initial), config.eps2));

    auto record_error = [&](const std::vector<double>& u, double t) {
        if (config.forcing != Forcing::manufactured) return;
        auto e = sample(op, [t](double x, double y) { return exact_solution(x, y, t); });
        for (std::size_t i = 0; i < e.size(); ++i) e[i] -= u[i];
        result.errors.push_back(l2_norm(op, e, norm));
    };
    record_error(config.initial, 0.0);

    for (std::size_t n = 1; n <= grid.size(); ++n) {
        auto s = stepper.step(history, n);
        history.push_back(s.state.values);
        result.energies.push_back(s.diagnostics.energy_value);
        record_error(s.state.values, s.state.time);
        result.diagnostics.push_back(s.diagnostics);
        result.trajectory.push_back(std::move(s.state));
    }
    if (!result.errors.empty()) result.final_error = result.errors.back();
    return result;
}

/// Manufactured-solution setup on the M-point Chebyshev operator, u^0 = u(., 0).
inline SolverConfig manufactured_config(TimeGrid grid, double eps2, std::size_t m) {
    auto op = std::make_shared<const SpectralOperator>(chebyshev_operator(m));
    auto u0 = sample(*op, [](double x, double y) { return exact_solution(x, y, 0.0); });
    return SolverConfig{.eps2 = eps2, .grid = std::move(grid), .op = std::move(op),
                        .forcing = Forcing::manufactured, .initial = std::move(u0)};
}

/// Unforced periodic setup, u^0 = amplitude sin(x) sin(y) on (0, 2 pi)^2.
inline SolverConfig energy_config(TimeGrid grid, double eps2, std::size_t m, double amplitude = 0.05) {
    auto op = std::make_shared<const SpectralOperator>(fourier_operator(m));
    auto u0 = sample(*op, [amplitude](double x, double y) { return amplitude * std::sin(x) * std::sin(y); });
    return SolverConfig{.eps2 = eps2, .grid = std::move(grid), .op = std::move(op),
                        .forcing = Forcing::none, .initial = std::move(u0)};
}

struct ConsistencyReport {
    std::vector<double> eta;  // eta^j = D_3 v(t_j) - v'(t_j), j = 1..N (stored at j-1)
    double max_bdf3 = 0.0;    // max_{j >= 3} |eta^j|
};

/// Consistency error of the discrete derivative on exact samples of v.
inline ConsistencyReport consistency_probe(const TimeGrid& grid, const std::function<double(double)>& v,
                                           const std::function<double(double)>& dv) {
    std::vector<double> samples(grid.size() + 1);
    for (std::size_t k = 0; k <= grid.size(); ++k) samples[k] = v(grid.time(k));
    ConsistencyReport rep;
    rep.eta.resize(grid.size());
    for (std::size_t j = 1; j <= grid.size(); ++j) {
        const std::span<const double> hist(samples.data(), j + 1);
        rep.eta[j - 1] = apply_d3(grid, hist) - dv(grid.time(j));
        if (j >= 3) rep.max_bdf3 = std::max(rep.max_bdf3, std::abs(rep.eta[j - 1]));
    }
    return rep;
}

/// Fixed smooth perturbation shape compatible with the operator's boundary conditions.
inline std::vector<double> smooth_perturbation(const SpectralOperator& op) {
    if (op.kind == OperatorKind::fourier_periodic)
        return sample(op, [](double x, double y) { return 0.5 + std::sin(2.0 * x) * std::cos(y); });
    return sample(op, [](double x, double y) { return (1.0 - x * x) * (1.0 - y * y) * std::cos(x + 0.5 * y); });
}

struct StabilityReport {
    double initial_difference = 0.0;  // ||eps^0||
    double final_difference = 0.0;    // ||eps^N||
    double ratio = 1.0;               // ||eps^N|| / ||eps^0||, 1 when delta = 0
};

/// Runs u^0 and u^0 + delta * smooth_perturbation and compares the results at T.
inline StabilityReport stability_probe(const SolverConfig& config, double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("perturbation size must be non-negative");
    StabilityReport rep;
    if (delta == 0.0) return rep;
    SolverConfig perturbed = config;
    const auto shape = smooth_perturbation(*config.op);
    for (std::size_t i = 0; i < shape.size(); ++i) perturbed.initial[i] += delta * shape[i];

    const auto a = run(config);
    const auto b = run(perturbed);
    std::vector<double> d0(shape.size()), dn(shape.size());
    for (std::size_t i = 0; i < shape.size(); ++i) {
        d0[i] = perturbed.initial[i] - config.initial[i];
        dn[i] = b.trajectory.back().values[i] - a.trajectory.back().values[i];
    }
    rep.initial_difference = l2_norm(*config.op, d0);
    rep.final_difference = l2_norm(*config.op, dn);
    rep.ratio = rep.final_difference / rep.initial_difference;
    return rep;
}

}  // namespace bdf3
