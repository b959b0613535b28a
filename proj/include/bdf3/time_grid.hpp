#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bdf3 {

/// Nonuniform time levels 0 = t_0 < t_1 < ... < t_N = T.
///
/// Indexing follows the usual convention for multistep schemes: steps and
/// ratios are 1-based (tau_k = t_k - t_{k-1} for k = 1..N, r_k = tau_k / tau_{k-1}
/// for k = 2..N) while levels run 0..N. The span accessors expose the raw
/// storage, so steps()[0] is tau_1 and ratios()[0] is r_2.
class TimeGrid {
public:
    /// Builds a grid from its step sizes; the horizon is their sum.
    static TimeGrid from_steps(std::vector<double> steps) {
        double total = 0.0;
        for (double s : steps) total += s;
        return TimeGrid(total, std::move(steps));
    }

    /// Builds a grid whose steps must add up to `horizon` (within 1e-12 relative).
    static TimeGrid from_steps(double horizon, std::vector<double> steps) {
        return TimeGrid(horizon, std::move(steps));
    }

    std::size_t size() const noexcept { return steps_.size(); }
    double horizon() const noexcept { return horizon_; }

    double step(std::size_t k) const {
        if (k < 1 || k > steps_.size()) throw std::out_of_range("step index " + std::to_string(k));
        return steps_[k - 1];
    }

    double ratio(std::size_t k) const {
        if (k < 2 || k > steps_.size()) throw std::out_of_range("ratio index " + std::to_string(k));
        return ratios_[k - 2];
    }

    double time(std::size_t k) const {
        if (k > steps_.size()) throw std::out_of_range("level index " + std::to_string(k));
        return levels_[k];
    }

    std::span<const double> steps() const noexcept { return steps_; }
    std::span<const double> ratios() const noexcept { return ratios_; }
    std::span<const double> levels() const noexcept { return levels_; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    TimeGrid(double horizon, std::vector<double> steps) : horizon_(horizon), steps_(std::move(steps)) {
        if (steps_.empty()) throw std::invalid_argument("time grid needs at least one step");
        if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
            throw std::invalid_argument("time horizon must be positive and finite");
        levels_.reserve(steps_.size() + 1);
        levels_.push_back(0.0);
        double t = 0.0;
        for (double s : steps_) {
            if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("time steps must be positive and finite");
            t += s;
            levels_.push_back(t);
        }
        if (std::abs(t - horizon_) > 1e-12 * horizon_)
            throw std::invalid_argument("time steps do not add up to the horizon");
        ratios_.reserve(steps_.size() > 0 ? steps_.size() - 1 : 0);
        for (std::size_t k = 1; k < steps_.size(); ++k) ratios_.push_back(steps_[k] / steps_[k - 1]);
    }

    double horizon_;
    std::vector<double> steps_;
    std::vector<double> ratios_;
    std::vector<double> levels_;
};

/// Ratio threshold of the variable-step positivity result.
inline constexpr double kRatioBound = 1.405;

struct RatioReport {
    double threshold = kRatioBound;
    // A single-step grid has no ratios; both extremes are reported as 1.
    double max_ratio = 1.0;
    double min_ratio = 1.0;
    std::vector<std::pair<std::size_t, double>> violations;  // (k, r_k) with r_k > threshold
};

inline TimeGrid build_uniform(std::size_t n, double horizon) {
    if (n == 0) throw std::invalid_argument("uniform grid needs N >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("uniform grid needs T > 0");
    return TimeGrid::from_steps(horizon, std::vector<double>(n, horizon / static_cast<double>(n)));
}

/// Steps a, 2a, a, 2a, ... so that r_{2k} = 2 and r_{2k+1} = 1/2; a = 2T/(3N).
inline TimeGrid build_alternating(std::size_t n, double horizon) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("alternating grid needs an even N >= 2");
    if (!(horizon > 0.0)) throw std::invalid_argument("alternating grid needs T > 0");
    const double a = 2.0 * horizon / (3.0 * static_cast<double>(n));
    std::vector<double> steps(n);
    for (std::size_t k = 0; k < n; ++k) steps[k] = (k % 2 == 0) ? a : 2.0 * a;
    return TimeGrid::from_steps(horizon, std::move(steps));
}

/// Uniform draw on the open interval (0, 1) from the top 53 bits of a
/// mt19937_64 word. Unlike std::uniform_real_distribution this mapping is
/// fixed, so grids are reproducible across standard libraries.
inline double open_unit_draw(std::mt19937_64& engine) {
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

/// tau_k = T sigma_k / S with sigma_k i.i.d. uniform on (0,1), S = sum sigma_k.
/// The generator is std::mt19937_64 seeded with `seed`.
inline TimeGrid build_random(std::size_t n, double horizon, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("random grid needs N >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("random grid needs T > 0");
    std::mt19937_64 engine(seed);
    std::vector<double> sigma(n);
    double sum = 0.0;
    for (auto& s : sigma) {
        s = open_unit_draw(engine);
        sum += s;
    }
    if (n == 1) return TimeGrid::from_steps(horizon, {horizon});
    for (auto& s : sigma) s = horizon * s / sum;
    return TimeGrid::from_steps(horizon, std::move(sigma));
}

/// Constant ratio grid: tau_k = tau_1 r^{k-1}, scaled to end at T.
inline TimeGrid build_geometric(std::size_t n, double horizon, double ratio) {
    if (n == 0) throw std::invalid_argument("geometric grid needs N >= 1");
    if (!(ratio > 0.0)) throw std::invalid_argument("geometric grid needs a positive ratio");
    std::vector<double> steps(n);
    double tau = 1.0, sum = 0.0;
    for (auto& s : steps) {
        s = tau;
        sum += tau;
        tau *= ratio;
    }
    for (auto& s : steps) s = horizon * s / sum;
    return TimeGrid::from_steps(horizon, std::move(steps));
}

/// Random walk in the step size: r_k uniform on [r_low, r_high], with every
/// step capped at tau_max (the cap can only lower a ratio). Used for the
/// energy-dissipation runs, which need both r_k <= 1.405 and tau_k <= 2 gamma.
inline TimeGrid build_bounded_random(std::size_t n, double tau_max, double r_low, double r_high,
                                     std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("bounded random grid needs N >= 1");
    if (!(tau_max > 0.0) || !(r_low > 0.0) || !(r_high >= r_low))
        throw std::invalid_argument("bounded random grid needs tau_max > 0 and 0 < r_low <= r_high");
    std::mt19937_64 engine(seed);
    std::vector<double> steps(n);
    steps[0] = tau_max * (0.5 + 0.5 * open_unit_draw(engine));
    for (std::size_t k = 1; k < n; ++k) {
        const double r = r_low + (r_high - r_low) * open_unit_draw(engine);
        steps[k] = std::min(steps[k - 1] * r, tau_max);
    }
    return TimeGrid::from_steps(std::move(steps));
}

/// Lists every r_k above `threshold`. Advisory: grids that violate it are still usable.
inline RatioReport validate_ratios(const TimeGrid& grid, double threshold = kRatioBound) {
    RatioReport report;
    report.threshold = threshold;
    const auto ratios = grid.ratios();
    if (ratios.empty()) return report;
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    report.min_ratio = *lo;
    report.max_ratio = *hi;
    for (std::size_t i = 0; i < ratios.size(); ++i)
        if (ratios[i] > threshold) report.violations.emplace_back(i + 2, ratios[i]);
    return report;
}

}  // namespace bdf3
