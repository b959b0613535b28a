#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bdf3/allen_cahn.hpp"
#include "bdf3/time_grid.hpp"

namespace bdf3 {

/// Mesh family of a convergence study.
enum class MeshCase {
    alternating,  // steps a, 2a, a, 2a, ...
    random,       // normalized uniform draws, fresh grid per N
    uniform,
};

inline const char* to_string(MeshCase c) {
    switch (c) {
        case MeshCase::alternating: return "1";
        case MeshCase::random: return "2";
        case MeshCase::uniform: return "uniform";
    }
    return "?";
}

inline MeshCase parse_mesh_case(const std::string& s) {
    if (s == "1" || s == "I") return MeshCase::alternating;
    if (s == "2" || s == "II") return MeshCase::random;
    if (s == "uniform") return MeshCase::uniform;
    throw std::invalid_argument("unknown mesh case '" + s + "' (expected 1, 2 or uniform)");
}

/// Grid of a study row. The random family is seeded with seed + N so that
/// refinements are independent draws rather than nested grids.
inline TimeGrid study_grid(MeshCase c, std::size_t n, double horizon, std::uint64_t seed) {
    switch (c) {
        case MeshCase::alternating: return build_alternating(n, horizon);
        case MeshCase::random: return build_random(n, horizon, seed + n);
        case MeshCase::uniform: return build_uniform(n, horizon);
    }
    throw std::invalid_argument("unknown mesh case");
}

struct ConvergenceRow {
    std::size_t n = 0;
    double error = 0.0;
    std::optional<double> rate;  // absent on the first row
    double max_ratio = 1.0;
    double min_ratio = 1.0;
};

struct ConvergenceReport {
    MeshCase mesh = MeshCase::alternating;
    double eps2 = 0.0;
    std::size_t resolution = 0;
    std::uint64_t seed = 0;
    double horizon = 1.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    NormKind norm = NormKind::quadrature;
    double wall_seconds = 0.0;  // not emitted unless asked for, so outputs stay reproducible
    std::vector<ConvergenceRow> rows;
};

/// log(e_prev / e) / log(n / n_prev).
inline double observed_rate(std::size_t n_prev, double e_prev, std::size_t n, double e) {
    return std::log(e_prev / e) / std::log(static_cast<double>(n) / static_cast<double>(n_prev));
}

/// Least-squares slope of -log(error) against log(N) over all rows.
inline double least_squares_order(const ConvergenceReport& report) {
    const std::size_t m = report.rows.size();
    if (m < 2) throw std::invalid_argument("least-squares order needs at least two rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : report.rows) {
        const double x = std::log(static_cast<double>(row.n));
        const double y = -std::log(row.error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double md = static_cast<double>(m);
    return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

struct ConvergenceOptions {
    MeshCase mesh = MeshCase::alternating;
    std::vector<double> eps2_list{0.16};
    std::vector<std::size_t> n_list{20, 40, 80, 160};
    std::size_t resolution = 20;
    std::uint64_t seed = 0;
    double horizon = 1.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    NormKind norm = NormKind::quadrature;
    unsigned threads = 1;
};

/// Raised when one run of a study fails; names the failing (eps^2, N).
class StudyFailure : public NumericalError {
public:
    StudyFailure(double eps2, std::size_t n, const std::string& what)
        : NumericalError("convergence run eps2=" + std::to_string(eps2) + " N=" + std::to_string(n) +
                         " failed: " + what) {}
};

/// One manufactured-solution run per (eps^2, N), spread over `threads`
/// workers; one report per eps^2 in input order.
inline std::vector<ConvergenceReport> run_convergence(const ConvergenceOptions& opt) {
    for (std::size_t i = 1; i < opt.n_list.size(); ++i)
        if (opt.n_list[i] <= opt.n_list[i - 1]) throw std::invalid_argument("N list must be strictly ascending");
    for (double e : opt.eps2_list)
        if (!(e > 0.0)) throw std::invalid_argument("eps^2 values must be positive");
    std::vector<TimeGrid> grids;
    for (std::size_t n : opt.n_list) grids.push_back(study_grid(opt.mesh, n, opt.horizon, opt.seed));

    struct Job {
        std::size_t report;
        std::size_t row;
    };
    std::vector<Job> jobs;
    std::vector<ConvergenceReport> reports(opt.eps2_list.size());
    for (std::size_t e = 0; e < reports.size(); ++e) {
        auto& r = reports[e];
        r.mesh = opt.mesh;
        r.eps2 = opt.eps2_list[e];
        r.resolution = opt.resolution;
        r.seed = opt.seed;
        r.horizon = opt.horizon;
        r.newton_tol = opt.newton_tol;
        r.newton_max_iter = opt.newton_max_iter;
        r.norm = opt.norm;
        r.rows.resize(opt.n_list.size());
        for (std::size_t k = 0; k < opt.n_list.size(); ++k) jobs.push_back({e, k});
    }

    const auto start = std::chrono::steady_clock::now();
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure) return;
            }
            auto& report = reports[jobs[j].report];
            const std::size_t n = opt.n_list[jobs[j].row];
            try {
                auto grid = grids[jobs[j].row];
                const auto ratio_report = validate_ratios(grid);
                auto config = manufactured_config(std::move(grid), report.eps2, opt.resolution);
                config.newton_tol = opt.newton_tol;
                config.newton_max_iter = opt.newton_max_iter;
                const auto result = run(config, opt.norm);
                auto& row = report.rows[jobs[j].row];
                row.n = n;
                row.error = result.final_error;
                row.max_ratio = ratio_report.max_ratio;
                row.min_ratio = ratio_report.min_ratio;
            } catch (const std::exception& ex) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::make_exception_ptr(StudyFailure(report.eps2, n, ex.what()));
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(jobs.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : reports) {
        r.wall_seconds = wall;
        for (std::size_t k = 1; k < r.rows.size(); ++k)
            r.rows[k].rate = observed_rate(r.rows[k - 1].n, r.rows[k - 1].error, r.rows[k].n, r.rows[k].error);
    }
    return reports;
}

/// CSV with header `N,error,rate,max_r,min_r`; errors in %.4e, rates %.4f
/// (empty on the first row), ratios %.6g.
inline std::string convergence_csv(const ConvergenceReport& report) {
    std::string out = "N,error,rate,max_r,min_r\n";
    char buf[160];
    for (const auto& row : report.rows) {
        char rate[32] = "";
        if (row.rate) std::snprintf(rate, sizeof rate, "%.4f", *row.rate);
        std::snprintf(buf, sizeof buf, "%zu,%.4e,%s,%.6g,%.6g\n", row.n, row.error, rate, row.max_ratio,
                      row.min_ratio);
        out += buf;
    }
    return out;
}

inline nlohmann::json to_json(const ConvergenceReport& report, bool include_timing = false) {
    nlohmann::json meta = {
        {"case", to_string(report.mesh)},
        {"eps2", report.eps2},
        {"M", report.resolution},
        {"seed", report.seed},
        {"T", report.horizon},
        {"newton_tol", report.newton_tol},
        {"newton_max_iter", report.newton_max_iter},
        {"norm", report.norm == NormKind::quadrature ? "clenshaw_curtis" : "rms"},
    };
    if (include_timing) meta["wall_seconds"] = report.wall_seconds;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        rows.push_back({
            {"N", row.n},
            {"error", row.error},
            {"rate", row.rate ? nlohmann::json(*row.rate) : nlohmann::json(nullptr)},
            {"max_r", row.max_ratio},
            {"min_r", row.min_ratio},
        });
    }
    return {{"metadata", meta}, {"rows", rows}};
}

inline std::string convergence_json(const std::vector<ConvergenceReport>& reports, bool include_timing = false) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r, include_timing));
    return arr.dump(2) + "\n";
}

}  // namespace bdf3
