#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bdf3/allen_cahn.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("manufactured solution and forcing", "[allen_cahn]") {
    REQUIRE(bdf3::exact_solution(0, 0, 1) == 2.0);
    REQUIRE(bdf3::exact_solution(1, 0.3, 0.7) == 0.0);
    REQUIRE(bdf3::exact_solution(-0.2, -1, 0.7) == 0.0);
    REQUIRE_THAT(bdf3::forcing(0, 0, 0, 0.16), WithinAbs(0.64, 1e-15));

    // Compare against finite differences of the exact solution.
    const double x = 0.3, y = -0.55, t = 0.6, eps2 = 0.36, h = 1e-4;
    auto u = [](double a, double b, double c) { return bdf3::exact_solution(a, b, c); };
    const double ut = (u(x, y, t + h) - u(x, y, t - h)) / (2 * h);
    const double lap = (u(x + h, y, t) + u(x - h, y, t) + u(x, y + h, t) + u(x, y - h, t) - 4 * u(x, y, t)) / (h * h);
    const double v = u(x, y, t);
    REQUIRE_THAT(bdf3::forcing(x, y, t, eps2), WithinAbs(ut - eps2 * lap + v * v * v - v, 1e-6));
}

TEST_CASE("solvability and energy conditions", "[allen_cahn]") {
    REQUIRE_THAT(bdf3::solvability_bound(1.0, 1.0), WithinRel(11.0 / 6.0, 1e-15));
    REQUIRE(bdf3::check_solvability(1.0, 1.0, 1.0));
    REQUIRE_FALSE(bdf3::check_solvability(2.0, 1.0, 1.0));
    REQUIRE(bdf3::check_solvability(0.01, 1.405, 1.405));

    REQUIRE(bdf3::check_energy_condition(0.01, 1.0, 1.0));
    REQUIRE_FALSE(bdf3::check_energy_condition(0.0101, 1.0, 1.0));
    REQUIRE(bdf3::check_energy_condition(0.005, 1.405, 1.405));

    REQUIRE_THROWS_AS(bdf3::check_solvability(0.0, 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(bdf3::check_energy_condition(0.1, -1.0, 1.0), std::invalid_argument);

    SECTION("equivalent to b0 > 1") {
        std::mt19937_64 rng(61);
        for (int i = 0; i < 10000; ++i) {
            const double tau = 3.0 * bdf3::open_unit_draw(rng);
            const double r = 3.0 * bdf3::open_unit_draw(rng);
            const double s = 3.0 * bdf3::open_unit_draw(rng);
            const double b0 = bdf3::level_coefficients(3, tau, r, s).b0;
            if (std::abs(b0 - 1.0) < 1e-12) continue;
            REQUIRE(bdf3::check_solvability(tau, r, s) == (b0 > 1.0));
        }
    }
    SECTION("start-up levels use the BDF1 and BDF2 bounds") {
        REQUIRE(bdf3::solvability_bound(0.0, 0.0) == 1.0);
        std::mt19937_64 rng(67);
        for (int i = 0; i < 1000; ++i) {
            const double tau = 3.0 * bdf3::open_unit_draw(rng);
            const double r = 3.0 * bdf3::open_unit_draw(rng);
            const double b0 = bdf3::level_coefficients(2, tau, r, 0.0).b0;
            if (std::abs(b0 - 1.0) < 1e-12) continue;
            REQUIRE(bdf3::check_solvability(tau, r, 0.0) == (b0 > 1.0));
        }
    }
}

TEST_CASE("steady states are preserved", "[allen_cahn]") {
    const auto grid = bdf3::build_uniform(6, 0.06);
    for (double value : {1.0, -1.0, 0.0}) {
        auto config = bdf3::energy_config(grid, 0.16, 8);
        config.initial.assign(config.initial.size(), value);
        const auto result = bdf3::run(config);
        for (const auto& d : result.diagnostics) {
            REQUIRE(d.newton_iterations == 0);
            REQUIRE(d.final_residual <= 1e-10);
        }
        for (const auto& s : result.trajectory)
            for (double v : s.values) REQUIRE(v == value);
    }
}

TEST_CASE("single step from exact history", "[allen_cahn]") {
    // One BDF3 step from exact data: local error is O(tau^4) in time plus the spatial tail.
    const double eps2 = 0.16;
    double previous = 0.0;
    for (int refine = 0; refine < 3; ++refine) {
        const double tau = 0.02 / std::pow(2.0, refine);
        const auto grid = bdf3::TimeGrid::from_steps(std::vector<double>(4, tau));
        auto config = bdf3::manufactured_config(grid, eps2, 12);
        const auto& op = *config.op;
        std::vector<std::vector<double>> history;
        for (std::size_t k = 0; k < 3; ++k)
            history.push_back(bdf3::sample(op, [&](double x, double y) { return bdf3::exact_solution(x, y, grid.time(k)); }));
        const auto out = bdf3::step(config, history, 3);
        REQUIRE(out.diagnostics.level == 3);
        REQUIRE(out.diagnostics.final_residual <= 1e-10);
        REQUIRE(out.diagnostics.solvability_ok);
        auto err = bdf3::sample(op, [&](double x, double y) { return bdf3::exact_solution(x, y, grid.time(3)); });
        for (std::size_t i = 0; i < err.size(); ++i) err[i] -= out.state.values[i];
        const double e = bdf3::l2_norm(op, err);
        if (refine > 0) REQUIRE(previous / e > 12.0);
        previous = e;
    }
}

TEST_CASE("manufactured run", "[allen_cahn]") {
    auto config = bdf3::manufactured_config(bdf3::build_alternating(20, 1.0), 0.16, 20);
    const auto result = bdf3::run(config);
    REQUIRE(result.trajectory.size() == 21);
    REQUIRE(result.diagnostics.size() == 20);
    REQUIRE(result.errors.size() == 21);
    REQUIRE(result.errors.front() < 1e-15);
    for (const auto& d : result.diagnostics) {
        REQUIRE(d.final_residual <= 1e-10);
        REQUIRE(d.newton_iterations >= 1);
        REQUIRE(d.solvability_ok);
    }
    // Frozen from an independent numpy implementation of the same discretization.
    REQUIRE_THAT(result.final_error, WithinRel(2.5335e-4, 2e-3));
    REQUIRE_THAT(result.final_error, WithinRel(2.8069e-4, 0.2));

    SECTION("Newton failures carry the level") {
        auto strict = config;
        strict.newton_max_iter = 1;
        try {
            bdf3::run(strict);
            FAIL("expected a Newton failure");
        } catch (const bdf3::NewtonDivergence& e) {
            // The first level moves by O(tau^4) and settles in a single iteration.
            REQUIRE(e.level() == 2);
            REQUIRE(e.iterations() == 1);
            REQUIRE(e.residual() > 1e-10);
        }
    }
}

TEST_CASE("configuration validation", "[allen_cahn]") {
    auto config = bdf3::manufactured_config(bdf3::build_uniform(2, 0.1), 0.16, 6);
    auto bad = config;
    bad.eps2 = 0.0;
    REQUIRE_THROWS_AS(bdf3::run(bad), std::invalid_argument);
    bad = config;
    bad.newton_tol = -1;
    REQUIRE_THROWS_AS(bdf3::run(bad), std::invalid_argument);
    bad = config;
    bad.initial.pop_back();
    REQUIRE_THROWS_AS(bdf3::run(bad), std::invalid_argument);
    bad = config;
    bad.op.reset();
    REQUIRE_THROWS_AS(bdf3::run(bad), std::invalid_argument);

    const std::vector<std::vector<double>> history{config.initial};
    REQUIRE_THROWS_AS(bdf3::step(config, history, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(bdf3::step(config, history, 0), std::out_of_range);
}

TEST_CASE("energy mode", "[allen_cahn]") {
    const auto grid = bdf3::build_bounded_random(60, 0.01, 0.6, 1.405, 5);
    const auto config = bdf3::energy_config(grid, 0.16, 16);
    const auto result = bdf3::run(config);
    REQUIRE(result.errors.empty());
    const double e0 = result.energies.front();
    const auto& op = *config.op;
    const double bound = bdf3::solution_bound(e0, 0.16, op.area) + 1e-8;
    for (std::size_t n = 0; n < result.energies.size(); ++n) {
        REQUIRE(result.energies[n] <= e0 + 1e-10);
        const auto& u = result.trajectory[n].values;
        REQUIRE(bdf3::l2_norm(op, u) + bdf3::gradient_norm(op, u) <= bound);
    }
    for (const auto& d : result.diagnostics) REQUIRE(d.energy_condition_ok);
}

TEST_CASE("consistency probe", "[allen_cahn]") {
    const auto g = bdf3::build_random(30, 1.0, 3);
    const auto cubic = bdf3::consistency_probe(g, [](double t) { return t * t * t; }, [](double t) { return 3 * t * t; });
    REQUIRE(cubic.eta.size() == 30);
    REQUIRE(cubic.max_bdf3 < 1e-9);

    const auto linear = bdf3::consistency_probe(g, [](double t) { return t; }, [](double) { return 1.0; });
    REQUIRE_THAT(linear.eta[0], WithinAbs(0.0, 1e-13));

    std::vector<double> maxima;
    for (std::size_t n : {40u, 80u, 160u, 320u}) {
        const auto rep = bdf3::consistency_probe(bdf3::build_uniform(n, 1.0), [](double t) { return t * t * t * t; },
                                                 [](double t) { return 4 * t * t * t; });
        maxima.push_back(rep.max_bdf3);
    }
    for (std::size_t k = 1; k < maxima.size(); ++k)
        REQUIRE_THAT(std::log2(maxima[k - 1] / maxima[k]), WithinAbs(3.0, 0.1));
}

TEST_CASE("stability probe", "[allen_cahn]") {
    const auto grid = bdf3::build_bounded_random(40, 0.01, 0.6, 1.405, 9);
    const auto config = bdf3::energy_config(grid, 0.16, 8);
    REQUIRE(bdf3::stability_probe(config, 0.0).ratio == 1.0);

    const auto a = bdf3::stability_probe(config, 1e-6);
    REQUIRE(a.ratio > 0.0);
    REQUIRE(a.ratio <= 100.0);
    const auto b = bdf3::stability_probe(config, 5e-7);
    REQUIRE_THAT(b.final_difference / a.final_difference, WithinRel(0.5, 0.05));

    REQUIRE_THROWS_AS(bdf3::stability_probe(config, -1.0), std::invalid_argument);
}
