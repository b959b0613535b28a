#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "bdf3/study.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("mesh cases", "[study]") {
    REQUIRE(bdf3::parse_mesh_case("1") == bdf3::MeshCase::alternating);
    REQUIRE(bdf3::parse_mesh_case("2") == bdf3::MeshCase::random);
    REQUIRE(bdf3::parse_mesh_case("uniform") == bdf3::MeshCase::uniform);
    REQUIRE_THROWS_AS(bdf3::parse_mesh_case("3"), std::invalid_argument);

    // Case II grids are drawn with seed + N.
    REQUIRE(bdf3::study_grid(bdf3::MeshCase::random, 40, 1.0, 5) == bdf3::build_random(40, 1.0, 45));
}

TEST_CASE("observed rates", "[study]") {
    REQUIRE_THAT(bdf3::observed_rate(10, 8e-3, 20, 1e-3), WithinAbs(3.0, 1e-12));
    bdf3::ConvergenceReport r;
    for (std::size_t n : {10u, 20u, 40u}) r.rows.push_back({n, 5.0 / std::pow(double(n), 2.5), {}, 1, 1});
    REQUIRE_THAT(bdf3::least_squares_order(r), WithinAbs(2.5, 1e-12));
    r.rows.resize(1);
    REQUIRE_THROWS_AS(bdf3::least_squares_order(r), std::invalid_argument);
}

TEST_CASE("uniform convergence study", "[study]") {
    bdf3::ConvergenceOptions opt;
    opt.mesh = bdf3::MeshCase::uniform;
    opt.eps2_list = {0.16};
    opt.n_list = {10, 20};
    opt.resolution = 20;
    const auto reports = bdf3::run_convergence(opt);
    REQUIRE(reports.size() == 1);
    const auto& r = reports.front();
    REQUIRE(r.rows.size() == 2);
    REQUIRE_FALSE(r.rows[0].rate.has_value());
    REQUIRE_THAT(r.rows[0].error / r.rows[1].error, WithinRel(8.0, 0.15));
    REQUIRE_THAT(*r.rows[1].rate, WithinAbs(bdf3::observed_rate(10, r.rows[0].error, 20, r.rows[1].error), 1e-12));
    REQUIRE(r.rows[0].max_ratio == 1.0);

    SECTION("threads do not change the result") {
        auto threaded = opt;
        threaded.threads = 3;
        threaded.eps2_list = {0.16, 0.36};
        const auto t = bdf3::run_convergence(threaded);
        REQUIRE(t.size() == 2);
        REQUIRE(t[0].rows[0].error == r.rows[0].error);
        REQUIRE(t[0].rows[1].error == r.rows[1].error);
        REQUIRE(t[1].eps2 == 0.36);
    }
}

TEST_CASE("convergence study validation", "[study]") {
    bdf3::ConvergenceOptions opt;
    opt.n_list = {40, 20};
    REQUIRE_THROWS_AS(bdf3::run_convergence(opt), std::invalid_argument);
    opt.n_list = {20};
    opt.eps2_list = {-1.0};
    REQUIRE_THROWS_AS(bdf3::run_convergence(opt), std::invalid_argument);

    opt.eps2_list = {0.16};
    opt.n_list = {4};
    opt.resolution = 8;
    opt.newton_max_iter = 1;
    try {
        bdf3::run_convergence(opt);
        FAIL("expected the study to fail");
    } catch (const bdf3::StudyFailure& e) {
        REQUIRE(std::string(e.what()).find("N=4") != std::string::npos);
    }
}

TEST_CASE("report emission", "[study]") {
    bdf3::ConvergenceReport r;
    r.eps2 = 0.16;
    r.resolution = 20;
    r.rows.push_back({20, 2.8069e-4, {}, 2.0, 0.5});
    r.rows.push_back({40, 3.5943e-5, bdf3::observed_rate(20, 2.8069e-4, 40, 3.5943e-5), 2.0, 0.5});
    const auto csv = lines(bdf3::convergence_csv(r));
    REQUIRE(csv.size() == 3);
    REQUIRE(csv[0] == "N,error,rate,max_r,min_r");
    REQUIRE(csv[1] == "20,2.8069e-04,,2,0.5");
    REQUIRE(csv[2] == "40,3.5943e-05,2.9652,2,0.5");

    bdf3::ConvergenceReport empty;
    REQUIRE(bdf3::convergence_csv(empty) == "N,error,rate,max_r,min_r\n");

    const auto j = nlohmann::json::parse(bdf3::convergence_json({r}));
    REQUIRE(j.is_array());
    REQUIRE(j[0]["metadata"]["case"] == "1");
    REQUIRE(j[0]["metadata"]["M"] == 20);
    REQUIRE_FALSE(j[0]["metadata"].contains("wall_seconds"));
    REQUIRE(j[0]["rows"][0]["rate"].is_null());
    REQUIRE(j[0]["rows"][1]["error"].get<double>() == 3.5943e-5);
    REQUIRE(j[0]["rows"][1]["rate"].get<double>() == *r.rows[1].rate);

    REQUIRE(nlohmann::json::parse(bdf3::convergence_json({r}, true))[0]["metadata"].contains("wall_seconds"));
    REQUIRE(bdf3::convergence_json({r}) == bdf3::convergence_json({r}));
}
