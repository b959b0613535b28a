#include <catch_amalgamated.hpp>

#include <filesystem>

#include "bdf3/io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("bdf3_io_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("grid JSON round trip is lossless", "[io]") {
    const auto dir = scratch_dir("grid");
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto g = bdf3::build_random(37, 1.0, seed);
        const auto path = dir / ("g" + std::to_string(seed) + ".json");
        bdf3::write_text(path, bdf3::grid_json_text(g));
        const auto back = bdf3::read_grid(path);
        REQUIRE(back == g);
    }
    const auto j = bdf3::grid_to_json(bdf3::build_uniform(2, 1.0));
    REQUIRE(j["T"] == 1.0);
    REQUIRE(j["steps"].size() == 2);
}

TEST_CASE("grid JSON errors", "[io]") {
    const auto dir = scratch_dir("grid_errors");
    REQUIRE_THROWS_AS(bdf3::read_grid(dir / "missing.json"), bdf3::IoError);
    bdf3::write_text(dir / "bad.json", "{not json");
    REQUIRE_THROWS_AS(bdf3::read_grid(dir / "bad.json"), bdf3::IoError);
    REQUIRE_THROWS_AS(bdf3::grid_from_json(nlohmann::json{{"T", 1.0}}), bdf3::IoError);
    REQUIRE_THROWS_AS(bdf3::grid_from_json(nlohmann::json{{"T", 1.0}, {"steps", {0.5, -0.5}}}), bdf3::IoError);
    REQUIRE_THROWS_AS(bdf3::grid_from_json(nlohmann::json{{"T", 2.0}, {"steps", {0.5, 0.5}}}), bdf3::IoError);
    REQUIRE(bdf3::grid_from_json(nlohmann::json{{"steps", {0.5, 0.25}}}).horizon() == 0.75);
    REQUIRE_THROWS_AS(bdf3::write_text(dir / "no_such_dir" / "x.csv", "x"), bdf3::IoError);
}

TEST_CASE("kernel dump", "[io]") {
    const auto dir = scratch_dir("kernels");
    const auto g = bdf3::build_uniform(3, 3.0);
    bdf3::write_kernels(g, dir / "out");
    const auto b = bdf3::read_text(dir / "out" / "B.csv");
    REQUIRE(b.rfind("row,col,value\n1,1,1\n", 0) == 0);
    REQUIRE(b.find("3,3,1.8333333333333333\n") != std::string::npos);
    REQUIRE(fs::exists(dir / "out" / "D.csv"));
    REQUIRE(fs::exists(dir / "out" / "A.csv"));
    // 6 lower-triangular entries plus the header.
    REQUIRE(std::count(b.begin(), b.end(), '\n') == 7);
}

TEST_CASE("operator dump and series", "[io]") {
    const auto dir = scratch_dir("operator");
    const auto op = bdf3::chebyshev_operator(3);
    bdf3::write_operator(op, dir);
    const auto nodes = bdf3::read_text(dir / "nodes.csv");
    REQUIRE(std::count(nodes.begin(), nodes.end(), '\n') == 5);
    const auto l = bdf3::read_text(dir / "L.csv");
    REQUIRE(std::count(l.begin(), l.end(), '\n') == 17);

    const auto g = bdf3::build_uniform(2, 1.0);
    REQUIRE(bdf3::level_series_csv(g, {1.0, 0.5, 0.25}, "energy") == "n,t,energy\n0,0,1\n1,0.5,0.5\n2,1,0.25\n");
    REQUIRE_THROWS_AS(bdf3::level_series_csv(g, {1.0}), std::invalid_argument);

    bdf3::StepDiagnostics d{.level = 3, .newton_iterations = 2, .final_residual = 1e-12,
                            .solvability_ok = true, .energy_condition_ok = false, .energy_value = 0.5};
    const auto line = bdf3::diagnostics_jsonl({d, d});
    REQUIRE(std::count(line.begin(), line.end(), '\n') == 2);
    REQUIRE(nlohmann::json::parse(line.substr(0, line.find('\n')))["level"] == 3);

    bdf3::FieldState f{std::vector<double>(op.unknowns(), 2.0), 0.0};
    REQUIRE(bdf3::field_csv(op, f).rfind("x,y,value\n", 0) == 0);
}
