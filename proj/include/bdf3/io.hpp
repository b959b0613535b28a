#pragma once

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bdf3/allen_cahn.hpp"
#include "bdf3/bdf_kernels.hpp"
#include "bdf3/linalg.hpp"
#include "bdf3/spectral.hpp"
#include "bdf3/time_grid.hpp"

namespace bdf3 {

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out.flush()) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// %.17g, enough digits to round-trip any double.
inline std::string exact_decimal(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Grids travel as {"T": horizon, "steps": [tau_1, ..., tau_N]}. nlohmann::json
// prints doubles with round-trip precision, so the encoding is lossless.

inline nlohmann::json grid_to_json(const TimeGrid& grid) {
    return {{"T", grid.horizon()}, {"steps", std::vector<double>(grid.steps().begin(), grid.steps().end())}};
}

inline TimeGrid grid_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array())
        throw IoError("grid JSON needs a \"steps\" array");
    std::vector<double> steps;
    for (const auto& v : j["steps"]) {
        if (!v.is_number()) throw IoError("grid steps must be numbers");
        steps.push_back(v.get<double>());
    }
    try {
        if (j.contains("T")) {
            if (!j["T"].is_number()) throw IoError("grid \"T\" must be a number");
            return TimeGrid::from_steps(j["T"].get<double>(), std::move(steps));
        }
        return TimeGrid::from_steps(std::move(steps));
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("invalid grid: ") + e.what());
    }
}

inline std::string grid_json_text(const TimeGrid& grid) { return grid_to_json(grid).dump() + "\n"; }

inline TimeGrid read_grid(const std::filesystem::path& path) {
    const auto text = read_text(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return grid_from_json(j);
}

/// Lower triangle (col <= row) of a matrix as `row,col,value`, 1-based, full precision.
inline std::string lower_triangle_csv(const Matrix& m) {
    std::string out = "row,col,value\n";
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j <= i && j < m.cols(); ++j)
            out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + exact_decimal(m(i, j)) + "\n";
    return out;
}

/// Every entry as `row,col,value`, 1-based.
inline std::string matrix_csv(const Matrix& m) {
    std::string out = "row,col,value\n";
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + exact_decimal(m(i, j)) + "\n";
    return out;
}

/// Writes B.csv, D.csv and A.csv into `dir` (created if missing).
inline void write_kernels(const TimeGrid& grid, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    const auto km = kernel_matrices(grid);
    write_text(dir / "B.csv", lower_triangle_csv(km.B));
    write_text(dir / "D.csv", lower_triangle_csv(km.D));
    write_text(dir / "A.csv", lower_triangle_csv(km.A));
}

/// Writes nodes.csv (i,x,y,weight per unknown) and L.csv, Gx.csv, Gy.csv into `dir`.
inline void write_operator(const SpectralOperator& op, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    std::string nodes = "i,x,y,weight\n";
    for (std::size_t i = 0; i < op.unknowns(); ++i)
        nodes += std::to_string(i + 1) + "," + exact_decimal(op.x_of(i)) + "," + exact_decimal(op.y_of(i)) + "," +
                 exact_decimal(op.weights[i]) + "\n";
    write_text(dir / "nodes.csv", nodes);
    write_text(dir / "L.csv", matrix_csv(op.L));
    write_text(dir / "Gx.csv", matrix_csv(op.Gx));
    write_text(dir / "Gy.csv", matrix_csv(op.Gy));
}

/// `n,t,value` for a per-level series (levels 0..N).
inline std::string level_series_csv(const TimeGrid& grid, const std::vector<double>& values,
                                    const char* column = "value") {
    if (values.size() != grid.size() + 1) throw std::invalid_argument("series length must be N + 1");
    std::string out = std::string("n,t,") + column + "\n";
    for (std::size_t n = 0; n < values.size(); ++n)
        out += std::to_string(n) + "," + exact_decimal(grid.time(n)) + "," + exact_decimal(values[n]) + "\n";
    return out;
}

inline nlohmann::json to_json(const StepDiagnostics& d) {
    return {
        {"level", d.level},
        {"newton_iterations", d.newton_iterations},
        {"final_residual", d.final_residual},
        {"solvability_ok", d.solvability_ok},
        {"energy_condition_ok", d.energy_condition_ok},
        {"energy", d.energy_value},
    };
}

/// One JSON object per line.
inline std::string diagnostics_jsonl(const std::vector<StepDiagnostics>& diags) {
    std::string out;
    for (const auto& d : diags) out += to_json(d).dump() + "\n";
    return out;
}

/// Snapshot of one level as `x,y,value` rows.
inline std::string field_csv(const SpectralOperator& op, const FieldState& f) {
    if (f.values.size() != op.unknowns()) throw std::invalid_argument("field does not match the operator");
    std::string out = "x,y,value\n";
    for (std::size_t i = 0; i < f.values.size(); ++i)
        out += exact_decimal(op.x_of(i)) + "," + exact_decimal(op.y_of(i)) + "," + exact_decimal(f.values[i]) + "\n";
    return out;
}

}  // namespace bdf3
