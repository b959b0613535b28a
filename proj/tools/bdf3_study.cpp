// Command-line front end for the study harness.
//
// Exit codes: 0 success / property holds, 1 property violated,
// 2 usage or input error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdf3/bdf3.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kViolated = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

struct Globals {
    bool quiet = false;
    unsigned threads = 1;
};

void say(const Globals& g, const std::string& line) {
    if (!g.quiet) std::cout << line << '\n';
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

// --- convergence -----------------------------------------------------------

struct ConvergenceArgs {
    std::string mesh = "1";
    std::vector<double> eps2{0.16, 0.36};
    std::vector<std::size_t> n{20, 40, 80, 160};
    std::size_t m = 20;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    std::string norm = "cc";
    bool timing = false;
};

std::filesystem::path suffixed(const std::filesystem::path& base, double eps2) {
    char tag[48];
    std::snprintf(tag, sizeof tag, "_eps2-%g", eps2);
    auto p = base;
    p.replace_filename(base.stem().string() + tag + base.extension().string());
    return p;
}

int cmd_convergence(const Globals& g, const ConvergenceArgs& a) {
    bdf3::ConvergenceOptions opt;
    opt.mesh = bdf3::parse_mesh_case(a.mesh);
    opt.eps2_list = a.eps2;
    opt.n_list = a.n;
    opt.resolution = a.m;
    opt.seed = a.seed;
    opt.norm = a.norm == "rms" ? bdf3::NormKind::rms : bdf3::NormKind::quadrature;
    opt.threads = g.threads;
    const auto reports = bdf3::run_convergence(opt);

    if (a.format == "json") {
        bdf3::write_text(a.out, bdf3::convergence_json(reports, a.timing));
    } else if (reports.size() == 1) {
        bdf3::write_text(a.out, bdf3::convergence_csv(reports.front()));
    } else {
        for (const auto& r : reports) bdf3::write_text(suffixed(a.out, r.eps2), bdf3::convergence_csv(r));
    }
    for (const auto& r : reports) {
        say(g, "eps2 = " + fmt("%g", r.eps2) + "  (case " + bdf3::to_string(r.mesh) + ", M = " +
                   std::to_string(r.resolution) + ")");
        for (const auto& row : r.rows)
            say(g, "  N = " + std::to_string(row.n) + "  error " + fmt("%.4e", row.error) +
                       (row.rate ? "  rate " + fmt("%.4f", *row.rate) : std::string()));
        if (r.rows.size() >= 2) say(g, "  least-squares order " + fmt("%.4f", bdf3::least_squares_order(r)));
    }
    return kOk;
}

// --- ratio-figure ----------------------------------------------------------

int cmd_ratio_figure(const Globals& g, double ratio, std::size_t length, const std::string& out) {
    if (!(ratio > 0.0) || length == 0) throw std::invalid_argument("need --ratio > 0 and --length >= 1");
    const auto trace = bdf3::sylvester_trace_scaled(bdf3::constant_ratios(ratio, length));
    std::string csv = "j,p\n";
    for (std::size_t j = 0; j < trace.computed; ++j)
        csv += std::to_string(j + 1) + "," + bdf3::exact_decimal(trace.p[j]) + "\n";
    bdf3::write_text(out, csv);
    if (trace.first_negative)
        say(g, "first nonpositive pivot at j = " + std::to_string(*trace.first_negative) + " (p = " +
                   fmt("%.6e", trace.p[*trace.first_negative - 1]) + ")");
    else
        say(g, "all " + std::to_string(length) + " pivots positive");
    return kOk;
}

// --- validate-lemmas -------------------------------------------------------

int cmd_validate_lemmas(const Globals& g, double resolution) {
    const auto s = bdf3::sweep_envelope_functions(resolution);
    say(g, std::to_string(s.points) + " sample points per kappa, resolution " + fmt("%g", resolution));
    say(g, "  Psi   in [" + fmt("%.12g", s.coupling_min) + ", " + fmt("%.12g", s.coupling_max) + "]  (bound [1, 2.7])");
    say(g, "  psi   max " + fmt("%.6e", s.offdiag_upper_max) + "  (bound <= 0)");
    say(g, "  Phi   min/scale " + fmt("%.6e", s.lower_margin_min_scaled) + "  (bound >= 0)");
    say(g, "  phi   max/scale " + fmt("%.6e", s.upper_margin_max_scaled) + "  (bound <= 0)");
    const bool ok = s.holds();
    say(g, ok ? "all bounds hold" : "BOUND VIOLATED");
    return ok ? kOk : kViolated;
}

// --- certify ---------------------------------------------------------------

int cmd_certify(const Globals& g, const std::string& path) {
    const auto grid = bdf3::read_grid(path);
    const auto c = bdf3::certify_positive_definite(grid);
    const auto ratios = bdf3::validate_ratios(grid);
    say(g, "N = " + std::to_string(grid.size()) + ", max ratio " + fmt("%.6g", ratios.max_ratio));
    if (c.certified) {
        say(g, "certified: B - gamma Lambda^{-1} is positive definite");
        return kOk;
    }
    say(g, "not certified: first nonpositive pivot at j = " + std::to_string(*c.trace.first_negative));
    return kViolated;
}

// --- energy ----------------------------------------------------------------

struct EnergyArgs {
    double eps2 = 0.16;
    double tau = 0.005;
    std::size_t steps = 200;
    std::optional<std::uint64_t> seed;
    std::size_t m = 32;
    double amplitude = 0.05;
    std::string out;
    std::string diagnostics;
};

int cmd_energy(const Globals& g, const EnergyArgs& a) {
    if (!(a.tau > 0.0) || a.steps == 0) throw std::invalid_argument("need --tau > 0 and --steps >= 1");
    // Without a seed the steps are uniform; with one, tau is the cap of a
    // random-ratio grid with r_k in [0.6, 1.405].
    auto grid = a.seed ? bdf3::build_bounded_random(a.steps, a.tau, 0.6, bdf3::kRatioBound, *a.seed)
                       : bdf3::TimeGrid::from_steps(std::vector<double>(a.steps, a.tau));
    const auto config = bdf3::energy_config(grid, a.eps2, a.m, a.amplitude);
    const auto result = bdf3::run(config);

    bdf3::write_text(a.out, bdf3::level_series_csv(grid, result.energies, "energy"));
    if (!a.diagnostics.empty()) bdf3::write_text(a.diagnostics, bdf3::diagnostics_jsonl(result.diagnostics));

    const double e0 = result.energies.front();
    std::size_t worst = 0;
    bool monotone = true;
    for (std::size_t n = 1; n < result.energies.size(); ++n) {
        if (result.energies[n] > e0 + 1e-10) monotone = false;
        if (result.energies[n] > result.energies[worst]) worst = n;
    }
    bool conditions = true;
    for (const auto& d : result.diagnostics) conditions = conditions && d.energy_condition_ok;
    say(g, "E(u^0) = " + fmt("%.12e", e0) + ", E(u^N) = " + fmt("%.12e", result.energies.back()));
    if (!conditions) say(g, "note: some steps exceed the energy step restriction");
    say(g, monotone ? "E(u^n) <= E(u^0) at every level" : "energy rose above E(u^0) at level " + std::to_string(worst));
    return monotone ? kOk : kViolated;
}

// --- kernels / operator ----------------------------------------------------

int cmd_kernels(const Globals& g, const std::string& grid_path, const std::string& out) {
    const auto grid = bdf3::read_grid(grid_path);
    bdf3::write_kernels(grid, out);
    say(g, "wrote B.csv, D.csv, A.csv for N = " + std::to_string(grid.size()) + " to " + out);
    return kOk;
}

int cmd_operator(const Globals& g, const std::string& kind, std::size_t m, const std::string& out) {
    const auto op = kind == "fourier" ? bdf3::fourier_operator(m) : bdf3::chebyshev_operator(m);
    bdf3::write_operator(op, out);
    say(g, std::string("wrote ") + bdf3::to_string(op.kind) + " operator (" + std::to_string(op.unknowns()) +
               " unknowns) to " + out);
    return kOk;
}

// --- consistency -----------------------------------------------------------

int cmd_consistency(const Globals& g, const std::string& function, const std::vector<std::size_t>& levels,
                    const std::string& out) {
    std::function<double(double)> v, dv;
    if (function == "t3") {
        v = [](double t) { return t * t * t; };
        dv = [](double t) { return 3.0 * t * t; };
    } else if (function == "t4") {
        v = [](double t) { return t * t * t * t; };
        dv = [](double t) { return 4.0 * t * t * t; };
    } else {
        v = [](double t) { return std::sin(t); };
        dv = [](double t) { return std::cos(t); };
    }
    std::string csv = "N,tau,max_eta,rate\n";
    std::optional<std::pair<std::size_t, double>> prev;
    for (std::size_t n : levels) {
        const auto grid = bdf3::build_uniform(n, 1.0);
        const auto rep = bdf3::consistency_probe(grid, v, dv);
        std::string rate;
        if (prev && prev->second > 0.0 && rep.max_bdf3 > 0.0)
            rate = fmt("%.4f", bdf3::observed_rate(prev->first, prev->second, n, rep.max_bdf3));
        csv += std::to_string(n) + "," + bdf3::exact_decimal(grid.step(1)) + "," + fmt("%.6e", rep.max_bdf3) + "," +
               rate + "\n";
        say(g, "N = " + std::to_string(n) + "  max |eta| (j >= 3) = " + fmt("%.6e", rep.max_bdf3) +
                   (rate.empty() ? "" : "  rate " + rate));
        prev = {n, rep.max_bdf3};
    }
    bdf3::write_text(out, csv);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-step BDF3 kernels and Allen-Cahn study harness"};
    app.require_subcommand(1);
    Globals g;
    app.add_flag("--quiet", g.quiet, "Suppress progress output");
    app.add_option("--threads", g.threads, "Worker threads for independent runs")->check(CLI::PositiveNumber);

    ConvergenceArgs conv;
    auto* c_conv = app.add_subcommand("convergence", "Manufactured-solution convergence table");
    c_conv->add_option("--case", conv.mesh, "Mesh family")->check(CLI::IsMember({"1", "2", "uniform"}))->required();
    c_conv->add_option("--eps2", conv.eps2, "eps^2 values")->delimiter(',')->required();
    c_conv->add_option("--n", conv.n, "Step counts, ascending")->delimiter(',')->required();
    c_conv->add_option("--m", conv.m, "Chebyshev resolution")->required()->check(CLI::Range(2, 64));
    c_conv->add_option("--seed", conv.seed, "Seed for the random mesh family");
    c_conv->add_option("--out", conv.out, "Output file")->required();
    c_conv->add_option("--format", conv.format)->check(CLI::IsMember({"csv", "json"}));
    c_conv->add_option("--norm", conv.norm, "Discrete L2 norm")->check(CLI::IsMember({"cc", "rms"}));
    c_conv->add_flag("--timing", conv.timing, "Include wall time in JSON metadata");

    double fig_ratio = 1.732;
    std::size_t fig_length = 100;
    std::string fig_out;
    auto* c_fig = app.add_subcommand("ratio-figure", "Pivots of A + A^T at a constant step ratio");
    c_fig->add_option("--ratio", fig_ratio)->required();
    c_fig->add_option("--length", fig_length)->required();
    c_fig->add_option("--out", fig_out)->required();

    double lemma_res = 0.005;
    auto* c_lem = app.add_subcommand("validate-lemmas", "Sweep the envelope function bounds");
    c_lem->add_option("--resolution", lemma_res);

    std::string cert_grid;
    auto* c_cert = app.add_subcommand("certify", "Certify B - gamma Lambda^{-1} positive definite");
    c_cert->add_option("--grid", cert_grid, "Grid JSON")->required();

    EnergyArgs en;
    auto* c_en = app.add_subcommand("energy", "Energy trace of an unforced periodic run");
    c_en->add_option("--eps2", en.eps2)->required();
    c_en->add_option("--tau", en.tau, "Step size (step cap when --seed is given)")->required();
    c_en->add_option("--steps", en.steps)->required();
    c_en->add_option("--seed", en.seed, "Use random step ratios in [0.6, 1.405]");
    c_en->add_option("--m", en.m, "Fourier resolution (even)");
    c_en->add_option("--amplitude", en.amplitude, "Initial amplitude of sin x sin y");
    c_en->add_option("--out", en.out)->required();
    c_en->add_option("--diagnostics", en.diagnostics, "Per-level diagnostics (JSON lines)");

    std::string ker_grid, ker_out;
    auto* c_ker = app.add_subcommand("kernels", "Dump B, D and A for a grid");
    c_ker->add_option("--grid", ker_grid)->required();
    c_ker->add_option("--out", ker_out, "Output directory")->required();

    std::string op_kind = "chebyshev", op_out;
    std::size_t op_m = 20;
    auto* c_op = app.add_subcommand("operator", "Dump a spectral operator");
    c_op->add_option("--kind", op_kind)->check(CLI::IsMember({"chebyshev", "fourier"}));
    c_op->add_option("--m", op_m)->required();
    c_op->add_option("--out", op_out, "Output directory")->required();

    std::string cons_fn = "t4", cons_out;
    std::vector<std::size_t> cons_levels{40, 80, 160, 320};
    auto* c_cons = app.add_subcommand("consistency", "Consistency error of the discrete derivative");
    c_cons->add_option("--function", cons_fn)->check(CLI::IsMember({"t3", "t4", "sin"}))->required();
    c_cons->add_option("--levels", cons_levels, "Uniform step counts")->delimiter(',')->required();
    c_cons->add_option("--out", cons_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*c_conv) return cmd_convergence(g, conv);
        if (*c_fig) return cmd_ratio_figure(g, fig_ratio, fig_length, fig_out);
        if (*c_lem) return cmd_validate_lemmas(g, lemma_res);
        if (*c_cert) return cmd_certify(g, cert_grid);
        if (*c_en) return cmd_energy(g, en);
        if (*c_ker) return cmd_kernels(g, ker_grid, ker_out);
        if (*c_op) return cmd_operator(g, op_kind, op_m, op_out);
        if (*c_cons) return cmd_consistency(g, cons_fn, cons_levels, cons_out);
    } catch (const bdf3::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
