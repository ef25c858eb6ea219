// sirsupp: simulate, sweep, diagnose and recover signed supports from the
// command line. Every command writes its CSV outputs plus manifest.ini into
// the --out directory.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include "sdr/cli_io.hpp"
#include "sdr/errors.hpp"
#include "sdr/rng.hpp"

namespace fs = std::filesystem;
using namespace sdr;

namespace {

enum Exit { kOk = 0, kConfigError = 1, kNumericalError = 2 };

// Flags shared by all subcommands plus per-command overrides. Overrides are
// kept as raw strings so that they merge with config-file values before any
// parsing happens.
struct Command {
    CLI::App* app = nullptr;
    std::string config;
    std::string out = ".";
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> flags;

    void flag(const std::string& key, const std::string& help)
    {
        flags.emplace_back(key, app->add_option("--" + key, values[key], help));
    }

    Settings settings() const
    {
        Settings merged;
        if (!config.empty())
            merged = read_config_section(config, app->get_name());
        for (const auto& [key, opt] : flags)
            if (opt->count() > 0)
                merged[key] = values.at(key);
        return merged;
    }
};

Command& add_command(CLI::App& root, std::vector<Command>& cmds, const std::string& name,
                     const std::string& help)
{
    Command& c = cmds.emplace_back();
    c.app = root.add_subcommand(name, help);
    c.app->add_option("--config", c.config, "INI file; the [" + name + "] section is read")
        ->check(CLI::ExistingFile);
    c.app->add_option("--out", c.out, "output directory (created if absent)");
    c.flag("seed", "master seed");
    return c;
}

std::string join(const std::vector<double>& xs)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i)
        s += (i ? "," : "") + format_double(xs[i]);
    return s;
}

std::string join(const std::vector<int>& xs)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i)
        s += (i ? "," : "") + std::to_string(xs[i]);
    return s;
}

std::string lookup_or(const Settings& s, const std::string& key, const std::string& fallback)
{
    const auto it = s.find(key);
    return it == s.end() ? fallback : it->second;
}

std::uint64_t seed_of(const Settings& s)
{
    return static_cast<std::uint64_t>(std::stoll(lookup_or(s, "seed", "0")));
}

void echo_sdp(Settings& eff, const SdpConfig& sdp)
{
    eff["backend"] = sdp_backend_name(sdp.backend);
    eff["max-iter"] = std::to_string(sdp.max_iter);
    eff["tol"] = format_double(sdp.tol);
    eff["step"] = sdp.step ? format_double(*sdp.step) : "auto";
}

fs::path prepare_output(const std::string& out)
{
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory '" + out + "'");
    return dir;
}

template <typename Writer>
void emit(const fs::path& dir, const std::string& name, RunManifest& manifest, Writer&& writer)
{
    std::ostringstream text;
    writer(text);
    write_text_file(dir / name, text.str());
    manifest.files.push_back(name);
}

void finish_manifest(const fs::path& dir, RunManifest& manifest)
{
    std::ostringstream text;
    manifest.write(text);
    write_text_file(dir / "manifest.ini", text.str());
}

RunManifest start_manifest(const Command& c, const fs::path& dir, std::uint64_t seed)
{
    RunManifest m;
    m.command = c.app->get_name();
    m.config_path = c.config;
    m.output_dir = dir;
    m.seed = seed;
    return m;
}

int run_simulate(const Command& c)
{
    const Settings s = c.settings();
    CurveConfig cfg = curve_config_from(s);
    const int s_count = cfg.sparsity();
    const long n = std::stol(lookup_or(s, "n", "1000"));
    if (n < 2)
        throw InvalidArgument("--n must be at least 2");
    if (s_count < 1 || s_count > cfg.p)
        throw InvalidArgument("--s must lie in [1, p]");

    const std::uint64_t seed = seed_of(s);
    const SparseDirection beta = generate_beta(cfg.p, s_count, cfg.beta_scheme, derive_seed(seed, 0));
    const Dataset data = sample_sim(cfg.model, beta, static_cast<int>(n), derive_seed(seed, 1));

    const fs::path dir = prepare_output(c.out);
    RunManifest m = start_manifest(c, dir, seed);
    m.effective = {{"model", link_name(cfg.model.link)},
                   {"noise-sd", format_double(cfg.model.noise_sd)},
                   {"p", std::to_string(cfg.p)},
                   {"s", std::to_string(s_count)},
                   {"n", std::to_string(n)},
                   {"beta-scheme", beta_scheme_name(cfg.beta_scheme)},
                   {"seed", std::to_string(seed)}};
    emit(dir, "data.csv", m, [&](std::ostream& o) { write_dataset_csv(data, o); });
    emit(dir, "beta.csv", m, [&](std::ostream& o) { write_vector_csv(beta.values, "beta", o); });
    finish_manifest(dir, m);
    return kOk;
}

int run_curve_command(const Command& c)
{
    const Settings s = c.settings();
    const CurveConfig cfg = curve_config_from(s);
    cfg.validate();
    const EfficiencyCurve curve = run_curve(cfg);

    const fs::path dir = prepare_output(c.out);
    RunManifest m = start_manifest(c, dir, cfg.master_seed);
    m.effective = {{"model", link_name(cfg.model.link)},
                   {"noise-sd", format_double(cfg.model.noise_sd)},
                   {"p", std::to_string(cfg.p)},
                   {"s", std::to_string(curve.s)},
                   {"beta-scheme", beta_scheme_name(cfg.beta_scheme)},
                   {"method", method_name(cfg.method)},
                   {"mode", sir_mode_name(cfg.estimator_mode)},
                   {"H", std::to_string(cfg.h)},
                   {"gamma-grid", join(cfg.gamma_grid)},
                   {"reps", std::to_string(cfg.reps)},
                   {"seed", std::to_string(cfg.master_seed)},
                   {"lambda", cfg.lambda ? format_double(*cfg.lambda) : "default"},
                   {"workers", std::to_string(cfg.workers)}};
    if (cfg.method == Method::Sdp)
        echo_sdp(m.effective, cfg.sdp);
    const std::string name = "curve.csv";
    emit_curve_csv(curve, dir / name);
    m.files.push_back(name);
    finish_manifest(dir, m);
    return kOk;
}

int run_diagnose(const Command& c)
{
    const Settings s = c.settings();
    const ModelSpec model = model_from(s);
    const std::vector<int> grid = parse_int_list(lookup_or(s, "h-grid", "5,10,20,40"));
    const long mc_n = std::stol(lookup_or(s, "mc-n", "1000000"));
    if (mc_n > 2'000'000'000L)
        throw InvalidArgument("--mc-n too large");
    const std::uint64_t seed = seed_of(s);
    const StabilityDiagnostic diag = stability_diagnostic(model, grid, static_cast<int>(mc_n), seed);

    const fs::path dir = prepare_output(c.out);
    RunManifest m = start_manifest(c, dir, seed);
    m.effective = {{"model", link_name(model.link)},
                   {"noise-sd", format_double(model.noise_sd)},
                   {"h-grid", join(grid)},
                   {"mc-n", std::to_string(mc_n)},
                   {"seed", std::to_string(seed)}};
    const std::string label = link_name(model.link);
    emit(dir, "diagnostic_slices.csv", m,
         [&](std::ostream& o) { write_diagnostic_slices_csv(diag, label, o); });
    emit(dir, "diagnostic_summary.csv", m,
         [&](std::ostream& o) { write_diagnostic_summary_csv(diag, label, o); });
    finish_manifest(dir, m);
    return kOk;
}

int run_recover(const Command& c)
{
    const Settings s = c.settings();
    const std::string input = lookup_or(s, "input", "");
    if (input.empty())
        throw InvalidArgument("recover needs --input");
    const std::string y_column = lookup_or(s, "y-column", "y");
    const auto method = parse_recovery_method(lookup_or(s, "method", "dt"));
    if (!method)
        throw InvalidArgument("unknown method '" + lookup_or(s, "method", "") + "' (expected dt or sdp)");
    if (s.find("s") == s.end())
        throw InvalidArgument("recover needs --s");
    const int s_count = std::stoi(s.at("s"));
    const int h = std::stoi(lookup_or(s, "H", "10"));
    const std::uint64_t seed = seed_of(s);
    const SdpConfig sdp = sdp_config_from(s);
    std::optional<double> lambda;
    if (s.count("lambda"))
        lambda = sdp.lambda;

    const IngestedTable table = ingest_csv(input, y_column);
    const RankedReport report = recover_real(table, s_count, h, *method, seed, sdp, lambda);

    const fs::path dir = prepare_output(c.out);
    RunManifest m = start_manifest(c, dir, seed);
    m.effective = {{"input", input},
                   {"y-column", y_column},
                   {"rows", std::to_string(table.rows)},
                   {"rejected-rows", std::to_string(table.rejected_rows)},
                   {"method", *method == RecoveryMethod::Dt ? "dt" : "sdp"},
                   {"s", std::to_string(s_count)},
                   {"H", std::to_string(h)},
                   {"seed", std::to_string(seed)}};
    if (*method == RecoveryMethod::Sdp) {
        m.effective["lambda"] = format_double(report.lambda);
        m.effective["converged"] = report.converged ? "true" : "false";
        echo_sdp(m.effective, sdp);
    }
    emit(dir, "report.csv", m, [&](std::ostream& o) { write_report_csv(report, o); });
    finish_manifest(dir, m);
    if (table.rejected_rows > 0)
        std::cerr << "sirsupp: rejected " << table.rejected_rows << " rows with missing values\n";
    if (!report.converged) {
        std::cerr << "sirsupp: SDP did not converge\n";
        return kNumericalError;
    }
    return kOk;
}

int run_sdp_solve(const Command& c)
{
    const Settings s = c.settings();
    const std::string input = lookup_or(s, "input", "");
    if (input.empty())
        throw InvalidArgument("sdp-solve needs --input");
    const Matrix a = read_matrix_csv(input);
    SdpConfig cfg = sdp_config_from(s);
    int s_count = 0;
    if (s.count("s"))
        s_count = std::stoi(s.at("s"));
    if (!s.count("lambda") && s_count > 0)
        cfg.lambda = default_lambda(a, s_count);
    cfg.validate();
    const SdpSolution sol = sdp_solve(a, cfg);

    std::string certified = "undefined";
    if (sol.rank1_gap < 1e-6)
        certified = check_rank1_certificate(a, cfg.lambda, sol, 1e-6) ? "true" : "false";

    const fs::path dir = prepare_output(c.out);
    RunManifest m = start_manifest(c, dir, 0);
    m.effective = {{"input", input}, {"lambda", format_double(cfg.lambda)}};
    if (s_count > 0)
        m.effective["s"] = std::to_string(s_count);
    echo_sdp(m.effective, cfg);
    emit(dir, "z.csv", m, [&](std::ostream& o) { write_matrix_csv(sol.z, o); });
    emit(dir, "sdp_diagnostics.csv", m, [&](std::ostream& o) {
        o << "lambda,objective,iterations,converged,residual,rank1_gap,certified\n"
          << format_double(cfg.lambda) << ',' << format_double(sol.objective) << ','
          << sol.iterations << ',' << (sol.converged ? "true" : "false") << ','
          << format_double(sol.residual) << ',' << format_double(sol.rank1_gap) << ','
          << certified << '\n';
    });
    if (s_count > 0) {
        const SignedSupport signs = sdp_sign_recover(sol, s_count);
        emit(dir, "signs.csv", m, [&](std::ostream& o) {
            o << "sign\n";
            for (int v : signs.signs)
                o << v << '\n';
        });
    }
    finish_manifest(dir, m);
    if (!sol.converged) {
        std::cerr << "sirsupp: SDP did not converge after " << sol.iterations << " iterations\n";
        return kNumericalError;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Signed support recovery for sparse single index models"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::vector<Command> cmds;
    cmds.reserve(5);

    Command& sim = add_command(app, cmds, "simulate", "draw a synthetic dataset (data.csv, beta.csv)");
    for (const char* k : {"model", "noise-sd", "p", "s", "sparsity", "n", "beta-scheme"})
        sim.flag(k, "simulation setting");

    Command& curve = add_command(app, cmds, "curve", "efficiency curve sweep (curve.csv)");
    for (const char* k : {"model", "noise-sd", "p", "s", "sparsity", "beta-scheme", "method", "mode", "H",
                          "gamma-grid", "reps", "lambda", "workers", "backend", "max-iter", "tol", "step"})
        curve.flag(k, "curve setting");

    Command& diag = add_command(app, cmds, "diagnose", "sliced-stability diagnostic (diagnostic_*.csv)");
    for (const char* k : {"model", "noise-sd", "h-grid", "mc-n"})
        diag.flag(k, "diagnostic setting");

    Command& rec = add_command(app, cmds, "recover", "rank variables of a CSV table (report.csv)");
    for (const char* k : {"input", "y-column", "s", "H", "method", "lambda", "backend", "max-iter", "tol", "step"})
        rec.flag(k, "recovery setting");

    Command& sdp = add_command(app, cmds, "sdp-solve", "solve the penalized SDP on a matrix CSV (z.csv)");
    for (const char* k : {"input", "lambda", "s", "backend", "max-iter", "tol", "step"})
        sdp.flag(k, "solver setting");

    // --workers is accepted everywhere for uniformity; only curve uses it.
    for (Command* c : {&sim, &diag, &rec, &sdp})
        c->flag("workers", "worker threads (unused by this command)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*sim.app)
            return run_simulate(sim);
        if (*curve.app)
            return run_curve_command(curve);
        if (*diag.app)
            return run_diagnose(diag);
        if (*rec.app)
            return run_recover(rec);
        if (*sdp.app)
            return run_sdp_solve(sdp);
    } catch (const NumericalError& e) {
        std::cerr << "sirsupp: numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "sirsupp: invalid value: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::out_of_range& e) {
        std::cerr << "sirsupp: value out of range: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "sirsupp: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
