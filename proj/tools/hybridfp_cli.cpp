#include "hybridfp/config.hpp"
#include "hybridfp/trace_io.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace hybridfp;

namespace {

enum Exit { kOk = 0, kConfig = 1, kMaxIters = 2, kSolver = 3, kVerify = 4 };

int exit_code(TerminalStatus s) {
    switch (s) {
        case TerminalStatus::Converged: return kOk;
        case TerminalStatus::MaxIters: return kMaxIters;
        case TerminalStatus::InnerSolveFailed:
        case TerminalStatus::InfeasibleLedger: return kSolver;
    }
    return kSolver;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("hybridfp");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("HYBRIDFP_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off")
            spdlog::warn("HYBRIDFP_LOG='{}' not recognised; using warn", env);
        else
            spdlog::set_level(level);
    }
}

RunConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
    RunConfig cfg = load_config(path);
    if (seed) cfg.settings.rng_seed = *seed;
    return cfg;
}

void place_outputs(RunConfig& cfg, const std::optional<fs::path>& out_dir) {
    if (!out_dir) return;
    auto name = [](const std::optional<fs::path>& p, const char* fallback) {
        return p ? p->filename() : fs::path(fallback);
    };
    cfg.outputs.trace = *out_dir / name(cfg.outputs.trace, "trace.csv");
    cfg.outputs.summary = *out_dir / name(cfg.outputs.summary, "summary.json");
    cfg.outputs.plot = *out_dir / name(cfg.outputs.plot, "plot.svg");
}

void warn_on_verification(const RunConfig& cfg) {
    const VerificationReport rep = verify_problem(cfg.instance, 64, cfg.settings.rng_seed);
    for (const auto& c : rep.checks)
        if (!c.passed)
            spdlog::warn("{}: sampled check {} failed (worst slack {:.3e} > {:.1e})", cfg.name, c.name, c.worst_slack,
                         c.tolerance);
}

// Runs one config and writes its outputs; returns the exit code.
int execute(RunConfig& cfg, bool print_summary) {
    warn_on_verification(cfg);
    spdlog::info("{}: {} on {}, max_iters {}", cfg.name, cfg.instance.name, cfg.instance.space.describe(),
                 cfg.params.max_iters);
    const IterationTrace trace = run(cfg.instance, cfg.params, cfg.settings, [&](const IterationRecord& r) {
        spdlog::debug("n={} step={:.3e} phi={:.6e} rxy={:.3e} rfp={:.3e}", r.n, r.step_norm, r.phi_anchor,
                      r.residual_xy, r.residual_fp);
    });
    if (!trace.message.empty()) spdlog::info("{}: {}", cfg.name, trace.message);
    try {
        if (cfg.outputs.trace) {
            write_text(*cfg.outputs.trace, trace_csv(trace));
            write_text(sidecar_path(*cfg.outputs.trace), trace_json(trace));
        }
        const std::string summary = summary_json(trace);
        if (cfg.outputs.summary) write_text(*cfg.outputs.summary, summary);
        if (cfg.outputs.plot) {
            if (!cfg.outputs.trace) throw std::runtime_error("outputs.plot requires outputs.trace");
            write_text(*cfg.outputs.plot, render_svg(read_trace_csv(*cfg.outputs.trace), cfg.name));
        }
        if (print_summary) std::cout << summary;
    } catch (const std::exception& e) {
        spdlog::error("{}: {}", cfg.name, e.what());
        return kConfig;
    }
    const int code = exit_code(trace.status);
    if (code == kSolver) std::cerr << cfg.name << ": " << to_string(trace.status) << ": " << trace.message << "\n";
    return code;
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::optional<fs::path>& out) {
    RunConfig cfg = [&] {
        try {
            return load(config, seed);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            std::exit(kConfig);
        }
    }();
    place_outputs(cfg, out);
    return execute(cfg, true);
}

int cmd_verify(const std::string& config, int samples, std::optional<std::uint64_t> seed) {
    std::optional<RunConfig> cfg;
    try {
        cfg.emplace(load(config, seed));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    }
    if (samples < 1) {
        std::cerr << "--samples must be >= 1\n";
        return kConfig;
    }
    bool ok = true;
    const VerificationReport rep = verify_problem(cfg->instance, samples, cfg->settings.rng_seed);
    for (const auto& c : rep.checks) {
        std::printf("%-4s %-48s worst %.3e  tol %.1e  samples %d\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.worst_slack, c.tolerance, c.samples);
        ok = ok && c.passed;
    }
    AlgorithmParams short_params = cfg->params;
    short_params.max_iters = std::min(short_params.max_iters, 50);
    const IterationTrace trace = run(cfg->instance, short_params, cfg->settings);
    const bool run_ok = trace.status == TerminalStatus::Converged || trace.status == TerminalStatus::MaxIters;
    std::printf("%-4s %-48s status %s %s\n", run_ok ? "PASS" : "FAIL", "short_run", to_string(trace.status),
                trace.message.c_str());
    ok = ok && run_ok;
    const InvariantReport inv = check_trace_invariants(trace, cfg->instance);
    static const char* kNames[4] = {"trace_anchor_monotone", "trace_solution_fejer", "trace_ledger_feasible",
                                    "trace_cauchy_bound"};
    for (int i = 0; i < 4; ++i) {
        const bool pass = std::none_of(inv.violations.begin(), inv.violations.end(), [&](const auto& v) {
            return (i == 0 && v.check == "anchor_monotone") ||
                   (i == 1 && (v.check == "key_decrease" || v.check == "solution_in_cut")) ||
                   (i == 2 && v.check == "ledger_feasible") || (i == 3 && v.check == "cauchy_bound");
        });
        std::printf("%-4s %-48s worst %.3e  tol %.1e  records %d\n", pass ? "PASS" : "FAIL", kNames[i], inv.worst[i],
                    1e-8, inv.records_checked);
    }
    ok = ok && inv.passed();
    std::printf("%s\n", ok ? "verify: all checks passed" : "verify: FAILED");
    return ok ? kOk : kVerify;
}

int cmd_plot(const std::string& trace_path, const std::optional<fs::path>& out) {
    try {
        const TraceTable table = read_trace_csv(trace_path);
        fs::path target = out ? *out : fs::path(trace_path).replace_extension(".svg");
        if (fs::is_directory(target)) target /= fs::path(trace_path).filename().replace_extension(".svg");
        write_text(target, render_svg(table, fs::path(trace_path).stem().string()));
        spdlog::info("wrote {}", target.string());
        return kOk;
    } catch (const std::exception& e) {
        std::cerr << "plot: " << e.what() << "\n";
        return kConfig;
    }
}

int cmd_sweep(const std::vector<std::string>& configs, int jobs, std::optional<std::uint64_t> seed,
              const std::optional<fs::path>& out) {
    std::vector<int> codes(configs.size(), kOk);
    std::atomic<std::size_t> next{0};
    std::mutex print;
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            int code;
            try {
                RunConfig cfg = load(configs[i], seed);
                if (out) place_outputs(cfg, *out / fs::path(configs[i]).stem());
                code = execute(cfg, false);
            } catch (const ConfigError& e) {
                std::lock_guard<std::mutex> lock(print);
                std::cerr << configs[i] << ": config error: " << e.what() << "\n";
                code = kConfig;
            }
            codes[i] = code;
            std::lock_guard<std::mutex> lock(print);
            std::printf("%s\texit %d\n", configs[i].c_str(), code);
        }
    };
    const int k = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (int code : {kConfig, kSolver, kMaxIters})
        if (std::find(codes.begin(), codes.end(), code) != codes.end()) return code;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Hybrid projection iteration for equilibrium, variational inequality and fixed point problems"};
    app.require_subcommand(1);

    std::string config, trace_path;
    std::vector<std::string> configs;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out;
    int samples = 256;
    int jobs = 1;

    auto* run_cmd = app.add_subcommand("run", "run the iteration for one config");
    run_cmd->add_option("--config", config, "config JSON")->required();
    run_cmd->add_option("--seed", seed, "override settings.rng_seed");
    run_cmd->add_option("--out", out, "directory for trace.csv, trace.json, summary.json, plot.svg");

    auto* verify_cmd = app.add_subcommand("verify", "sampled property checks and a short traced run");
    verify_cmd->add_option("--config", config, "config JSON")->required();
    verify_cmd->add_option("--samples", samples, "samples per property")->capture_default_str();
    verify_cmd->add_option("--seed", seed, "override settings.rng_seed");

    auto* plot_cmd = app.add_subcommand("plot", "render a trace CSV as SVG");
    plot_cmd->add_option("trace", trace_path, "trace CSV")->required();
    plot_cmd->add_option("--out", out, "output SVG path (or directory)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run several configs concurrently");
    sweep_cmd->add_option("--config", configs, "config JSON (repeatable)")->required();
    sweep_cmd->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", seed, "override settings.rng_seed");
    sweep_cmd->add_option("--out", out, "output directory (one subdirectory per config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    if (*run_cmd) return cmd_run(config, seed, out);
    if (*verify_cmd) return cmd_verify(config, samples, seed);
    if (*plot_cmd) return cmd_plot(trace_path, out);
    if (*sweep_cmd) return cmd_sweep(configs, jobs, seed, out);
    return kConfig;
}
