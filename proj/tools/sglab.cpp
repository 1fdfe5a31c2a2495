// sglab: Stern-Gerlach nonidealness sweeps, solver validation and
// no-signaling audits.
//
// Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
// 3 Forbidden regime (I > M_s) or inequality violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sglab/config.hpp"
#include "sglab/epr_signal.hpp"
#include "sglab/pauli_solver.hpp"
#include "sglab/sweep.hpp"

namespace {

using namespace sglab;

struct Overrides {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    double epsilon = 0.0;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "Run configuration (key = value with [sections])")
        ->envname("SGLAB_CONFIG");
    cmd->add_option("--out", o.out, "Output directory")->envname("SGLAB_OUT");
    cmd->add_option("--seed", o.seed, "Seed for randomized suites and random sweeps")->envname("SGLAB_SEED");
    cmd->add_option("--threads", o.threads, "Worker threads")->envname("SGLAB_THREADS")->check(CLI::PositiveNumber);
    cmd->add_option("--epsilon", o.epsilon, "Regime threshold")->envname("SGLAB_EPSILON");
}

SweepConfig resolve(const CLI::App* cmd, const Overrides& o)
{
    // Precedence: flag, then SGLAB_* environment variable, then config file.
    SweepConfig cfg = o.config.empty() ? config_from(IniDocument::parse("")) : load_config(o.config);
    const auto given = [&](const char* name) { return cmd->get_option(name)->count() > 0; };
    if (given("--out")) cfg.out = o.out;
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--threads")) cfg.threads = o.threads;
    if (given("--epsilon")) cfg.epsilon = o.epsilon;
    cfg.validate();
    return cfg;
}

int cmd_sweep(const SweepConfig& cfg)
{
    const SweepResult res = run_sweep(cfg);
    std::cout << format_summary(res.summary);
    if (res.exit_code == 3)
        std::cerr << "sglab: " << res.summary.forbidden << " Forbidden row(s): I > M_s (implementation bug)\n";
    return res.exit_code;
}

int cmd_solve(const SweepConfig& cfg)
{
    std::filesystem::create_directories(cfg.out);
    const std::string snap = (std::filesystem::path(cfg.out) / "exit_snapshot.bin").string();
    const SolverReport rep = run_solver_validation(cfg.solver, snap);
    const std::string text = rep.to_text();
    std::ofstream((std::filesystem::path(cfg.out) / "solve_report.txt").string()) << text;
    std::cout << text;
    return rep.all_pass() ? 0 : 2;
}

int cmd_audit(const SweepConfig& cfg)
{
    const double t1 = cfg.t1_seconds.empty() ? 0.0 : cfg.t1_seconds.front();
    const AuditReport a = signaling_audit(cfg.base, t1, cfg.epsilon);
    const DerivedParams d = derive(cfg.base);
    nlohmann::json j;
    j["P"] = d.P;
    j["K"] = d.K;
    j["I"] = a.I;
    j["delta_max"] = a.delta_max;
    j["M_s"] = a.M_s;
    j["M_t"] = a.M_t;
    j["t1"] = t1;
    j["regime"] = to_string(a.regime);
    j["verdict_ok"] = a.verdict_ok;
    j["sigma_x"] = {{"expect_sg", a.signal.expect_sg},
                    {"delta_re", a.signal.delta.real()},
                    {"delta_im", a.signal.delta.imag()},
                    {"delta_abs", a.signal.delta_abs},
                    {"delta_symmetrized", a.signal.delta_symmetrized},
                    {"audit_ok", a.signal.audit_ok}};
    std::cout << j.dump(2) << "\n";
    return a.verdict_ok ? 0 : 3;
}

int cmd_schwarz(const SweepConfig& cfg, std::size_t count)
{
    const SchwarzSuiteReport r = run_schwarz_suite(count, cfg.seed);
    nlohmann::json j;
    j["count"] = r.count;
    j["failures"] = r.failures;
    j["min_margin"] = r.min_margin;
    j["max_equality_error"] = r.max_equality_error;
    j["strict_phase_mask"] = r.strict;
    std::cout << j.dump(2) << "\n";
    return r.failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stern-Gerlach nonidealness laboratory"};
    app.require_subcommand(1);

    Overrides sweep_o, solve_o, audit_o, schwarz_o;
    std::size_t count = 1000;
    auto* sweep = app.add_subcommand("sweep", "Metric sweep over parameter space (CSV + summary)");
    auto* solve = app.add_subcommand("solve", "Pauli solver validation battery");
    auto* audit = app.add_subcommand("audit", "No-signaling report for the [params] setup");
    auto* schwarz = app.add_subcommand("schwarz", "Randomized modulus-overlap inequality run");
    add_common(sweep, sweep_o);
    add_common(solve, solve_o);
    add_common(audit, audit_o);
    add_common(schwarz, schwarz_o);
    schwarz->add_option("--count", count, "Number of random function pairs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*sweep) return cmd_sweep(resolve(sweep, sweep_o));
        if (*solve) return cmd_solve(resolve(solve, solve_o));
        if (*audit) return cmd_audit(resolve(audit, audit_o));
        if (*schwarz) return cmd_schwarz(resolve(schwarz, schwarz_o), count);
    } catch (const ConfigError& e) {
        std::cerr << "sglab: config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "sglab: invalid argument: " << e.what() << "\n";
        return 1;
    } catch (const ForbiddenRegimeError& e) {
        std::cerr << "sglab: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "sglab: non-convergence: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "sglab: solver: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "sglab: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
