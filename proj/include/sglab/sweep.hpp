#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sglab/config.hpp"
#include "sglab/overlap_metrics.hpp"
#include "sglab/params.hpp"

namespace sglab {

inline constexpr const char* kSweepSchema = "sglab.sweep/1";

/// Pinned CSV column list for schema sglab.sweep/1.
const std::vector<std::string>& sweep_columns();

struct SweepRow {
    std::size_t point = 0;
    SGParams params;
    DerivedParams derived;
    double t1 = 0.0;
    MetricsRecord metrics;
    bool inner_from_quadrature = false;
    double delta_max = 0.0;
    bool audit_ok = true;
};

struct SweepSummary {
    std::size_t points = 0;
    std::size_t rows = 0;
    std::map<std::string, std::size_t> regimes;
    std::optional<double> min_margin;  // min(M_s - I)
    std::optional<double> max_delta_max;
    std::size_t forbidden = 0;
    std::size_t underflow = 0;
};

/// Parameter points in deterministic order (last axis fastest, or seeded
/// random draws when random_points > 0).
std::vector<SGParams> expand_points(const SweepConfig& config);

/// Evaluation times for one point: t1 list, then t1_spread multiples.
std::vector<double> evaluation_times(const SweepConfig& config, const SGParams& point);

/// Rows in point-major, time-minor order; points are evaluated on
/// config.threads workers.
std::vector<SweepRow> compute_rows(const SweepConfig& config);

SweepSummary summarize(const std::vector<SweepRow>& rows, std::size_t points);

std::string format_csv(const std::vector<SweepRow>& rows);
std::string format_summary(const SweepSummary& summary);

/// Long-format tables for external plotting.
struct PlotData {
    std::string ratio;       // point,P,K,I,M_s,ratio
    std::string saturation;  // point,t1,t1_over_tspread,M
    std::string audit;       // point,delta_max,M_s,ok
};

PlotData emit_plotdata(const std::vector<SweepRow>& rows, std::size_t curves);

struct SweepResult {
    std::vector<SweepRow> rows;
    SweepSummary summary;
    int exit_code = 0;  // 0 ok, 3 Forbidden rows present
};

/// Computes the sweep and writes sweep.csv, summary.json and plot_*.csv
/// to config.out. Files appear all together or not at all.
SweepResult run_sweep(const SweepConfig& config);

/// Solver acceptance battery.
struct CheckResult {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string detail;
};

struct SolverReport {
    std::vector<CheckResult> checks;
    std::vector<double> discrepancies;  // coupled vs decoupled, per r
    bool all_pass() const;
    std::string to_text() const;
};

/// Runs the decoupled-vs-analytic, dt halving, coupled order, momentum,
/// norm, snapshot inequality, decoupling trend and free-particle checks.
/// Writes the exit-time snapshot when snapshot_path is non-empty.
SolverReport run_solver_validation(const SolverSettings& settings, const std::string& snapshot_path = "");

/// Random complex function pairs for the Cauchy-Schwarz property.
enum class PairFamily { Independent, PhaseMask, Equal };

struct FunctionPair {
    SampledFunction f;
    SampledFunction g;
    Window window;
    PairFamily family = PairFamily::Independent;
};

FunctionPair random_function_pair(std::mt19937_64& rng, PairFamily family);

struct SchwarzSuiteReport {
    std::size_t count = 0;
    std::size_t failures = 0;
    double min_margin = 0.0;         // min(lhs - rhs), non-equality families
    double max_equality_error = 0.0; // max |lhs - rhs| on g = f
    std::size_t strict = 0;          // PhaseMask pairs with lhs > rhs
};

SchwarzSuiteReport run_schwarz_suite(std::size_t count, std::uint64_t seed);

}  // namespace sglab
