// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sglab/epr_signal.hpp"
#include "sglab/overlap_metrics.hpp"
#include "sglab/pauli_solver.hpp"
#include "sglab/sweep.hpp"

using namespace sglab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail)
{
    std::printf("CRITERION %2d %-4s %s: %s\n", id, pass ? "PASS" : "FAIL", title, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const CheckResult* find(const SolverReport& r, const std::string& name)
{
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

void closed_vs_quadrature()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> uP(0.0, 10.0), uK(0.0, 5.0);
    double worst_I = 0.0, worst_M = 0.0;
    const int n = 120;
    for (int i = 0; i < n; ++i) {
        const SGParams p = SGParams::from_groups(uP(rng), uK(rng));
        const double ts = derive(p).t_spread;
        worst_I = std::max(worst_I, std::abs(inner_product_closed(p).value - std::abs(inner_product_numeric(p, 0.0))));
        for (double t1 : {0.0, ts, 10 * ts})
            worst_M = std::max(worst_M, std::abs(overlap_M_closed(p, t1).value - overlap_M_numeric(p, t1)));
    }
    const double secs = seconds_since(t0);
    report(1, "closed-form/quadrature agreement", worst_I < 1e-8 && worst_M < 1e-8 && secs < 120,
           fmt("%.0f sets, max|dI|=%.3e max|dM|=%.3e, %.1f s", double(n), worst_I, worst_M, secs));
}

void constraint_corpus()
{
    const auto t0 = std::chrono::steady_clock::now();
    SweepConfig c = config_from(IniDocument::parse("[params]\nunits = natural\nB0 = 100\n"
                                                   "[sweep]\nP = lin 0.1 10 100\nK = lin 0.05 5 100\n"));
    const auto rows = compute_rows(c);
    const SweepSummary s = summarize(rows, c.point_count());
    double worst_ratio = 0.0;
    std::size_t ratio_rows = 0;
    for (const SweepRow& r : rows) {
        const MetricsRecord& m = r.metrics;
        if (m.underflow || m.I == 0.0 || m.M_s == 0.0) continue;
        const double expect = std::exp(-r.derived.P * r.derived.P / 8);
        worst_ratio = std::max(worst_ratio, std::abs(m.I / m.M_s - expect) / expect);
        ++ratio_rows;
    }
    const double secs = seconds_since(t0);
    const double margin = s.min_margin.value_or(0.0);
    report(2, "constraint corpus M_s >= I",
           s.points == 10000 && s.forbidden == 0 && margin >= -1e-12 && worst_ratio <= 1e-12 && secs < 60,
           fmt("%.0f points, Forbidden=%.0f, min(M_s-I)=%.3e, ratio rel err=%.3e", double(s.points),
               double(s.forbidden), margin, worst_ratio) +
               fmt(" over %.0f rows, %.2f s", double(ratio_rows), secs));
}

void saturation()
{
    const SGParams p = SGParams::from_groups(2, 1);
    const double ts = derive(p).t_spread;
    const SaturationTime st = saturation_time(p);
    const double Ms = std::exp(-2.0);
    double worst = 0.0;
    // dense log grid from t_s to 1e6 t_spread, t_s itself included
    for (int i = 0; i <= 20000; ++i) {
        const double t = st.t_s * std::pow(1e6 * ts / st.t_s, i / 20000.0);
        worst = std::max(worst, std::abs(overlap_M_closed(p, t).value - Ms) / Ms);
    }
    const double late = overlap_M_closed(p, 1e4 * ts).value;
    const double rel = std::abs(M_saturated(p).value - late) / late;
    // where the 1e-6 agreement first holds, to 5%
    double reach = 1e4;
    while (reach < 1e12 &&
           std::abs(M_saturated(p).value - overlap_M_closed(p, reach * ts).value) / M_saturated(p).value > 1e-6)
        reach *= 1.05;
    report(3, "saturation of M(t1)", !st.already_saturated && worst <= 1e-3 && rel <= 1e-6,
           fmt("t_s=%.4f t_spread, max rel|M-exp(-2)| past t_s=%.3e (<= 1e-3 required); "
               "M_s vs M(1e4 t_spread) rel=%.3e (<= 1e-6 required; first reached near t1=%.2e t_spread)",
               st.t_s / ts, worst, rel, reach));
}

void time_invariance()
{
    const SGParams p = SGParams::from_groups(2, 1);
    const double ts = derive(p).t_spread;
    double lo = 1e300, hi = -1e300;
    for (double t1 : {0.0, 0.5 * ts, 3 * ts, 25 * ts}) {
        const double v = std::abs(inner_product_numeric(p, t1));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    report(4, "time invariance of I", hi - lo < 1e-9, fmt("spread over 4 times=%.3e (I=%.12f)", hi - lo, hi));
}

void cauchy_schwarz()
{
    const SchwarzSuiteReport r = run_schwarz_suite(1000, 2024);
    report(5, "Cauchy-Schwarz property", r.count == 1000 && r.failures == 0 && r.max_equality_error <= 1e-12,
           fmt("1000 pairs, failures=%.0f, min(lhs-rhs)=%.3e, g=f max|lhs-rhs|=%.3e, strict phase-mask=%.0f",
               double(r.failures), r.min_margin, r.max_equality_error, double(r.strict)));
}

void signaling_audit_check()
{
    const SGParams p = SGParams::from_groups(2, 1);
    const cplx inner = std::conj(inner_product_numeric(p, 0.0));  // <psi-|psi+>
    const double I = inner_product_closed(p).value;

    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    double best = 0.0;
    for (int i = 0; i < 1000; ++i)
        best = std::max(best, delta(SpinObservable::direction({n(rng), n(rng), n(rng)}), inner).delta_abs);
    const bool max_ok = std::abs(best - I) <= 1e-3;

    bool zeros = true;
    for (int i = 0; i < 100; ++i) {
        const SpinObservable diag(n(rng), 0.0, 0.0, n(rng));
        zeros = zeros && delta(diag, inner).delta == cplx(0.0) && delta(diag, inner).delta_symmetrized == 0.0;
        const SpinObservable any = SpinObservable::direction({n(rng), n(rng), n(rng)});
        zeros = zeros && delta(any, 0.0).delta == cplx(0.0) && delta(any, 0.0).delta_symmetrized == 0.0;
    }

    double worst = 0.0;
    std::uniform_real_distribution<double> r01(0.0, 1.0), ph(-kPi, kPi);
    for (int i = 0; i < 20; ++i) {
        const auto A = oracle::random_hermitian(rng);
        const SpinObservable obs(A[0], A[1], A[2], A[3]);
        const cplx in = std::polar(r01(rng), ph(rng));
        worst = std::max(worst, std::abs(oracle::reduced_expectation(oracle::state_after_magnet(in), A) -
                                         expectation_sg(obs)));
        worst = std::max(worst, std::abs(oracle::reduced_expectation(oracle::state_after_flip(in), A) -
                                         expectation_sg_sf_symmetrized(obs, in)));
    }
    const AuditReport a = signaling_audit(p, 0.0);
    report(6, "signaling audit Delta_max = I", max_ok && zeros && worst <= 1e-12 && a.verdict_ok,
           fmt("brute max|Delta|=%.6f vs I=%.6f (diff %.2e), partial-trace max err=%.3e", best, I, std::abs(best - I),
               worst) +
               (zeros ? ", Delta=0 for diagonal A and I=0" : ", nonzero Delta for diagonal A or I=0"));
}

void solver_checks()
{
    const fs::path snap = fs::temp_directory_path() / "sglab_acceptance_snapshot.bin";
    const SolverReport rep = run_solver_validation(SolverSettings{}, snap.string());
    std::printf("%s", rep.to_text().c_str());

    const auto* l2 = find(rep, "decoupled_vs_analytic_l2");
    const auto* rt = find(rep, "decoupled_runtime_s");
    const auto* pz = find(rep, "momentum_pz_relative");
    const auto* drift = find(rep, "norm_drift_per_1000_steps");
    const auto* halving = find(rep, "dt_halving_ratio");
    const auto* order = find(rep, "coupled_second_order_ratio");
    const auto* trend = find(rep, "decoupling_trend");
    const bool pass7 = l2 && rt && pz && drift && halving && order && l2->pass && rt->pass && pz->pass && drift->pass &&
                       halving->pass && order->pass;
    report(7, "Pauli solver validation", pass7,
           fmt("L2=%.3e in %.1f s, pz rel=%.3e, drift/1e3 steps=%.3e", l2 ? l2->measured : -1, rt ? rt->measured : -1,
               pz ? pz->measured : -1, drift ? drift->measured : -1) +
               fmt(", decoupled dt-halving ratio=%.3g (floor clause), coupled dt-halving ratio=%.3f",
                   halving ? halving->measured : -1, order ? order->measured : -1));
    report(8, "decoupling trend over r", trend && trend->pass, trend ? trend->detail : "missing");

    // the snapshot written by the run reads back
    bool snap_ok = false;
    try {
        snap_ok = read_snapshot(snap.string()).grid.nx == SolverSettings{}.n;
    } catch (const std::exception&) {
    }
    fs::remove(snap);
    if (!snap_ok) report(7, "snapshot readback", false, "exit snapshot could not be read back");
}

void half_plane()
{
    const SGParams sym = SGParams::from_groups(0, 0, 0.01, 50.0);
    const HalfPlaneProbs s = half_plane_probs(sym, 0.0);
    const bool sym_ok = std::abs(s.alpha2 - 0.5) <= 1e-10 && std::abs(s.beta2 - 0.5) <= 1e-10;

    const SGParams ideal = SGParams::from_groups(20, 10, 0.01, 5.0);
    const HalfPlaneProbs id = half_plane_probs(ideal, 10 * derive(ideal).t_spread);
    const bool ideal_ok = id.alpha2 < 1e-6 && id.beta2 > (1 - 1e-3) * id.upper_mass;

    double worst = 0.0;
    for (auto [P, K, t1] : {std::tuple{2.0, 1.0, 0.0}, std::tuple{0.7, 0.2, 1.5}, std::tuple{3.0, 1.5, 6.0},
                            std::tuple{0.0, 0.0, 0.0}}) {
        const SGParams p = SGParams::from_groups(P, K, 0.01, 0.5);
        const HalfPlaneProbs a = half_plane_probs(p, t1), q = half_plane_probs_numeric(p, t1);
        for (double d : {a.alpha2 - q.alpha2, a.beta2 - q.beta2, a.alpha2_mirror - q.alpha2_mirror,
                         a.beta2_mirror - q.beta2_mirror})
            worst = std::max(worst, std::abs(d));
    }
    report(9, "half-plane probabilities", sym_ok && ideal_ok && worst <= 1e-10,
           fmt("symmetric alpha2=%.12f beta2=%.12f; ideal alpha2=%.3e beta2/upper=%.9f", s.alpha2, s.beta2, id.alpha2,
               id.beta2 / id.upper_mass) +
               fmt("; erfc vs 2D quadrature max err=%.3e", worst));
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism()
{
    const fs::path base = fs::temp_directory_path() / "sglab_acceptance_det";
    fs::remove_all(base);
    SweepConfig c = config_from(IniDocument::parse("[params]\nunits = natural\nB0 = 100\n"
                                                   "[sweep]\nP = lin 0.1 10 40\nK = lin 0.05 5 40\n"
                                                   "[times]\nt1_spread = 0, 1, 10\n[run]\nseed = 99\n"));
    c.out = (base / "a").string();
    run_sweep(c);
    c.out = (base / "b").string();
    c.threads = 3;
    run_sweep(c);
    const std::string a = slurp(base / "a" / "sweep.csv"), b = slurp(base / "b" / "sweep.csv");
    fs::remove_all(base);
    report(10, "sweep determinism", !a.empty() && a == b,
           fmt("two runs (1 and 3 threads), %.0f bytes each, identical=%.0f", double(a.size()), double(a == b)));
}

}  // namespace

int main()
{
    const auto t0 = std::chrono::steady_clock::now();
    try {
        closed_vs_quadrature();
        constraint_corpus();
        saturation();
        time_invariance();
        cauchy_schwarz();
        signaling_audit_check();
        solver_checks();
        half_plane();
        determinism();
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("acceptance: %d failing criteria, %.1f s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
