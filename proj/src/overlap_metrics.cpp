#include "sglab/overlap_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sglab/analytic_packets.hpp"

namespace sglab {

std::string to_string(Regime r)
{
    switch (r) {
    case Regime::Ideal: return "Ideal";
    case Regime::GeneralNonideal: return "GeneralNonideal";
    case Regime::Forbidden: return "Forbidden";
    }
    return "?";
}

GuardedExp inner_product_closed(const SGParams& params)
{
    const DerivedParams d = derive(params);
    return guarded_exp(-d.P * d.P / 8.0 - 2.0 * d.K * d.K);
}

GuardedExp overlap_M_closed(const SGParams& params, double t1)
{
    if (!(t1 >= 0)) throw std::invalid_argument("overlap_M_closed: t1 must be >= 0");
    const DerivedParams d = derive(params);
    const double sigma = width_at(params, params.tau + t1).sigma;
    const double sep = d.vz * (params.tau + 2.0 * t1);
    return guarded_exp(-sep * sep / (8.0 * sigma * sigma));
}

GuardedExp M_saturated(const SGParams& params)
{
    const DerivedParams d = derive(params);
    return guarded_exp(-2.0 * d.K * d.K);
}

namespace {

Window pair_window(const AxisFactor& a, const AxisFactor& b, const QuadratureSpec& spec, bool oscillating)
{
    const double w = std::max(a.width(), b.width());
    Window win;
    win.lo = std::min(a.center, b.center) - spec.extent_widths * w;
    win.hi = std::max(a.center, b.center) + spec.extent_widths * w;
    if (oscillating) {
        // conj(a) b: the common chirp cancels; what remains is the wavenumber
        // difference plus a linear chirp term from the center offset.
        const double alpha = a.s.imag() / a.s.real();
        win.max_wavenumber =
            std::abs(a.k - b.k) + alpha * std::abs(a.center - b.center) / (2.0 * w * w);
    }
    return win;
}

}  // namespace

cplx inner_product_numeric(const SGParams& params, double t1, const QuadratureSpec& spec)
{
    const SeparablePacket plus = packet_free(t1, Branch::Plus, params);
    const SeparablePacket minus = packet_free(t1, Branch::Minus, params);
    cplx result = std::polar(1.0, plus.phase - minus.phase);
    for (std::size_t ax = 0; ax < 3; ++ax) {
        const AxisFactor& fp = plus.axes[ax];
        const AxisFactor& fm = minus.axes[ax];
        result *= integrate([&](double u) { return std::conj(fp(u)) * fm(u); },
                            pair_window(fp, fm, spec, true), spec);
    }
    return result;
}

double overlap_M_numeric(const SGParams& params, double t1, const QuadratureSpec& spec)
{
    const SeparablePacket plus = packet_free(t1, Branch::Plus, params);
    const SeparablePacket minus = packet_free(t1, Branch::Minus, params);
    double result = 1.0;
    for (std::size_t ax = 0; ax < 3; ++ax) {
        const AxisFactor& fp = plus.axes[ax];
        const AxisFactor& fm = minus.axes[ax];
        result *= integrate([&](double u) { return fp.modulus(u) * fm.modulus(u); },
                            pair_window(fp, fm, spec, false), spec);
    }
    return result;
}

SaturationTime saturation_time(const SGParams& params, double rel_tol)
{
    if (!(rel_tol > 0.0 && rel_tol < 0.1))
        throw std::invalid_argument("saturation_time: rel_tol must lie in (0, 0.1)");
    const DerivedParams d = derive(params);
    const double Ms = M_saturated(params).value;
    auto saturated = [&](double t1) {
        return std::abs(overlap_M_closed(params, t1).value - Ms) <= rel_tol * Ms;
    };
    if (d.vz == 0.0 || saturated(0.0)) return {0.0, true};

    const double resolution = 1e-3 * d.t_spread;
    const double horizon = 1e12 * d.t_spread;
    double lo = 0.0;
    double hi = d.t_spread;
    for (;;) {
        while (!saturated(hi)) {
            lo = hi;
            hi *= 2.0;
            if (hi > horizon) throw ConvergenceError("saturation_time: M(t1) does not approach M_s");
        }
        while (hi - lo > resolution) {
            const double mid = 0.5 * (lo + hi);
            if (saturated(mid)) hi = mid;
            else lo = mid;
        }
        // Every later sample must stay inside the band; otherwise restart
        // the search past the offending sample.
        double bad = -1.0;
        for (double t = hi; t <= 1e4 * d.t_spread; t *= 1.25) {
            if (!saturated(t)) bad = t;
        }
        if (bad < 0.0) return {hi, false};
        lo = bad;
        hi = 2.0 * bad;
    }
}

namespace {

// P(u > 0) for a Gaussian density with the given center and std deviation.
double upper_tail(double center, double sigma)
{
    return 0.5 * std::erfc(-center / (std::sqrt(2.0) * sigma));
}

}  // namespace

HalfPlaneProbs half_plane_probs(const SGParams& params, double t1)
{
    const SeparablePacket plus = packet_free(t1, Branch::Plus, params);
    const SeparablePacket minus = packet_free(t1, Branch::Minus, params);

    HalfPlaneProbs out;
    out.upper_mass = upper_tail(plus.axes[1].center, plus.axes[1].width());
    const double plus_z_up = upper_tail(plus.axes[2].center, plus.axes[2].width());
    const double plus_z_dn = upper_tail(-plus.axes[2].center, plus.axes[2].width());
    const double minus_z_up = upper_tail(minus.axes[2].center, minus.axes[2].width());
    const double minus_z_dn = upper_tail(-minus.axes[2].center, minus.axes[2].width());
    const double minus_y_up = upper_tail(minus.axes[1].center, minus.axes[1].width());

    out.alpha2 = out.upper_mass * plus_z_dn;
    out.beta2 = out.upper_mass * plus_z_up;
    out.alpha2_mirror = minus_y_up * minus_z_up;
    out.beta2_mirror = minus_y_up * minus_z_dn;
    return out;
}

HalfPlaneProbs half_plane_probs_numeric(const SGParams& params, double t1, const QuadratureSpec& spec)
{
    const SeparablePacket plus = packet_free(t1, Branch::Plus, params);
    const SeparablePacket minus = packet_free(t1, Branch::Minus, params);
    const double ext = spec.extent_widths;

    auto density_x = [](const SeparablePacket& pk) {
        const AxisFactor& fx = pk.axes[0];
        Window w{fx.center - 12.0 * fx.width(), fx.center + 12.0 * fx.width(), 0.0};
        QuadratureSpec s;
        return integrate([&](double u) { return std::norm(fx(u)); }, w, s);
    };

    // Integrates |psi(.,y,z)|^2 over y in (0, inf) and z in (z_lo, z_hi),
    // clipped to the Gaussian's +/- ext window.
    auto quadrant = [&](const SeparablePacket& pk, bool z_positive) {
        const AxisFactor& fy = pk.axes[1];
        const AxisFactor& fz = pk.axes[2];
        const double y_lo = std::max(0.0, fy.center - ext * fy.width());
        const double y_hi = fy.center + ext * fy.width();
        double z_lo = fz.center - ext * fz.width();
        double z_hi = fz.center + ext * fz.width();
        if (z_positive) z_lo = std::max(z_lo, 0.0);
        else z_hi = std::min(z_hi, 0.0);
        if (!(y_hi > y_lo) || !(z_hi > z_lo)) return 0.0;
        auto row = [&](double y) {
            return romberg([&](double z) { return std::norm(fy(y) * fz(z) * std::polar(1.0, -pk.phase)); },
                           z_lo, z_hi, 1e-15);
        };
        return romberg(row, y_lo, y_hi, 1e-14);
    };

    HalfPlaneProbs out;
    const double xp = density_x(plus);
    const double xm = density_x(minus);
    out.alpha2 = xp * quadrant(plus, false);
    out.beta2 = xp * quadrant(plus, true);
    out.alpha2_mirror = xm * quadrant(minus, true);
    out.beta2_mirror = xm * quadrant(minus, false);
    const AxisFactor& fy = plus.axes[1];
    out.upper_mass = romberg([&](double y) { return std::norm(fy(y)); },
                             std::max(0.0, fy.center - ext * fy.width()), fy.center + ext * fy.width(), 1e-15);
    return out;
}

ConstraintVerdict check_constraint(const SGParams& params, double epsilon)
{
    const GuardedExp I = inner_product_closed(params);
    const GuardedExp Ms = M_saturated(params);
    ConstraintVerdict v;
    v.I = I.value;
    v.M_s = Ms.value;
    v.underflow = I.underflow || Ms.underflow;
    v.constraint_ok = v.M_s >= v.I - kInequalitySlack;
    if (v.I > v.M_s + kInequalitySlack) v.regime = Regime::Forbidden;
    else if (v.I < epsilon && v.M_s < epsilon) v.regime = Regime::Ideal;
    else v.regime = Regime::GeneralNonideal;
    return v;
}

void enforce_constraint(const ConstraintVerdict& verdict)
{
    if (verdict.regime == Regime::Forbidden) {
        throw ForbiddenRegimeError("Forbidden regime: I = " + std::to_string(verdict.I) +
                                   " exceeds M_s = " + std::to_string(verdict.M_s));
    }
}

MetricsRecord compute_metrics(const SGParams& params, double t1, double epsilon,
                              const std::optional<QuadratureSpec>& spec)
{
    const ConstraintVerdict verdict = check_constraint(params, epsilon);
    const GuardedExp Mt = overlap_M_closed(params, t1);
    const HalfPlaneProbs hp = half_plane_probs(params, t1);

    MetricsRecord rec;
    rec.I = verdict.I;
    rec.M_s = verdict.M_s;
    rec.M_t = Mt.value;
    rec.alpha2 = hp.alpha2;
    rec.beta2 = hp.beta2;
    rec.regime = verdict.regime;
    rec.constraint_ok = verdict.constraint_ok;
    rec.underflow = verdict.underflow || Mt.underflow;
    rec.inner_complex = spec ? inner_product_numeric(params, t1, *spec) : cplx(rec.I, 0.0);
    rec.t_s = saturation_time(params);
    return rec;
}

SchwarzResult cauchy_schwarz_property(const SampledFunction& f, const SampledFunction& g,
                                      const Window& window, const QuadratureSpec& spec)
{
    SchwarzResult r;
    Window modulus_window = window;
    modulus_window.max_wavenumber = 0.0;
    r.lhs = integrate([&](double u) { return std::abs(f(u)) * std::abs(g(u)); }, modulus_window, spec);
    r.rhs = std::abs(integrate([&](double u) { return std::conj(f(u)) * g(u); }, window, spec));
    r.ok = r.lhs >= r.rhs - 1e-10;
    return r;
}

}  // namespace sglab
