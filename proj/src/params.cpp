#include "sglab/params.hpp"

#include <cmath>

namespace sglab {

GuardedExp guarded_exp(double arg)
{
    if (arg < kUnderflowArg) return {0.0, true};
    return {std::exp(arg), false};
}

void SGParams::validate() const
{
    const double all[] = {mass, moment, B0, gradient_b, tau, sigma0, vy, hbar};
    for (double v : all) {
        if (!std::isfinite(v)) throw std::invalid_argument("SGParams: non-finite field");
    }
    if (mass <= 0) throw std::invalid_argument("SGParams: mass must be > 0");
    if (moment <= 0) throw std::invalid_argument("SGParams: moment must be > 0");
    if (sigma0 <= 0) throw std::invalid_argument("SGParams: sigma0 must be > 0");
    if (hbar <= 0) throw std::invalid_argument("SGParams: hbar must be > 0");
    if (tau < 0) throw std::invalid_argument("SGParams: tau must be >= 0");
    if (B0 < 0) throw std::invalid_argument("SGParams: B0 must be >= 0");
    if (gradient_b < 0) throw std::invalid_argument("SGParams: gradient_b must be >= 0");
    if (vy < 0) throw std::invalid_argument("SGParams: vy must be >= 0");
}

SGParams SGParams::from_groups(double P, double K, double r, double vy)
{
    if (!(P >= 0) || !(K >= 0) || !std::isfinite(P) || !std::isfinite(K))
        throw std::invalid_argument("from_groups: P and K must be finite and >= 0");
    if ((P == 0.0) != (K == 0.0))
        throw std::invalid_argument("from_groups: P and K must both be zero or both positive");
    if (!(r > 0)) throw std::invalid_argument("from_groups: r must be > 0");

    SGParams p;
    p.mass = 1.0;
    p.moment = 1.0;
    p.sigma0 = 1.0;
    p.hbar = 1.0;
    p.vy = vy;
    if (K == 0.0) {
        p.tau = 1.0;
        p.gradient_b = 0.0;
        p.B0 = 1.0 / r;
        return p;
    }
    // K = vz, P = vz*tau, vz = b*tau
    p.tau = P / K;
    p.gradient_b = K / p.tau;
    p.B0 = p.gradient_b / r;
    return p;
}

DerivedParams derive(const SGParams& params)
{
    params.validate();
    DerivedParams d;
    d.vz = params.moment * params.gradient_b * params.tau / params.mass;
    d.ky = params.mass * params.vy / params.hbar;
    d.kz = params.mass * d.vz / params.hbar;
    d.P = d.vz * params.tau / params.sigma0;
    d.K = d.kz * params.sigma0;
    d.t_spread = 2.0 * params.mass * params.sigma0 * params.sigma0 / params.hbar;
    if (params.B0 > 0) {
        d.r = params.gradient_b * params.sigma0 / params.B0;
    } else {
        d.r = std::numeric_limits<double>::infinity();
        d.r_infinite = true;
    }
    return d;
}

ComplexWidth width_at(const SGParams& params, double t)
{
    const double a = params.hbar * t / (2.0 * params.mass * params.sigma0 * params.sigma0);
    ComplexWidth w;
    w.s = params.sigma0 * cplx(1.0, a);
    w.sigma = params.sigma0 * std::hypot(1.0, a);
    return w;
}

std::string to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

}  // namespace sglab
