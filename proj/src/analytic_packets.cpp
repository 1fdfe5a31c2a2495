#include "sglab/analytic_packets.hpp"

#include <cmath>

namespace sglab {

namespace {

cplx axis_prefactor(cplx s) { return std::pow(2.0 * kPi * s * s, -0.25); }

AxisFactor make_axis(double center, double k, double anchor, const SGParams& p, cplx s)
{
    AxisFactor f;
    f.center = center;
    f.k = k;
    f.anchor = anchor;
    f.sigma0 = p.sigma0;
    f.s = s;
    return f;
}

}  // namespace

cplx AxisFactor::operator()(double u) const
{
    const double d = u - center;
    const cplx arg = -d * d / (4.0 * sigma0 * s) + cplx(0.0, k * (u - anchor));
    return axis_prefactor(s) * std::exp(arg);
}

double AxisFactor::modulus(double u) const
{
    const double d = u - center;
    const double sig = std::abs(s);
    // Re[1/(4 sigma0 s)] = 1/(4 |s|^2)
    return std::pow(2.0 * kPi * sig * sig, -0.25) * std::exp(-d * d / (4.0 * sig * sig));
}

cplx SeparablePacket::operator()(const Vec3& x) const
{
    return axes[0](x[0]) * axes[1](x[1]) * axes[2](x[2]) * std::polar(1.0, -phase);
}

double exit_phase(Branch branch, const SGParams& p)
{
    const DerivedParams d = derive(p);
    const double zeeman = branch_sign(branch) * effective_moment(p) * p.B0 * p.tau / p.hbar;
    const double common = p.mass * p.mass * d.vz * d.vz * p.tau * p.tau / (6.0 * p.hbar * p.hbar);
    return zeeman + common;
}

SeparablePacket initial_packet(const SGParams& p)
{
    const DerivedParams d = derive(p);
    const cplx s0 = width_at(p, 0.0).s;
    SeparablePacket pk;
    pk.axes[0] = make_axis(0.0, 0.0, 0.0, p, s0);
    pk.axes[1] = make_axis(0.0, d.ky, 0.0, p, s0);
    pk.axes[2] = make_axis(0.0, 0.0, 0.0, p, s0);
    return pk;
}

cplx initial_packet(const Vec3& x, const SGParams& params) { return initial_packet(params)(x); }

SeparablePacket packet_at_exit(Branch branch, const SGParams& p)
{
    const DerivedParams d = derive(p);
    const double sgn = branch_sign(branch);
    const cplx s = width_at(p, p.tau).s;

    SeparablePacket pk;
    pk.axes[0] = make_axis(0.0, 0.0, 0.0, p, s);
    pk.axes[1] = make_axis(p.vy * p.tau, d.ky, 0.5 * p.vy * p.tau, p, s);
    pk.axes[2] = make_axis(sgn * 0.5 * d.vz * p.tau, sgn * d.kz, 0.0, p, s);
    pk.phase = exit_phase(branch, p);
    return pk;
}

cplx psi_at_exit(const Vec3& x, Branch branch, const SGParams& params)
{
    return packet_at_exit(branch, params)(x);
}

SeparablePacket packet_free(double t1, Branch branch, const SGParams& p)
{
    if (!(t1 >= 0)) throw std::invalid_argument("packet_free: t1 must be >= 0");
    const DerivedParams d = derive(p);
    const double sgn = branch_sign(branch);
    const double t = p.tau + t1;
    const cplx s = width_at(p, t).s;

    SeparablePacket pk;
    pk.axes[0] = make_axis(0.0, 0.0, 0.0, p, s);
    pk.axes[1] = make_axis(p.vy * t, d.ky, 0.5 * p.vy * t, p, s);
    pk.axes[2] = make_axis(sgn * (0.5 * d.vz * p.tau + d.vz * t1), sgn * d.kz, sgn * 0.5 * d.vz * t1, p, s);
    pk.phase = exit_phase(branch, p);
    return pk;
}

cplx psi_free(const Vec3& x, double t1, Branch branch, const SGParams& params)
{
    return packet_free(t1, branch, params)(x);
}

Vec3 peak_momentum(Branch branch, const SGParams& p)
{
    p.validate();
    return {0.0, p.mass * p.vy, branch_sign(branch) * p.moment * p.gradient_b * p.tau};
}

}  // namespace sglab
