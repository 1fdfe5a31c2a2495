#pragma once

#include "sglab/params.hpp"

namespace sglab {

/// One Cartesian factor of a separable Gaussian packet:
///
///   f(u) = (2 pi s^2)^(-1/4) exp(-(u - center)^2 / (4 sigma0 s) + i k (u - anchor))
///
/// The product of three factors carries the (2 pi s^2)^(-3/4) prefactor.
struct AxisFactor {
    double center = 0.0;
    double k = 0.0;
    double anchor = 0.0;
    double sigma0 = 1.0;
    cplx s{1.0, 0.0};

    cplx operator()(double u) const;
    double modulus(double u) const;
    /// Physical width |s| of |f|^2 (standard deviation of the density).
    double width() const { return std::abs(s); }
};

/// psi(x) = X(x) Y(y) Z(z) exp(-i phase)
struct SeparablePacket {
    std::array<AxisFactor, 3> axes;
    double phase = 0.0;

    cplx operator()(const Vec3& x) const;
};

/// Global phase constant Delta of a branch after the magnet:
///   Delta = +/- mu B0 tau / hbar + m^2 vz^2 tau^2 / (6 hbar^2)
/// with mu the signed moment (see effective_moment). The second term is
/// common to both branches.
double exit_phase(Branch branch, const SGParams& params);

/// Entry packet of width sigma0 moving along +y with wavenumber ky.
SeparablePacket initial_packet(const SGParams& params);
cplx initial_packet(const Vec3& x, const SGParams& params);

/// Exact decoupled-equation solution at the magnet exit t = tau.
SeparablePacket packet_at_exit(Branch branch, const SGParams& params);
cplx psi_at_exit(const Vec3& x, Branch branch, const SGParams& params);

/// Free flight for t1 >= 0 after the exit. The y phase uses vy for both
/// branches.
SeparablePacket packet_free(double t1, Branch branch, const SGParams& params);
cplx psi_free(const Vec3& x, double t1, Branch branch, const SGParams& params);

/// Peak momentum (0, m vy, +/- moment b tau).
Vec3 peak_momentum(Branch branch, const SGParams& params);

}  // namespace sglab
