#pragma once

#include <array>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace sglab {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

// CODATA 2018.
inline constexpr double kHbarSI = 1.054571817e-34;
inline constexpr double kNeutronMass = 1.67492749804e-27;
inline constexpr double kNeutronMoment = 9.6623651e-27;  // |mu_n|, J/T

/// Arguments below this threshold are treated as exp underflow.
inline constexpr double kUnderflowArg = -700.0;

/// Slack used on every ">=" comparison between metrics.
inline constexpr double kInequalitySlack = 1e-12;

struct GuardedExp {
    double value = 0.0;
    bool underflow = false;
};

/// exp(arg), but exactly 0 (flagged) once arg drops below kUnderflowArg.
GuardedExp guarded_exp(double arg);

/// Physical parameterization of the Stern-Gerlach setup, SI units.
///
/// `moment` is the magnitude of the magnetic moment. The branch labelled
/// Plus is the one pushed toward +z by the gradient. `hbar` is carried so
/// that natural-unit runs (hbar = m = sigma0 = 1) share the SI code path.
struct SGParams {
    double mass = kNeutronMass;
    double moment = kNeutronMoment;
    double B0 = 0.0;
    double gradient_b = 0.0;
    double tau = 0.0;
    double sigma0 = 1e-6;
    double vy = 0.0;
    double hbar = kHbarSI;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    /// Natural units (hbar = m = sigma0 = moment = 1) realizing the
    /// dimensionless groups P and K. Both must be > 0, or both == 0.
    /// `r` sets B0 = b*sigma0/r; with b == 0 the field is B0 = 1/r.
    static SGParams from_groups(double P, double K, double r = 0.01, double vy = 1.0);
};

/// Kinematic quantities and dimensionless groups derived from SGParams.
struct DerivedParams {
    double vz = 0.0;        // moment*b*tau/m
    double ky = 0.0;        // m*vy/hbar
    double kz = 0.0;        // m*vz/hbar
    double P = 0.0;         // vz*tau/sigma0
    double K = 0.0;         // kz*sigma0
    double r = 0.0;         // b*sigma0/B0, +inf when B0 == 0
    double t_spread = 0.0;  // 2*m*sigma0^2/hbar
    bool r_infinite = false;
};

DerivedParams derive(const SGParams& params);

/// Complex width s_t = sigma0 (1 + i hbar t / (2 m sigma0^2)) and |s_t|.
struct ComplexWidth {
    cplx s;
    double sigma = 0.0;
};

ComplexWidth width_at(const SGParams& params, double t);

enum class Branch { Plus, Minus };

constexpr double branch_sign(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }

/// Signed moment entering the Hamiltonian mu*sigma.B. Negative, so the
/// Plus (spin-up) component is deflected toward +z.
inline double effective_moment(const SGParams& p) { return -p.moment; }

std::string to_string(Branch b);

}  // namespace sglab
