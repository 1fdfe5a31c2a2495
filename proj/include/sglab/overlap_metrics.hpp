#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "sglab/params.hpp"
#include "sglab/quadrature.hpp"

namespace sglab {

enum class Regime { Ideal, GeneralNonideal, Forbidden };

std::string to_string(Regime r);

class ForbiddenRegimeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Closed forms. All exponentials go through guarded_exp.

/// I = |<psi+|psi->| = exp(-P^2/8 - 2 K^2), constant after the exit.
GuardedExp inner_product_closed(const SGParams& params);

/// M(t1) = exp(-vz^2 (tau + 2 t1)^2 / (8 sigma_{tau+t1}^2)), sigma the
/// physical width |s_t|.
GuardedExp overlap_M_closed(const SGParams& params, double t1);

/// Late-time limit of M: exp(-2 K^2).
GuardedExp M_saturated(const SGParams& params);

// Independent quadrature of the defining integrals, using the analytic
// packets and separability (3D integral = product of three 1D integrals).

/// Complex <psi+|psi-> at tau + t1.
cplx inner_product_numeric(const SGParams& params, double t1, const QuadratureSpec& spec = {});

/// Integral of |psi+||psi-| at tau + t1.
double overlap_M_numeric(const SGParams& params, double t1, const QuadratureSpec& spec = {});

struct SaturationTime {
    double t_s = 0.0;
    bool already_saturated = false;
};

/// Smallest t1 past which |M(t1) - M_s| <= rel_tol * M_s, resolved to
/// 1e-3 t_spread. Returns already_saturated when M(0) is within tolerance.
SaturationTime saturation_time(const SGParams& params, double rel_tol = 1e-3);

/// Half-plane probabilities of the Plus branch at tau + t1:
/// alpha2 over {y > 0, z < 0}, beta2 over {y > 0, z > 0}. The *_mirror
/// fields are the Minus branch over the mirrored quadrants and must agree.
struct HalfPlaneProbs {
    double alpha2 = 0.0;
    double beta2 = 0.0;
    double alpha2_mirror = 0.0;
    double beta2_mirror = 0.0;
    double upper_mass = 0.0;  // P(y > 0)
};

/// Error-function evaluation of the Gaussian half-line integrals.
HalfPlaneProbs half_plane_probs(const SGParams& params, double t1);

/// Same quantities by direct 2D quadrature of |psi|^2 over (y, z), with
/// the x factor integrated on its own. Used as an oracle.
HalfPlaneProbs half_plane_probs_numeric(const SGParams& params, double t1, const QuadratureSpec& spec = {});

struct ConstraintVerdict {
    bool constraint_ok = true;
    Regime regime = Regime::GeneralNonideal;
    double I = 0.0;
    double M_s = 0.0;
    bool underflow = false;
};

/// Checks M_s >= I. Ideal when both are below epsilon, Forbidden when
/// I > M_s + kInequalitySlack, GeneralNonideal otherwise.
ConstraintVerdict check_constraint(const SGParams& params, double epsilon = 1e-3);

/// Throws ForbiddenRegimeError on a Forbidden verdict.
void enforce_constraint(const ConstraintVerdict& verdict);

struct MetricsRecord {
    double I = 0.0;
    cplx inner_complex;
    double M_t = 0.0;
    double M_s = 0.0;
    double alpha2 = 0.0;
    double beta2 = 0.0;
    SaturationTime t_s;
    Regime regime = Regime::GeneralNonideal;
    bool constraint_ok = true;
    bool underflow = false;
};

/// All metrics at one (params, t1) from closed forms; inner_complex is
/// taken from quadrature only when `spec` is supplied.
MetricsRecord compute_metrics(const SGParams& params, double t1, double epsilon = 1e-3,
                              const std::optional<QuadratureSpec>& spec = std::nullopt);

using SampledFunction = std::function<cplx(double)>;

struct SchwarzResult {
    double lhs = 0.0;  // integral of |f||g|
    double rhs = 0.0;  // |integral of conj(f) g|
    bool ok = true;
};

/// lhs >= rhs - 1e-10 for square-integrable f, g on the window. The
/// window's max_wavenumber must bound the local wavenumber of conj(f) g.
SchwarzResult cauchy_schwarz_property(const SampledFunction& f, const SampledFunction& g,
                                      const Window& window, const QuadratureSpec& spec = {});

}  // namespace sglab
