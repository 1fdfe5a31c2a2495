#pragma once

#include <array>

#include "sglab/overlap_metrics.hpp"
#include "sglab/params.hpp"

namespace sglab {

/// Hermitian 2x2 observable on particle 1, basis {|up>, |down>}.
class SpinObservable {
public:
    /// Throws std::invalid_argument unless A == A^dagger to 1e-14.
    SpinObservable(cplx a11, cplx a12, cplx a21, cplx a22);

    /// n.sigma for a unit vector n (normalized here; zero vector rejected).
    static SpinObservable direction(const Vec3& n);
    static SpinObservable identity();
    static SpinObservable pauli_x();
    static SpinObservable pauli_y();
    static SpinObservable pauli_z();

    cplx operator()(int row, int col) const { return m_[2 * row + col]; }
    double trace() const { return m_[0].real() + m_[3].real(); }
    /// <up|A|down>
    cplx off_diagonal() const { return m_[1]; }

private:
    std::array<cplx, 4> m_;
};

/// <A> on particle 1 after the magnet, no flip: tr(A)/2.
double expectation_sg(const SpinObservable& A);

/// <A> after flipping the selected subensemble, term for term:
///   tr(A)/2 + inner * <up|A|down>,  inner = <psi-|psi+>.
/// Complex in general; see expectation_sg_sf_symmetrized.
cplx expectation_sg_sf(const SpinObservable& A, cplx inner);

/// Expectation from the density matrix of the flipped state with the
/// Hermitian-conjugate cross term kept: tr(A)/2 - Re(inner * A12).
double expectation_sg_sf_symmetrized(const SpinObservable& A, cplx inner);

struct SignalReport {
    double expect_sg = 0.0;
    cplx expect_sg_sf;
    cplx delta;
    double delta_abs = 0.0;
    double delta_symmetrized = 0.0;
    double delta_max_bound = 0.0;  // |inner| |A12|
    bool audit_ok = true;
};

/// Delta = <A>_{SG+SF} - <A>_{SG} = inner * A12.
SignalReport delta(const SpinObservable& A, cplx inner);

/// Supremum of |Delta| over unit-direction observables: |inner|.
double max_delta_over_directions(cplx inner);

struct AuditReport {
    SignalReport signal;        // for the maximizing equatorial observable
    double I = 0.0;
    double delta_max = 0.0;     // = I
    double M_s = 0.0;
    double M_t = 0.0;
    Regime regime = Regime::GeneralNonideal;
    bool verdict_ok = true;     // M_s >= delta_max
};

/// No-signaling audit for one setup. Throws ForbiddenRegimeError if the
/// closed forms ever give I > M_s.
AuditReport signaling_audit(const SGParams& params, double t1, double epsilon = 1e-3);

}  // namespace sglab
