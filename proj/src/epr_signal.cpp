#include "sglab/epr_signal.hpp"

#include <cmath>
#include <stdexcept>

namespace sglab {

SpinObservable::SpinObservable(cplx a11, cplx a12, cplx a21, cplx a22)
    : m_{a11, a12, a21, a22}
{
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (std::abs(m_[2 * r + c] - std::conj(m_[2 * c + r])) > 1e-14)
                throw std::invalid_argument("SpinObservable: matrix is not Hermitian");
        }
    }
}

SpinObservable SpinObservable::direction(const Vec3& n)
{
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (!(len > 0.0) || !std::isfinite(len)) throw std::invalid_argument("SpinObservable: zero direction");
    const double x = n[0] / len;
    const double y = n[1] / len;
    const double z = n[2] / len;
    return {z, cplx(x, -y), cplx(x, y), -z};
}

SpinObservable SpinObservable::identity() { return {1.0, 0.0, 0.0, 1.0}; }
SpinObservable SpinObservable::pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
SpinObservable SpinObservable::pauli_y() { return {0.0, cplx(0, -1), cplx(0, 1), 0.0}; }
SpinObservable SpinObservable::pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

namespace {

void check_inner(cplx inner)
{
    if (!(std::abs(inner) <= 1.0 + 1e-12))
        throw std::invalid_argument("overlap modulus exceeds 1");
}

}  // namespace

double expectation_sg(const SpinObservable& A) { return 0.5 * A.trace(); }

cplx expectation_sg_sf(const SpinObservable& A, cplx inner)
{
    check_inner(inner);
    return 0.5 * A.trace() + inner * A.off_diagonal();
}

double expectation_sg_sf_symmetrized(const SpinObservable& A, cplx inner)
{
    check_inner(inner);
    return 0.5 * A.trace() - (inner * A.off_diagonal()).real();
}

SignalReport delta(const SpinObservable& A, cplx inner)
{
    SignalReport r;
    r.expect_sg = expectation_sg(A);
    r.expect_sg_sf = expectation_sg_sf(A, inner);
    r.delta = r.expect_sg_sf - r.expect_sg;
    r.delta_abs = std::abs(r.delta);
    r.delta_symmetrized = expectation_sg_sf_symmetrized(A, inner) - r.expect_sg;
    r.delta_max_bound = std::abs(inner) * std::abs(A.off_diagonal());
    r.audit_ok = r.delta_abs <= r.delta_max_bound + kInequalitySlack;
    return r;
}

double max_delta_over_directions(cplx inner)
{
    check_inner(inner);
    return std::abs(inner);
}

AuditReport signaling_audit(const SGParams& params, double t1, double epsilon)
{
    const ConstraintVerdict v = check_constraint(params, epsilon);
    enforce_constraint(v);

    AuditReport a;
    a.I = v.I;
    a.M_s = v.M_s;
    a.M_t = overlap_M_closed(params, t1).value;
    a.regime = v.regime;
    a.signal = delta(SpinObservable::pauli_x(), cplx(v.I, 0.0));
    a.delta_max = max_delta_over_directions(cplx(v.I, 0.0));
    a.verdict_ok = a.M_s >= a.delta_max - kInequalitySlack;
    return a;
}

}  // namespace sglab
