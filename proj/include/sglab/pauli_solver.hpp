#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sglab/params.hpp"

namespace sglab {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Periodic (x, z) box in natural units: lengths in sigma0, times in
/// m sigma0^2 / hbar. Node counts are powers of two.
struct GridSpec {
    std::size_t nx = 256;
    std::size_t nz = 256;
    double Lx = 16.0;  // half extent
    double Lz = 16.0;
    double dt = 2e-3;

    double dx() const { return 2.0 * Lx / static_cast<double>(nx); }
    double dz() const { return 2.0 * Lz / static_cast<double>(nz); }
    double x(std::size_t i) const { return -Lx + dx() * static_cast<double>(i); }
    double z(std::size_t j) const { return -Lz + dz() * static_cast<double>(j); }
    std::size_t size() const { return nx * nz; }

    void validate() const;

    /// Box for running `params` over a duration T (SI seconds) in the
    /// field: 16 sigma0 half extents, grown so that 7.5 final widths plus
    /// a 6 sigma0 guard band separate the deflected packet from the edge.
    /// dt is dt_over_tspread * t_spread.
    static GridSpec for_run(const SGParams& params, double T, std::size_t n = 256, double dt_over_tspread = 1e-3);
};

enum class FieldMode { Coupled, Decoupled };

/// B = (-b x, 0, B0 + b z), divergence free.
struct FieldModel {
    double B0 = 0.0;  // T
    double b = 0.0;   // T/m
    FieldMode mode = FieldMode::Decoupled;

    static FieldModel from(const SGParams& params, FieldMode mode) { return {params.B0, params.gradient_b, mode}; }
    static FieldModel none() { return {0.0, 0.0, FieldMode::Decoupled}; }
};

/// Two-component state on the (x, z) grid, natural units. The y factor is
/// free 1D motion and is handled analytically by the caller.
struct SpinorField {
    GridSpec grid;
    std::vector<cplx> psi_plus;
    std::vector<cplx> psi_minus;
    double t = 0.0;             // natural units
    double length_unit = 1.0;   // sigma0 in metres
    double time_unit = 1.0;     // m sigma0^2 / hbar in seconds

    double norm() const;
    double component_norm(bool plus) const;
    double time_si() const { return t * time_unit; }
};

/// psi_pm = c_up/dn * psi0(x, z), normalized on the grid.
SpinorField init_state(const GridSpec& grid, const SGParams& params, cplx c_up, cplx c_dn);

/// Exit solution of the decoupled equations sampled on the grid, with the
/// given spin amplitudes. Reference for solver validation.
SpinorField analytic_exit_state(const GridSpec& grid, const SGParams& params, cplx c_up, cplx c_dn);

/// Strang split-step integrator for the two-component Pauli equation.
/// Owns FFT plans and precomputed phase tables; one instance per run.
class PauliSolver {
public:
    PauliSolver(const GridSpec& grid, const SGParams& params, const FieldModel& field);
    ~PauliSolver();
    PauliSolver(const PauliSolver&) = delete;
    PauliSolver& operator=(const PauliSolver&) = delete;

    /// One step: half kinetic, full potential, half kinetic.
    void step(SpinorField& state);

    /// n = T/dt steps (T in SI seconds, must be a multiple of dt). Adjacent
    /// half kinetic steps are fused; the result equals n calls to step().
    void evolve(SpinorField& state, double T);

    /// Largest single-step norm change seen so far.
    double max_step_drift() const { return max_step_drift_; }

private:
    struct Plans;

    void kinetic(std::vector<cplx>& psi, const std::vector<cplx>& phase);
    void potential(SpinorField& state) const;
    void check_norm(double before, double after);
    void check_state(const SpinorField& state) const;

    GridSpec grid_;
    FieldModel field_;
    std::unique_ptr<Plans> plans_;
    std::vector<cplx> half_kinetic_;  // includes 1/(nx nz)
    std::vector<cplx> full_kinetic_;
    // Decoupled: diagonal phases. Coupled: U = [[u11, u12], [u12, u22]].
    std::vector<cplx> u11_, u12_, u22_;
    double max_step_drift_ = 0.0;
    double length_unit_ = 1.0;
    double time_unit_ = 1.0;
};

/// Convenience wrapper around PauliSolver::evolve.
SpinorField evolve(SpinorField state, const FieldModel& field, const SGParams& params, double T);

struct GridObservables {
    double norm_plus = 0.0;
    double norm_minus = 0.0;
    double z_plus = 0.0;    // <z> per normalized component, metres
    double z_minus = 0.0;
    double pz_plus = 0.0;   // <p_z> per normalized component, kg m/s
    double pz_minus = 0.0;
    double I = 0.0;         // |<psi+|psi->| of normalized components
    double M = 0.0;         // sum |psi+||psi-| of normalized components
};

GridObservables observables(const SpinorField& state, const SGParams& params);

/// sqrt(sum |a - e^{i phi} b|^2 dx dz) over both components. With
/// align_phase, phi minimizes the distance (one phase shared by both
/// components); otherwise phi = 0.
double l2_distance(const SpinorField& a, const SpinorField& b, bool align_phase);

/// Probability within `band` (natural units) of any box edge.
double boundary_mass(const SpinorField& state, double band);

/// Snapshot file, little-endian:
///   8 bytes  magic "SGSNAP01"
///   uint32   nx, uint32 nz
///   float64  Lx, Lz, dt, t, length_unit, time_unit   (SI: metres, seconds)
///   nx*nz records of 6 float64, x-major (index i*nz + j):
///            x, z, Re psi+, Im psi+, Re psi-, Im psi-   (psi in 1/m)
void write_snapshot(const std::string& path, const SpinorField& state);
SpinorField read_snapshot(const std::string& path);

}  // namespace sglab
