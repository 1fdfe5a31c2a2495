#include "sglab/pauli_solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>

#include "sglab/analytic_packets.hpp"

namespace sglab {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// Wavenumber-space state content: the exit kick plus three inverse widths.
constexpr double kSpreadWavenumber = 3.0;
constexpr double kGuardBand = 6.0;
constexpr double kBoundaryMassLimit = 1e-12;

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

double wavenumber(std::size_t i, std::size_t n, double half_extent)
{
    const double dk = kPi / half_extent;
    const auto ii = static_cast<long>(i);
    const auto nn = static_cast<long>(n);
    return dk * static_cast<double>(ii < nn / 2 ? ii : ii - nn);
}

double time_unit_of(const SGParams& p) { return p.mass * p.sigma0 * p.sigma0 / p.hbar; }

// Kick wavenumber (natural units) accumulated after `t_nd` in the field.
double kick_wavenumber(const SGParams& p, double t_nd)
{
    const double t = t_nd * time_unit_of(p);
    return p.moment * p.gradient_b * t / p.hbar * p.sigma0;
}

}  // namespace

void GridSpec::validate() const
{
    if (!is_pow2(nx) || !is_pow2(nz)) throw SolverError("GridSpec: node counts must be powers of two");
    if (!(Lx > 0) || !(Lz > 0)) throw SolverError("GridSpec: half extents must be > 0");
    if (!(dt > 0) || !std::isfinite(dt)) throw SolverError("GridSpec: dt must be > 0");
}

GridSpec GridSpec::for_run(const SGParams& params, double T, std::size_t n, double dt_over_tspread)
{
    const DerivedParams d = derive(params);
    const double tu = time_unit_of(params);
    const double T_nd = T / tu;
    // Deflection 0.5 (mu b / m) T^2 in units of sigma0.
    const double accel = params.moment * params.gradient_b / params.mass;
    const double shift = 0.5 * accel * T * T / params.sigma0;
    const double width_end = width_at(params, T).sigma / params.sigma0;

    GridSpec g;
    g.nx = n;
    g.nz = n;
    g.Lx = std::max(16.0, kGuardBand + 7.5 * width_end);
    g.Lz = std::max(16.0, shift + kGuardBand + 7.5 * width_end);
    g.dt = dt_over_tspread * d.t_spread / tu;
    (void)T_nd;
    return g;
}

double SpinorField::component_norm(bool plus) const
{
    const auto& v = plus ? psi_plus : psi_minus;
    double s = 0.0;
    for (const cplx& c : v) s += std::norm(c);
    return s * grid.dx() * grid.dz();
}

double SpinorField::norm() const { return component_norm(true) + component_norm(false); }

namespace {

SpinorField sample_state(const GridSpec& grid, const SGParams& params, const SeparablePacket& plus,
                         const SeparablePacket& minus, cplx c_up, cplx c_dn)
{
    grid.validate();
    SpinorField s;
    s.grid = grid;
    s.length_unit = params.sigma0;
    s.time_unit = time_unit_of(params);
    s.psi_plus.resize(grid.size());
    s.psi_minus.resize(grid.size());
    const double L = params.sigma0;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i) * L;
        for (std::size_t j = 0; j < grid.nz; ++j) {
            const double z = grid.z(j) * L;
            const std::size_t k = i * grid.nz + j;
            const cplx ep = plus.axes[0](x) * plus.axes[2](z) * std::polar(1.0, -plus.phase);
            const cplx em = minus.axes[0](x) * minus.axes[2](z) * std::polar(1.0, -minus.phase);
            s.psi_plus[k] = c_up * ep * L;
            s.psi_minus[k] = c_dn * em * L;
        }
    }
    return s;
}

}  // namespace

SpinorField init_state(const GridSpec& grid, const SGParams& params, cplx c_up, cplx c_dn)
{
    params.validate();
    const double spin_norm = std::norm(c_up) + std::norm(c_dn);
    if (std::abs(spin_norm - 1.0) > 1e-12) throw SolverError("init_state: |c_up|^2 + |c_dn|^2 must be 1");
    grid.validate();
    const DerivedParams d = derive(params);
    const double kmax = std::max(d.K, kSpreadWavenumber);
    if (std::max(grid.dx(), grid.dz()) * kmax >= 0.5)
        throw SolverError("init_state: grid spacing does not resolve the state's wavenumbers");

    const SeparablePacket p0 = initial_packet(params);
    SpinorField s = sample_state(grid, params, p0, p0, c_up, c_dn);
    const double n = s.norm();
    const double scale = 1.0 / std::sqrt(n);
    for (auto& c : s.psi_plus) c *= scale;
    for (auto& c : s.psi_minus) c *= scale;
    return s;
}

SpinorField analytic_exit_state(const GridSpec& grid, const SGParams& params, cplx c_up, cplx c_dn)
{
    SpinorField s = sample_state(grid, params, packet_at_exit(Branch::Plus, params),
                                 packet_at_exit(Branch::Minus, params), c_up, c_dn);
    s.t = params.tau / s.time_unit;
    return s;
}

struct PauliSolver::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~Plans()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

PauliSolver::PauliSolver(const GridSpec& grid, const SGParams& params, const FieldModel& field)
    : grid_(grid), field_(field), plans_(std::make_unique<Plans>())
{
    params.validate();
    grid_.validate();
    length_unit_ = params.sigma0;
    time_unit_ = time_unit_of(params);

    const std::size_t n = grid_.size();
    {
        std::vector<cplx> scratch(n);
        std::lock_guard<std::mutex> lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plans_->forward = fftw_plan_dft_2d(static_cast<int>(grid_.nx), static_cast<int>(grid_.nz),
                                           as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, flags);
        plans_->backward = fftw_plan_dft_2d(static_cast<int>(grid_.nx), static_cast<int>(grid_.nz),
                                            as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, flags);
    }
    if (!plans_->forward || !plans_->backward) throw SolverError("PauliSolver: FFT planning failed");

    const double dt = grid_.dt;
    const double inv_n = 1.0 / static_cast<double>(n);
    half_kinetic_.resize(n);
    full_kinetic_.resize(n);
    for (std::size_t i = 0; i < grid_.nx; ++i) {
        const double kx = wavenumber(i, grid_.nx, grid_.Lx);
        for (std::size_t j = 0; j < grid_.nz; ++j) {
            const double kz = wavenumber(j, grid_.nz, grid_.Lz);
            const double k2 = kx * kx + kz * kz;
            half_kinetic_[i * grid_.nz + j] = std::polar(inv_n, -0.25 * k2 * dt);
            full_kinetic_[i * grid_.nz + j] = std::polar(inv_n, -0.5 * k2 * dt);
        }
    }

    // Potential mu_eff sigma.B, energies converted to natural units.
    const double mu = effective_moment(params);
    const double to_nd = time_unit_ / params.hbar;
    u11_.resize(n);
    u12_.resize(n);
    u22_.resize(n);
    double max_potential = 0.0;
    for (std::size_t i = 0; i < grid_.nx; ++i) {
        const double x = grid_.x(i) * length_unit_;
        for (std::size_t j = 0; j < grid_.nz; ++j) {
            const double z = grid_.z(j) * length_unit_;
            const std::size_t k = i * grid_.nz + j;
            const double bz = field_.B0 + field_.b * z;
            if (field_.mode == FieldMode::Decoupled) {
                const double v = mu * bz * to_nd;
                u11_[k] = std::polar(1.0, -v * dt);
                u22_[k] = std::polar(1.0, v * dt);
                u12_[k] = 0.0;
                max_potential = std::max(max_potential, std::abs(v));
            } else {
                const double bx = -field_.b * x;
                const double bmag = std::hypot(bx, bz);
                const double theta = mu * bmag * to_nd * dt;
                max_potential = std::max(max_potential, std::abs(mu * bmag * to_nd));
                if (bmag == 0.0) {
                    u11_[k] = 1.0;
                    u22_[k] = 1.0;
                    u12_[k] = 0.0;
                    continue;
                }
                // exp(-i theta n.sigma) = cos(theta) - i sin(theta) n.sigma, n_y = 0
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                const double nx = bx / bmag;
                const double nz = bz / bmag;
                u11_[k] = cplx(c, -s * nz);
                u22_[k] = cplx(c, s * nz);
                u12_[k] = cplx(0.0, -s * nx);
            }
        }
    }

    const double kick = kick_wavenumber(params, params.tau / time_unit_);
    const double kmax = std::max(kick, kSpreadWavenumber) + kSpreadWavenumber;
    const double e_max = 0.5 * kmax * kmax + max_potential;
    if (dt * e_max >= 0.5)
        throw SolverError("PauliSolver: dt too large for the energy scale on the grid (dt*E_max = " +
                          std::to_string(dt * e_max) + ")");
}

PauliSolver::~PauliSolver() = default;

void PauliSolver::kinetic(std::vector<cplx>& psi, const std::vector<cplx>& phase)
{
    fftw_execute_dft(plans_->forward, as_fftw(psi.data()), as_fftw(psi.data()));
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] *= phase[k];
    fftw_execute_dft(plans_->backward, as_fftw(psi.data()), as_fftw(psi.data()));
}

void PauliSolver::potential(SpinorField& state) const
{
    auto& p = state.psi_plus;
    auto& m = state.psi_minus;
    if (field_.mode == FieldMode::Decoupled) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            p[k] *= u11_[k];
            m[k] *= u22_[k];
        }
        return;
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        const cplx a = p[k];
        const cplx b = m[k];
        p[k] = u11_[k] * a + u12_[k] * b;
        m[k] = u12_[k] * a + u22_[k] * b;
    }
}

void PauliSolver::check_norm(double before, double after)
{
    const double drift = std::abs(after - before);
    max_step_drift_ = std::max(max_step_drift_, drift);
    if (drift > 1e-8)
        throw SolverError("PauliSolver: norm drift " + std::to_string(drift) + " in a single step");
}

void PauliSolver::check_state(const SpinorField& state) const
{
    const GridSpec& g = state.grid;
    if (g.nx != grid_.nx || g.nz != grid_.nz || g.Lx != grid_.Lx || g.Lz != grid_.Lz || g.dt != grid_.dt)
        throw SolverError("PauliSolver: state grid does not match solver grid");
    if (state.psi_plus.size() != grid_.size() || state.psi_minus.size() != grid_.size())
        throw SolverError("PauliSolver: state arrays have the wrong size");
}

void PauliSolver::step(SpinorField& state)
{
    check_state(state);
    const double before = state.norm();
    kinetic(state.psi_plus, half_kinetic_);
    kinetic(state.psi_minus, half_kinetic_);
    potential(state);
    kinetic(state.psi_plus, half_kinetic_);
    kinetic(state.psi_minus, half_kinetic_);
    state.t += grid_.dt;
    check_norm(before, state.norm());
}

void PauliSolver::evolve(SpinorField& state, double T)
{
    check_state(state);
    const double steps_real = T / time_unit_ / grid_.dt;
    const double rounded = std::round(steps_real);
    if (!(T >= 0) || std::abs(steps_real - rounded) > 1e-6 * std::max(1.0, rounded))
        throw SolverError("PauliSolver::evolve: T must be a multiple of dt");
    const auto n = static_cast<std::size_t>(rounded);
    if (n == 0) return;

    double prev = state.norm();
    kinetic(state.psi_plus, half_kinetic_);
    kinetic(state.psi_minus, half_kinetic_);
    for (std::size_t s = 0; s < n; ++s) {
        potential(state);
        // Kinetic phases are exactly unimodular, so the norm is sampled in
        // position space between potential and kinetic stages.
        const double now = state.norm();
        check_norm(prev, now);
        prev = now;
        const auto& phase = (s + 1 == n) ? half_kinetic_ : full_kinetic_;
        kinetic(state.psi_plus, phase);
        kinetic(state.psi_minus, phase);
    }
    state.t += static_cast<double>(n) * grid_.dt;
    check_norm(prev, state.norm());

    if (boundary_mass(state, kGuardBand) > kBoundaryMassLimit)
        throw SolverError("PauliSolver: packet reached the periodic boundary guard band; enlarge the box");
}

SpinorField evolve(SpinorField state, const FieldModel& field, const SGParams& params, double T)
{
    PauliSolver solver(state.grid, params, field);
    solver.evolve(state, T);
    return state;
}

GridObservables observables(const SpinorField& state, const SGParams& params)
{
    const GridSpec& g = state.grid;
    const double cell = g.dx() * g.dz();
    GridObservables o;
    o.norm_plus = state.component_norm(true);
    o.norm_minus = state.component_norm(false);

    double zp = 0.0, zm = 0.0, m = 0.0;
    cplx inner = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.nz; ++j) {
            const std::size_t k = i * g.nz + j;
            const double z = g.z(j);
            const cplx a = state.psi_plus[k];
            const cplx b = state.psi_minus[k];
            zp += z * std::norm(a);
            zm += z * std::norm(b);
            inner += std::conj(a) * b;
            m += std::abs(a) * std::abs(b);
        }
    }
    const double np = o.norm_plus > 0 ? o.norm_plus : 1.0;
    const double nm = o.norm_minus > 0 ? o.norm_minus : 1.0;
    o.z_plus = zp * cell / np * state.length_unit;
    o.z_minus = zm * cell / nm * state.length_unit;
    const double pair = std::sqrt(np * nm);
    o.I = std::abs(inner) * cell / pair;
    o.M = m * cell / pair;

    // <k_z> from the spectrum of each component.
    std::vector<cplx> buf(g.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(static_cast<int>(g.nx), static_cast<int>(g.nz), as_fftw(buf.data()),
                                as_fftw(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    }
    auto mean_kz = [&](const std::vector<cplx>& psi) {
        std::copy(psi.begin(), psi.end(), buf.begin());
        fftw_execute(plan);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.nx; ++i) {
            for (std::size_t j = 0; j < g.nz; ++j) {
                const double w = std::norm(buf[i * g.nz + j]);
                num += wavenumber(j, g.nz, g.Lz) * w;
                den += w;
            }
        }
        return den > 0 ? num / den : 0.0;
    };
    const double p_unit = params.hbar / state.length_unit;
    o.pz_plus = mean_kz(state.psi_plus) * p_unit;
    o.pz_minus = mean_kz(state.psi_minus) * p_unit;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return o;
}

double l2_distance(const SpinorField& a, const SpinorField& b, bool align_phase)
{
    if (a.grid.nx != b.grid.nx || a.grid.nz != b.grid.nz)
        throw SolverError("l2_distance: grids differ");
    cplx overlap = 0.0;
    if (align_phase) {
        for (std::size_t k = 0; k < a.psi_plus.size(); ++k) {
            overlap += std::conj(b.psi_plus[k]) * a.psi_plus[k] + std::conj(b.psi_minus[k]) * a.psi_minus[k];
        }
    }
    const cplx rot = (align_phase && std::abs(overlap) > 0) ? overlap / std::abs(overlap) : cplx(1.0, 0.0);
    double s = 0.0;
    for (std::size_t k = 0; k < a.psi_plus.size(); ++k) {
        s += std::norm(a.psi_plus[k] - rot * b.psi_plus[k]) + std::norm(a.psi_minus[k] - rot * b.psi_minus[k]);
    }
    return std::sqrt(s * a.grid.dx() * a.grid.dz());
}

double boundary_mass(const SpinorField& state, double band)
{
    const GridSpec& g = state.grid;
    double s = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i) {
        const bool edge_x = g.x(i) < -g.Lx + band || g.x(i) > g.Lx - band;
        for (std::size_t j = 0; j < g.nz; ++j) {
            const bool edge_z = g.z(j) < -g.Lz + band || g.z(j) > g.Lz - band;
            if (!edge_x && !edge_z) continue;
            const std::size_t k = i * g.nz + j;
            s += std::norm(state.psi_plus[k]) + std::norm(state.psi_minus[k]);
        }
    }
    return s * g.dx() * g.dz();
}

namespace {

constexpr char kSnapshotMagic[8] = {'S', 'G', 'S', 'N', 'A', 'P', '0', '1'};

template <class T>
void put_le(std::ostream& out, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw SolverError("snapshot: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_snapshot(const std::string& path, const SpinorField& state)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SolverError("snapshot: cannot open " + path);
    const GridSpec& g = state.grid;
    const double L = state.length_unit;
    out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nz));
    put_le<double>(out, g.Lx * L);
    put_le<double>(out, g.Lz * L);
    put_le<double>(out, g.dt * state.time_unit);
    put_le<double>(out, state.t * state.time_unit);
    put_le<double>(out, L);
    put_le<double>(out, state.time_unit);
    const double amp = 1.0 / L;
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.nz; ++j) {
            const std::size_t k = i * g.nz + j;
            put_le<double>(out, g.x(i) * L);
            put_le<double>(out, g.z(j) * L);
            put_le<double>(out, state.psi_plus[k].real() * amp);
            put_le<double>(out, state.psi_plus[k].imag() * amp);
            put_le<double>(out, state.psi_minus[k].real() * amp);
            put_le<double>(out, state.psi_minus[k].imag() * amp);
        }
    }
    if (!out) throw SolverError("snapshot: write failed for " + path);
}

SpinorField read_snapshot(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SolverError("snapshot: cannot open " + path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kSnapshotMagic, 8) != 0)
        throw SolverError("snapshot: bad magic in " + path);
    SpinorField s;
    s.grid.nx = get_le<std::uint32_t>(in);
    s.grid.nz = get_le<std::uint32_t>(in);
    const double Lx = get_le<double>(in);
    const double Lz = get_le<double>(in);
    const double dt = get_le<double>(in);
    const double t = get_le<double>(in);
    s.length_unit = get_le<double>(in);
    s.time_unit = get_le<double>(in);
    s.grid.Lx = Lx / s.length_unit;
    s.grid.Lz = Lz / s.length_unit;
    s.grid.dt = dt / s.time_unit;
    s.t = t / s.time_unit;
    s.grid.validate();
    s.psi_plus.resize(s.grid.size());
    s.psi_minus.resize(s.grid.size());
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        get_le<double>(in);
        get_le<double>(in);
        const double pr = get_le<double>(in);
        const double pi = get_le<double>(in);
        const double mr = get_le<double>(in);
        const double mi = get_le<double>(in);
        s.psi_plus[k] = cplx(pr, pi) * s.length_unit;
        s.psi_minus[k] = cplx(mr, mi) * s.length_unit;
    }
    return s;
}

}  // namespace sglab
