#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sglab/analytic_packets.hpp"
#include "sglab/overlap_metrics.hpp"
#include "sglab/pauli_solver.hpp"

using namespace sglab;

namespace {

GridSpec small_grid(double dt)
{
    GridSpec g;
    g.nx = g.nz = 128;
    g.Lx = g.Lz = 10.0;
    g.dt = dt;
    return g;
}

double sigma_x(const SpinorField& s)
{
    cplx acc = 0.0;
    for (std::size_t k = 0; k < s.psi_plus.size(); ++k) acc += std::conj(s.psi_plus[k]) * s.psi_minus[k];
    return 2.0 * acc.real() * s.grid.dx() * s.grid.dz() / s.norm();
}

std::string temp_path(const char* name)
{
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("grid validation")
{
    GridSpec g = small_grid(1e-3);
    CHECK_NOTHROW(g.validate());
    g.nx = 100;
    CHECK_THROWS_AS(g.validate(), SolverError);
    g = small_grid(1e-3);
    g.Lz = 0.0;
    CHECK_THROWS_AS(g.validate(), SolverError);
    g = small_grid(0.0);
    CHECK_THROWS_AS(g.validate(), SolverError);

    const GridSpec r = GridSpec::for_run(SGParams::from_groups(2, 1), 2.0);
    CHECK(r.Lz > r.Lx);
    CHECK(r.Lx >= 16.0);
    CHECK(r.dt == doctest::Approx(2e-3));
}

TEST_CASE("initial state")
{
    const SGParams p = SGParams::from_groups(0, 0, 0.1);
    const double h = 1.0 / std::sqrt(2.0);

    SUBCASE("spin up only")
    {
        const SpinorField s = init_state(small_grid(1e-2), p, 1.0, 0.0);
        CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-12));
        for (const cplx& c : s.psi_minus) REQUIRE(c == cplx(0.0));
    }
    SUBCASE("x polarized")
    {
        const SpinorField s = init_state(small_grid(1e-2), p, h, h);
        CHECK(s.component_norm(true) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s.component_norm(false) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(sigma_x(s) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("rejections")
    {
        CHECK_THROWS_AS(init_state(small_grid(1e-2), p, 1.0, 1.0), SolverError);
        GridSpec coarse = small_grid(1e-2);
        coarse.nx = coarse.nz = 32;
        CHECK_THROWS_AS(init_state(coarse, p, 1.0, 0.0), SolverError);
        // kick wavenumber K = 4 needs dx < 1/8
        CHECK_THROWS_AS(init_state(small_grid(1e-3), SGParams::from_groups(8, 4), 1.0, 0.0), SolverError);
    }
}

TEST_CASE("solver construction and stepping errors")
{
    const SGParams p = SGParams::from_groups(0, 0, 0.1);
    CHECK_THROWS_AS(PauliSolver(small_grid(0.1), p, FieldModel::from(p, FieldMode::Coupled)), SolverError);

    PauliSolver solver(small_grid(1e-2), p, FieldModel::from(p, FieldMode::Coupled));
    SpinorField other = init_state(small_grid(5e-3), p, 1.0, 0.0);
    CHECK_THROWS_AS(solver.step(other), SolverError);

    SpinorField s = init_state(small_grid(1e-2), p, 1.0, 0.0);
    CHECK_THROWS_AS(solver.evolve(s, 0.015), SolverError);
    CHECK_THROWS_AS(solver.evolve(s, -0.01), SolverError);

    // packet spills into the guard band of a tiny box
    GridSpec tiny;
    tiny.nx = tiny.nz = 64;
    tiny.Lx = tiny.Lz = 4.0;
    tiny.dt = 1e-2;
    SpinorField t = init_state(tiny, p, 1.0, 0.0);
    CHECK_THROWS_AS(evolve(t, FieldModel::none(), p, 0.01), SolverError);
}

TEST_CASE("Larmor precession in a uniform field")
{
    const SGParams p = SGParams::from_groups(0, 0, 0.1);  // b = 0, B0 = 10
    const double h = 1.0 / std::sqrt(2.0);
    const double dt = 1e-2;
    SpinorField s = init_state(small_grid(dt), p, h, h);
    PauliSolver solver(s.grid, p, FieldModel::from(p, FieldMode::Coupled));
    for (int n = 1; n <= 100; ++n) {
        solver.step(s);
        REQUIRE(sigma_x(s) == doctest::Approx(std::cos(2 * p.moment * p.B0 * n * dt / p.hbar)).epsilon(1e-6));
    }
    CHECK(solver.max_step_drift() < 1e-12);
}

TEST_CASE("decoupled mode never populates an empty component")
{
    const SGParams p = SGParams::from_groups(2, 1);
    const GridSpec g = GridSpec::for_run(p, p.tau);
    SpinorField s = init_state(g, p, 1.0, 0.0);
    PauliSolver solver(g, p, FieldModel::from(p, FieldMode::Decoupled));
    for (int n = 0; n < 10; ++n) solver.step(s);
    for (const cplx& c : s.psi_minus) REQUIRE(c == cplx(0.0));
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("free evolution width")
{
    SGParams p = SGParams::from_groups(0, 0, 0.1);
    GridSpec g;
    g.nx = g.nz = 256;
    g.Lx = g.Lz = 16.0;
    g.dt = 1e-2;
    const SpinorField s = evolve(init_state(g, p, 1.0, 0.0), FieldModel::none(), p, 1.0);
    double m2 = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.nz; ++j) m2 += g.z(j) * g.z(j) * std::norm(s.psi_plus[i * g.nz + j]);
    m2 *= g.dx() * g.dz();
    const double sigma = width_at(p, 1.0).sigma;
    CHECK(std::sqrt(m2) == doctest::Approx(sigma).epsilon(1e-10));
}

TEST_CASE("decoupled evolution reproduces the analytic exit state")
{
    const SGParams p = SGParams::from_groups(0.5, 0.5);
    const GridSpec g = GridSpec::for_run(p, p.tau);
    const double h = 1.0 / std::sqrt(2.0);
    PauliSolver solver(g, p, FieldModel::from(p, FieldMode::Decoupled));
    SpinorField s = init_state(g, p, h, h);
    solver.evolve(s, p.tau);
    const SpinorField ref = analytic_exit_state(g, p, h, h);
    CHECK(l2_distance(s, ref, true) < 1e-4);
    CHECK(std::abs(s.norm() - 1.0) < 1e-10);

    const GridObservables o = observables(s, p);
    const double pz = p.moment * p.gradient_b * p.tau;
    CHECK(o.pz_plus == doctest::Approx(pz).epsilon(1e-3));
    CHECK(o.pz_minus == doctest::Approx(-pz).epsilon(1e-3));
    CHECK(o.z_plus == doctest::Approx(derive(p).vz * p.tau / 2).epsilon(1e-6));
    CHECK(o.I == doctest::Approx(inner_product_closed(p).value).epsilon(1e-6));
    CHECK(o.M >= o.I - 1e-12);
}

TEST_CASE("transverse velocity does not enter the (x, z) dynamics")
{
    const double h = 1.0 / std::sqrt(2.0);
    SGParams a = SGParams::from_groups(0.5, 0.5, 0.1, 0.0);
    SGParams b = SGParams::from_groups(0.5, 0.5, 0.1, 25.0);
    const GridSpec g = GridSpec::for_run(a, 0.2);
    const SpinorField sa = evolve(init_state(g, a, h, h), FieldModel::from(a, FieldMode::Coupled), a, 0.2);
    const SpinorField sb = evolve(init_state(g, b, h, h), FieldModel::from(b, FieldMode::Coupled), b, 0.2);
    CHECK(l2_distance(sa, sb, false) < 1e-12);
}

TEST_CASE("l2 distance")
{
    const SGParams p = SGParams::from_groups(0, 0, 0.1);
    const SpinorField a = init_state(small_grid(1e-2), p, 1.0, 0.0);
    SpinorField b = a;
    for (auto& c : b.psi_plus) c *= std::polar(1.0, 0.7);
    CHECK(l2_distance(a, b, true) < 1e-12);
    CHECK(l2_distance(a, b, false) == doctest::Approx(std::abs(1.0 - std::polar(1.0, 0.7))));
    SpinorField c = init_state(GridSpec{64, 64, 5.0, 5.0, 1e-2}, p, 1.0, 0.0);
    CHECK_THROWS_AS(l2_distance(a, c, false), SolverError);
}

TEST_CASE("snapshot round trip")
{
    SGParams p = SGParams::from_groups(0.5, 0.5, 0.1);
    p.sigma0 = 2.0;  // non-trivial length unit
    SpinorField s = init_state(small_grid(1e-2), p, cplx(0.6, 0.0), cplx(0.0, 0.8));
    s.t = 0.25;
    const std::string path = temp_path("sglab_snapshot_test.bin");
    write_snapshot(path, s);

    CHECK(std::filesystem::file_size(path) == 8 + 8 + 6 * 8 + s.grid.size() * 6 * 8);
    {
        std::ifstream in(path, std::ios::binary);
        char magic[8];
        in.read(magic, 8);
        CHECK(std::string(magic, 8) == "SGSNAP01");
    }

    const SpinorField r = read_snapshot(path);
    CHECK(r.grid.nx == s.grid.nx);
    CHECK(r.grid.nz == s.grid.nz);
    CHECK(r.grid.Lx == doctest::Approx(s.grid.Lx).epsilon(1e-15));
    CHECK(r.grid.dt == doctest::Approx(s.grid.dt).epsilon(1e-15));
    CHECK(r.t == doctest::Approx(s.t).epsilon(1e-15));
    CHECK(r.length_unit == s.length_unit);
    CHECK(r.time_unit == s.time_unit);
    CHECK(l2_distance(r, s, false) < 1e-14);

    // truncated and corrupted files
    std::filesystem::resize_file(path, 100);
    CHECK_THROWS_AS(read_snapshot(path), SolverError);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "NOTASNAPSHOT....";
    }
    CHECK_THROWS_AS(read_snapshot(path), SolverError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_snapshot(path), SolverError);
}
