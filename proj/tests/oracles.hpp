#pragma once
// Test-only oracles. Nothing here calls into the library's quadrature or
// metric code; they take raw callables and integrate them directly.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// Composite Simpson on [a, b] with n (even) intervals.
template <class F>
auto simpson(F&& f, double a, double b, int n)
{
    using T = decltype(f(a));
    if (n % 2) ++n;
    const double h = (b - a) / n;
    T s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * i);
    return s * (h / 3.0);
}

/// 4th-order central difference.
template <class F>
auto derivative(F&& f, double x, double h)
{
    return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12.0 * h);
}

/// Two-qubit (spin1 x spin2) times a 2D spatial model. Basis index
/// ((s1 * 2 + s2) * 2 + k), s = 0 up, 1 down, k spatial component.
using State = std::array<cplx, 8>;

inline int idx(int s1, int s2, int k) { return (s1 * 2 + s2) * 2 + k; }

/// Spatial vectors u_minus = (1, 0), u_plus = (inner, sqrt(1 - |inner|^2)),
/// so that <u_minus|u_plus> = inner.
inline std::array<std::array<cplx, 2>, 2> spatial_pair(cplx inner)
{
    const double rest = std::sqrt(std::max(0.0, 1.0 - std::norm(inner)));
    return {{{cplx(1.0), cplx(0.0)}, {inner, cplx(rest)}}};
}

/// (1/sqrt2)[u- |up,down> - u+ |down,up>]
inline State state_after_magnet(cplx inner)
{
    const auto u = spatial_pair(inner);
    State s{};
    const double c = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < 2; ++k) {
        s[idx(0, 1, k)] += c * u[0][k];
        s[idx(1, 0, k)] -= c * u[1][k];
    }
    return s;
}

/// (1/2)[u- |up,down> - u+ |down,down>]
inline State state_after_flip(cplx inner)
{
    const auto u = spatial_pair(inner);
    State s{};
    for (int k = 0; k < 2; ++k) {
        s[idx(0, 1, k)] += 0.5 * u[0][k];
        s[idx(1, 1, k)] -= 0.5 * u[1][k];
    }
    return s;
}

/// Tr[rho_1 A] / Tr[rho_1], rho_1 the partial trace over spin 2 and space.
inline double reduced_expectation(const State& s, const std::array<cplx, 4>& A)
{
    cplx rho[2][2] = {};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int s2 = 0; s2 < 2; ++s2)
                for (int k = 0; k < 2; ++k) rho[a][b] += s[idx(a, s2, k)] * std::conj(s[idx(b, s2, k)]);
    const double tr = (rho[0][0] + rho[1][1]).real();
    cplx e = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) e += rho[a][b] * A[2 * b + a];
    return e.real() / tr;
}

/// Random Hermitian 2x2 matrix, row-major.
inline std::array<cplx, 4> random_hermitian(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    const double d1 = n(rng), d2 = n(rng);
    const cplx off(n(rng), n(rng));
    return {cplx(d1), off, std::conj(off), cplx(d2)};
}

}  // namespace oracle
