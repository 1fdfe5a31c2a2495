#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace sglab {

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform trapezoid rule on +/- extent_widths around the integrand's
/// support, guarded by comparing against the rule on every other node.
struct QuadratureSpec {
    double extent_widths = 12.0;
    std::size_t nodes = 2048;       // intervals per axis
    double max_k_dx = 0.5;          // local wavenumber * spacing bound
    double richardson_tol = 1e-9;   // absolute change allowed on halving
    std::size_t max_nodes = std::size_t{1} << 22;

    void validate() const
    {
        if (nodes < 64) throw std::invalid_argument("QuadratureSpec: nodes must be >= 64");
        if (!(extent_widths >= 6.0)) throw std::invalid_argument("QuadratureSpec: extent must be >= 6 widths");
        if (!(max_k_dx > 0.0)) throw std::invalid_argument("QuadratureSpec: max_k_dx must be > 0");
        if (max_nodes < nodes) throw std::invalid_argument("QuadratureSpec: max_nodes < nodes");
    }
};

/// Integration interval and the largest local wavenumber of the integrand.
struct Window {
    double lo = 0.0;
    double hi = 0.0;
    double max_wavenumber = 0.0;
};

/// Fine (n intervals) and coarse (n/2 intervals) trapezoid sums in one pass.
template <class F>
auto trapezoid_pair(F&& f, double lo, double hi, std::size_t n)
{
    using T = decltype(f(lo));
    const double h = (hi - lo) / static_cast<double>(n);
    T even{};
    T odd{};
    for (std::size_t i = 1; i < n; ++i) {
        const T v = f(lo + h * static_cast<double>(i));
        if (i % 2 == 0) even += v;
        else odd += v;
    }
    const T ends = 0.5 * (f(lo) + f(hi));
    struct Result { T fine; T coarse; };
    return Result{h * (ends + even + odd), 2.0 * h * (ends + even)};
}

template <class F>
auto integrate(F&& f, const Window& w, const QuadratureSpec& spec)
{
    spec.validate();
    if (!(w.hi > w.lo)) throw std::invalid_argument("integrate: empty window");

    std::size_t n = spec.nodes + (spec.nodes % 2);
    const double len = w.hi - w.lo;
    while (w.max_wavenumber * len / static_cast<double>(n) >= spec.max_k_dx) {
        n *= 2;
        if (n > spec.max_nodes)
            throw ConvergenceError("integrate: oscillation too fast for max_nodes");
    }
    for (;;) {
        const auto r = trapezoid_pair(f, w.lo, w.hi, n);
        if (std::abs(r.fine - r.coarse) <= spec.richardson_tol) return r.fine;
        n *= 2;
        if (n > spec.max_nodes)
            throw ConvergenceError("integrate: halving check failed (|fine - coarse| = " +
                                   std::to_string(std::abs(r.fine - r.coarse)) + ")");
    }
}

/// Romberg extrapolation of the trapezoid rule on [a, b]; for smooth
/// integrands cut off at finite endpoints, where plain trapezoid is O(h^2).
template <class F>
double romberg(F&& f, double a, double b, double tol = 1e-14, int max_levels = 20)
{
    if (!(b > a)) return 0.0;
    double prev_row[32];
    double row[32];
    double h = b - a;
    prev_row[0] = 0.5 * h * (f(a) + f(b));
    for (int level = 1; level < max_levels; ++level) {
        h *= 0.5;
        const long count = 1L << (level - 1);
        double sum = 0.0;
        for (long i = 0; i < count; ++i) sum += f(a + h * static_cast<double>(2 * i + 1));
        row[0] = 0.5 * prev_row[0] + h * sum;
        double factor = 1.0;
        for (int j = 1; j <= level; ++j) {
            factor *= 4.0;
            row[j] = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
        }
        if (level >= 4 && std::abs(row[level] - prev_row[level - 1]) <= tol) return row[level];
        for (int j = 0; j <= level; ++j) prev_row[j] = row[j];
    }
    throw ConvergenceError("romberg: no convergence");
}

}  // namespace sglab
