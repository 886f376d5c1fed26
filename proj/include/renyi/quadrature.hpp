// quadrature.hpp
// Adaptive Simpson integration, truncated-support densities, and numerical
// convolution of independent marginals.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dists.hpp"
#include "error.hpp"

namespace renyi {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    int max_depth = 48;
    // Probability mass clipped from each unbounded tail.
    double tail_mass = 1e-9;
    int initial_panels = 4;
    // Integrate entropy functionals past the truncation points of open tails
    // (doubling distance from the mode, then a power-law remainder).
    bool extend_tails = true;
};

inline void validate(const QuadratureSpec& q) {
    if (!(q.abs_tol > 0.0)) throw ParameterError("QuadratureSpec: abs_tol must be > 0");
    if (q.max_depth < 1) throw ParameterError("QuadratureSpec: max_depth must be >= 1");
    if (!(q.tail_mass > 0.0 && q.tail_mass <= 1e-6))
        throw ParameterError("QuadratureSpec: tail_mass must lie in (0, 1e-6]");
    if (q.initial_panels < 1) throw ParameterError("QuadratureSpec: initial_panels must be >= 1");
}

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double refined = left + right + delta / 15.0;
    if (!std::isfinite(refined)) throw QuadratureError("integrate: integrand is not finite", refined);
    // Interval no longer resolvable in double precision: accept.
    if (std::abs(delta) <= 15.0 * tol || !(a < lm && lm < m && m < rm && rm < b)) return refined;
    if (depth <= 0) throw QuadratureError("integrate: max_depth exceeded", refined);
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson on [a, b]; the tolerance is shared among the initial panels
// in proportion to their width.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& q = {}) {
    validate(q);
    if (!(std::isfinite(a) && std::isfinite(b))) throw ParameterError("integrate: bounds must be finite");
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, q);
    const int panels = q.initial_panels;
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * width;
        const double hi = (k + 1 == panels) ? b : a + (k + 1) * width;
        const double flo = f(lo);
        const double fhi = f(hi);
        const double fmid = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        const double tol = q.abs_tol * (hi - lo) / (b - a);
        total += detail::simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol, q.max_depth);
    }
    return total;
}

// Integrate over consecutive pieces [knots[i], knots[i+1]]; knots must be sorted.
// Each piece gets an equal share of the tolerance: shares by width would starve
// the core when a tail piece is many decades wide.
template <class F>
double integrate_pieces(F&& f, std::span<const double> knots, const QuadratureSpec& q = {}) {
    if (knots.size() < 2) return 0.0;
    if (!(knots.back() > knots.front())) return 0.0;
    QuadratureSpec piece = q;
    piece.abs_tol = q.abs_tol / static_cast<double>(knots.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        if (knots[i + 1] > knots[i]) total += integrate(f, knots[i], knots[i + 1], piece);
    return total;
}

// Probability levels at which densities carry quadrature breakpoints.
inline constexpr std::array<double, 11> kKnotLevels = {1e-6, 1e-4, 0.01, 0.1,     0.25,      0.5,
                                                       0.75, 0.9,  0.99, 1 - 1e-4, 1 - 1e-6};

// A density restricted to a finite integration range.
struct Density {
    std::function<double(double)> pdf;
    double lo = 0.0;
    double hi = 0.0;
    // Whether the natural support is bounded (the range is then exact, not truncated).
    bool bounded = true;
    // Which ends of [lo, hi] cut off an unbounded tail.
    bool lo_open = false;
    bool hi_open = false;
    // Sorted interior breakpoints.
    std::vector<double> knots;
    // Breakpoints aligned with kKnotLevels, when known.
    std::vector<double> level_knots;
    // Peak location guess.
    double mode = 0.0;
    // Set when the density came straight from a marginal.
    std::optional<Marginal> source;

    // lo, knots inside (lo, hi), hi.
    std::vector<double> breakpoints() const {
        std::vector<double> out{lo};
        for (double k : knots)
            if (k > lo && k < hi) out.push_back(k);
        out.push_back(hi);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

namespace detail {

// Log-spaced knots (ratio 4 in distance from the peak) inside any breakpoint
// gap that spans more than a factor 8, so tails covering many decades stay
// within reach of the bisection depth.
inline void add_geometric_knots(Density& d) {
    const auto bp = d.breakpoints();
    for (std::size_t i = 1; i < bp.size(); ++i) {
        const double a = bp[i - 1] - d.mode, b = bp[i] - d.mode;
        if (a > 0.0 && b > 8.0 * a)
            for (double x = 4.0 * a; x < b / 2.0; x *= 4.0) d.knots.push_back(d.mode + x);
        if (b < 0.0 && a < 8.0 * b)
            for (double x = 4.0 * b; x > a / 2.0; x *= 4.0) d.knots.push_back(d.mode + x);
    }
    std::sort(d.knots.begin(), d.knots.end());
}

} // namespace detail

inline Density make_density(const Marginal& m, const QuadratureSpec& q = {}) {
    validate(m);
    validate(q);
    const auto [s_lo, s_hi] = support(m);
    Density d;
    d.pdf = density_function(m);
    d.bounded = std::isfinite(s_lo) && std::isfinite(s_hi);
    d.lo_open = !std::isfinite(s_lo);
    d.hi_open = !std::isfinite(s_hi);
    d.lo = std::isfinite(s_lo) ? s_lo : quantile(m, q.tail_mass);
    d.hi = std::isfinite(s_hi) ? s_hi : quantile(m, 1.0 - q.tail_mass);
    d.mode = std::clamp(mode_hint(m), d.lo, d.hi);
    for (double p : kKnotLevels) d.level_knots.push_back(quantile(m, p));
    d.knots = d.level_knots;
    d.knots.push_back(d.mode);
    std::sort(d.knots.begin(), d.knots.end());
    detail::add_geometric_knots(d);
    d.source = m;
    return d;
}

// Density of X + Y for independent X, Y:
// z -> integral of f_X(t) f_Y(z - t) dt by adaptive Simpson, with breakpoints
// at the knots of X and the reflected knots of Y.
inline Density convolve_density(const Density& x, const Density& y, const QuadratureSpec& q = {}) {
    validate(q);
    QuadratureSpec inner = q;
    inner.abs_tol = std::max(q.abs_tol * 0.1, 1e-15);

    // Open (truncated) ends are widened per z so that the far tail of X + Y,
    // where one summand sits near its centre and the other is extreme, is
    // still integrated over both contributing regions.
    auto pdf = [x, y, inner, bx = x.breakpoints(), by = y.breakpoints()](double z) {
        double lo = x.lo_open ? std::min(x.lo, z - y.hi) : x.lo;
        double hi = x.hi_open ? std::max(x.hi, z - y.lo) : x.hi;
        if (!y.hi_open) lo = std::max(lo, z - y.hi);
        if (!y.lo_open) hi = std::min(hi, z - y.lo);
        if (!(hi > lo)) return 0.0;
        std::vector<double> knots{lo, hi};
        for (double k : bx)
            if (k > lo && k < hi) knots.push_back(k);
        for (double k : by)
            if (z - k > lo && z - k < hi) knots.push_back(z - k);
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
        const auto& fx = x.pdf;
        const auto& fy = y.pdf;
        auto g = [&](double t) { return fx(t) * fy(z - t); };
        const double v = integrate_pieces(g, knots, inner);
        // Far in the tails the absolute tolerance exceeds f_Z itself, and
        // f_Z^alpha with alpha < 1 magnifies that noise: refine relatively.
        if (std::abs(v) * 1e-8 < inner.abs_tol) {
            QuadratureSpec fine = inner;
            fine.abs_tol = std::max(std::abs(v) * 1e-8, 1e-300);
            return integrate_pieces(g, knots, fine);
        }
        return v;
    };

    Density d;
    d.pdf = pdf;
    d.lo = x.lo + y.lo;
    d.hi = x.hi + y.hi;
    d.bounded = x.bounded && y.bounded;
    d.lo_open = x.lo_open || y.lo_open;
    d.hi_open = x.hi_open || y.hi_open;
    d.mode = x.mode + y.mode;
    if (x.level_knots.size() == y.level_knots.size()) {
        for (std::size_t i = 0; i < x.level_knots.size(); ++i)
            d.level_knots.push_back(x.level_knots[i] + y.level_knots[i]);
    }
    d.knots = d.level_knots;
    d.knots.push_back(d.mode);
    std::sort(d.knots.begin(), d.knots.end());
    detail::add_geometric_knots(d);
    return d;
}

inline Density convolve_density(const Marginal& mx, const Marginal& my, const QuadratureSpec& q = {}) {
    return convolve_density(make_density(mx, q), make_density(my, q), q);
}

// Integral of the density over its integration range.
inline double total_mass(const Density& d, const QuadratureSpec& q = {}) {
    const auto bp = d.breakpoints();
    return integrate_pieces(d.pdf, bp, q);
}

} // namespace renyi
