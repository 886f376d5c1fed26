// entropy.hpp
// Exponential Renyi entropy: quadrature oracle from a density, the m-spacings
// sample estimator family, bias correction and the alpha -> 0 / infinity limits.
//
//   H_alpha^exp(X) = ( integral f^alpha )^(1 / (1 - alpha)),  alpha != 1
//   H_1^exp(X)     = exp( -integral f ln f )
//
// The sample estimator works on order statistics X(1) <= ... <= X(N):
//
//   ( 1/(N-m) sum_{i=1}^{N-m} ( (N+1)/m (X(i+m) - X(i)) )^(1-alpha) )^(1/(1-alpha))
//
// with the geometric mean of the scaled spacings at alpha = 1.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "dists.hpp"
#include "error.hpp"
#include "quadrature.hpp"

namespace renyi {

struct RenyiParams {
    double alpha = 1.0;
    std::size_t m = 1;
    // Multiplies the alpha = 1 estimate by m / exp(digamma(m)).
    bool bias_correct = false;
};

// m = ceil(n^(1/root)), at least 1. root = 1.5 gives the default n^(2/3).
inline std::size_t m_from_root(std::size_t n, double root) {
    if (!(root > 0.0)) throw ParameterError("m_from_root: root must be > 0");
    const double v = std::pow(static_cast<double>(n), 1.0 / root);
    // Guard against pow landing a hair above an exact integer.
    const double r = std::round(v);
    const double m = std::abs(v - r) < 1e-9 ? r : std::ceil(v);
    return static_cast<std::size_t>(std::max(1.0, m));
}

inline std::size_t default_m(std::size_t n) { return m_from_root(n, 1.5); }

inline double asymptotic_bias(std::size_t m) {
    if (m < 1) throw ParameterError("asymptotic_bias: m must be >= 1");
    return boost::math::digamma(static_cast<double>(m)) - std::log(static_cast<double>(m));
}

namespace detail {

inline void check_alpha(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be a finite value >= 0");
}

// Sorts a copy and separates exact ties by k * 1e-12 * range.
inline std::vector<double> sorted_with_jitter(std::span<const double> s) {
    std::vector<double> v(s.begin(), s.end());
    for (double x : v)
        if (!std::isfinite(x)) throw ParameterError("sample contains non-finite values");
    std::sort(v.begin(), v.end());
    const double range = v.back() - v.front();
    if (range <= 0.0) return v;
    const double eps = 1e-12 * range;
    bool tied = false;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] == v[i - 1]) {
            tied = true;
            break;
        }
    }
    if (!tied) return v;
    const std::vector<double> orig = v;
    std::size_t run = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        run = (orig[i] == orig[i - 1]) ? run + 1 : 0;
        v[i] = orig[i] + static_cast<double>(run) * eps;
    }
    std::sort(v.begin(), v.end());
    return v;
}

// Estimator on already sorted values.
inline double m_spacings_sorted(std::span<const double> x, const RenyiParams& p) {
    const std::size_t n = x.size();
    const std::size_t m = p.m;
    const double scale = static_cast<double>(n + 1) / static_cast<double>(m);
    const std::size_t terms = n - m;
    if (is_shannon(p.alpha)) {
        double acc = 0.0;
        for (std::size_t i = 0; i < terms; ++i) {
            const double s = x[i + m] - x[i];
            if (!(s > 0.0)) throw DegenerateSample("m-spacings: zero spacing at alpha = 1");
            acc += std::log(scale * s);
        }
        double h = std::exp(acc / static_cast<double>(terms));
        if (p.bias_correct) h *= static_cast<double>(m) / std::exp(boost::math::digamma(static_cast<double>(m)));
        return h;
    }
    if (p.alpha == 0.0) {
        // The sum of m-spacings telescopes to (top m values) - (bottom m values).
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += x[n - 1 - j] - x[j];
        return static_cast<double>(n + 1) / (static_cast<double>(m) * static_cast<double>(terms)) * acc;
    }
    const double e = 1.0 - p.alpha;
    double acc = 0.0;
    for (std::size_t i = 0; i < terms; ++i) {
        const double s = x[i + m] - x[i];
        if (p.alpha > 1.0 && !(s > 0.0)) throw DegenerateSample("m-spacings: zero spacing at alpha > 1");
        acc += std::pow(scale * s, e);
    }
    return std::pow(acc / static_cast<double>(terms), 1.0 / e);
}

inline void check_params(std::size_t n, const RenyiParams& p) {
    check_alpha(p.alpha);
    if (n < 2) throw ParameterError("m-spacings: sample needs at least 2 values");
    if (p.m < 1 || p.m >= n) throw ParameterError("m-spacings: m must satisfy 1 <= m <= N-1");
    if (p.bias_correct && !is_shannon(p.alpha))
        throw ParameterError("m-spacings: bias correction is only defined at alpha = 1");
}

} // namespace detail

inline double m_spacings_estimate(std::span<const double> s, const RenyiParams& p) {
    detail::check_params(s.size(), p);
    const auto x = detail::sorted_with_jitter(s);
    return detail::m_spacings_sorted(x, p);
}

// The m = 1 member. An all-equal sample is rejected for every alpha.
inline double one_spacing_estimate(std::span<const double> s, double alpha) {
    detail::check_alpha(alpha);
    if (s.size() < 2) throw ParameterError("one_spacing_estimate: sample needs at least 2 values");
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    if (*mn == *mx) throw DegenerateSample("one_spacing_estimate: all sample values are equal");
    return m_spacings_estimate(s, RenyiParams{alpha, 1, false});
}

// (N+1)/(N-1) (max - min): the telescoped alpha = 0, m = 1 estimator.
inline double h0_estimate(std::span<const double> s) {
    if (s.size() < 2) throw ParameterError("h0_estimate: sample needs at least 2 values");
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    return (n + 1.0) / (n - 1.0) * (*mx - *mn);
}

namespace detail {

// Integrability of f^alpha on an unbounded support, where the family tells us.
inline void check_integrable(const Marginal& m, double alpha) {
    const auto [lo, hi] = support(m);
    const bool unbounded = !(std::isfinite(lo) && std::isfinite(hi));
    if (alpha == 0.0 && unbounded) throw DivergenceError("oracle: H_0 is infinite on an unbounded support");
    if (const auto* t = std::get_if<StudentT>(&m)) {
        if (alpha * (t->nu + 1.0) <= 1.0) throw DivergenceError("oracle: integral of f^alpha diverges for this t");
    }
    if (std::holds_alternative<Levy>(m) && 1.5 * alpha <= 1.0)
        throw DivergenceError("oracle: integral of f^alpha diverges for Levy");
}

} // namespace detail

namespace detail {

// Integral of g(f(x)) beyond a truncated end of d, g(v) = v^alpha or v ln v.
// Pieces [c + 2^j D, c + 2^(j+1) D] from the mode c outward, then the
// remainder of a power-law fit f ~ A x^-k through the last two points:
//   v^alpha: f^alpha D / (alpha k - 1),  v ln v: f D / (k - 1) (ln f - k / (k - 1)).
template <class G>
double open_tail(const Density& d, bool upper, double alpha, G& g, const QuadratureSpec& q) {
    const double c = d.mode;
    const double edge = upper ? d.hi : d.lo;
    double dist = std::abs(edge - c);
    if (!(dist > 0.0)) dist = d.hi - d.lo;
    const double sgn = upper ? 1.0 : -1.0;
    constexpr int kDoublings = 16;
    double total = 0.0;
    double span = dist;
    QuadratureSpec piece = q;
    piece.abs_tol = q.abs_tol / (2.0 * kDoublings);
    double f_prev = d.pdf(c + sgn * span);
    for (int j = 0; j < kDoublings; ++j) {
        const double a = c + sgn * span;
        const double b = c + sgn * 2.0 * span;
        const double part = integrate(g, std::min(a, b), std::max(a, b), piece);
        total += part;
        span *= 2.0;
        const double f_next = d.pdf(c + sgn * span);
        if (!(f_next > 0.0)) return total;
        if (std::abs(part) < 1e-3 * piece.abs_tol || j + 1 == kDoublings) {
            if (!(f_prev > f_next)) throw DivergenceError("oracle: density tail does not decay");
            const double k = std::log(f_prev / f_next) / std::log(2.0);
            if (is_shannon(alpha)) {
                if (!(k > 1.0)) throw DivergenceError("oracle: tail too heavy for a finite entropy");
                total += f_next * span / (k - 1.0) * (std::log(f_next) - k / (k - 1.0));
            } else {
                if (!(alpha * k > 1.0)) throw DivergenceError("oracle: integral of f^alpha diverges in the tail");
                total += std::pow(f_next, alpha) * span / (alpha * k - 1.0);
            }
            return total;
        }
        f_prev = f_next;
    }
    return total;
}

} // namespace detail

inline double exp_renyi_oracle(const Density& d, double alpha, const QuadratureSpec& q = {}) {
    detail::check_alpha(alpha);
    if (d.source) detail::check_integrable(*d.source, alpha);
    if (alpha == 0.0 && !d.bounded) throw DivergenceError("oracle: H_0 is infinite on an unbounded support");
    const auto bp = d.breakpoints();
    const auto& f = d.pdf;
    auto tails = [&](auto& g) {
        double extra = 0.0;
        if (!q.extend_tails) return extra;
        if (d.lo_open) extra += detail::open_tail(d, false, alpha, g, q);
        if (d.hi_open) extra += detail::open_tail(d, true, alpha, g, q);
        return extra;
    };
    double value;
    if (is_shannon(alpha)) {
        auto g = [&](double x) {
            const double v = f(x);
            return v > 0.0 ? v * std::log(v) : 0.0;
        };
        const double neg = integrate_pieces(g, bp, q) + tails(g);
        value = std::exp(-neg);
    } else if (alpha == 0.0) {
        value = integrate_pieces([&](double x) { return f(x) > 0.0 ? 1.0 : 0.0; }, bp, q);
    } else {
        auto g = [&](double x) {
            const double v = f(x);
            return v > 0.0 ? std::pow(v, alpha) : 0.0;
        };
        const double mass = integrate_pieces(g, bp, q) + tails(g);
        value = std::pow(mass, 1.0 / (1.0 - alpha));
    }
    if (!std::isfinite(value)) throw DivergenceError("oracle: integral does not converge to a finite value");
    return value;
}

inline double exp_renyi_oracle(const Marginal& m, double alpha, const QuadratureSpec& q = {}) {
    return exp_renyi_oracle(make_density(m, q), alpha, q);
}

// 1 / sup f, sup located by a grid scan plus golden-section refinement.
inline double h_infinity_oracle(const Density& d) {
    const auto& f = d.pdf;
    constexpr int kGrid = 4000;
    std::vector<double> xs;
    const auto bp = d.breakpoints();
    // Grid per piece, so narrow peaks between far breakpoints are not skipped.
    const int per_piece = std::max(8, kGrid / static_cast<int>(bp.size() - 1));
    for (std::size_t i = 0; i + 1 < bp.size(); ++i)
        for (int k = 0; k < per_piece; ++k)
            xs.push_back(bp[i] + (bp[i + 1] - bp[i]) * k / per_piece);
    xs.push_back(bp.back());

    std::size_t best = 0;
    double fbest = -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = f(xs[i]);
        if (!std::isfinite(v)) throw DivergenceError("h_infinity_oracle: density is unbounded");
        if (v > fbest) {
            fbest = v;
            best = i;
        }
    }
    // A maximum on the range edge that keeps growing towards the edge means an
    // unbounded density (e.g. Beta with a shape below 1).
    if (best == 0 || best + 1 == xs.size()) {
        const double edge = xs[best];
        const double inward = best == 0 ? 1.0 : -1.0;
        const double width = d.hi - d.lo;
        const double near = f(edge + inward * 1e-9 * width);
        const double nearer = f(edge + inward * 1e-13 * width);
        if (nearer > 10.0 * std::max(near, fbest) || !std::isfinite(nearer))
            throw DivergenceError("h_infinity_oracle: density is unbounded at the support edge");
    }
    double a = xs[best == 0 ? 0 : best - 1];
    double b = xs[std::min(best + 1, xs.size() - 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double e = a + g * (b - a);
    double fc = f(c), fe = f(e);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        if (fc > fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    const double sup = std::max({fbest, fc, fe});
    if (!(sup > 0.0)) throw DivergenceError("h_infinity_oracle: density is identically zero");
    return 1.0 / sup;
}

} // namespace renyi
