// optim.hpp
// Long-only, fully-invested portfolio optimization: a Nelder-Mead search on
// the reparameterization w_i = v_i^2 / sum v_j^2, the turnover cap, and the
// strategy definitions (ROpt, MV, MVaR, MCVaR, MSR, EW, 60/40).

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "entropy.hpp"
#include "error.hpp"
#include "risk.hpp"

namespace renyi {

// A point of the standard simplex: non-negative, summing to one.
class Weights {
public:
    Weights() = default;

    // Validates; entries may be off by rounding (sum within 1e-10).
    explicit Weights(std::vector<double> w) : w_(std::move(w)) {
        if (w_.empty()) throw ParameterError("Weights: empty vector");
        double s = 0.0;
        for (double x : w_) {
            if (!std::isfinite(x) || x < 0.0) throw ParameterError("Weights: entries must be finite and >= 0");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-10) throw ParameterError("Weights: entries must sum to 1");
    }

    static Weights equal(std::size_t n) { return Weights(std::vector<double>(n, 1.0 / static_cast<double>(n))); }

    static Weights vertex(std::size_t n, std::size_t i) {
        if (i >= n) throw ParameterError("Weights::vertex: index out of range");
        std::vector<double> w(n, 0.0);
        w[i] = 1.0;
        return Weights(std::move(w));
    }

    // Clips negatives and rescales onto the simplex.
    static Weights normalized(std::vector<double> w) {
        double s = 0.0;
        for (double& x : w) {
            if (!(x > 0.0)) x = 0.0;
            s += x;
        }
        if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("Weights::normalized: no positive mass");
        for (double& x : w) x /= s;
        return Weights(std::move(w));
    }

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& values() const { return w_; }
    Eigen::Map<const Eigen::VectorXd> vec() const { return {w_.data(), static_cast<Eigen::Index>(w_.size())}; }

    friend bool operator==(const Weights&, const Weights&) = default;

private:
    std::vector<double> w_;
};

inline double l1_distance(const Weights& a, const Weights& b) {
    if (a.size() != b.size()) throw ParameterError("l1_distance: size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

struct SolverConfig {
    // First start; equal weights when empty.
    std::optional<Weights> start;
    // Further starting points tried after `start` (previous weights, vertices...).
    std::vector<Weights> extra_starts;
    // Maximum number of starts used (the polish run is extra).
    int restarts = 3;
    // 0 means 500 n.
    int max_iters = 0;
    // Stop once the polytope's diameter in weight space falls below this.
    double diameter_tol = 1e-6;
    // Initial polytope edge in v-space.
    double initial_step = 0.25;
};

inline void validate(const SolverConfig& c) {
    if (c.restarts < 1) throw ParameterError("SolverConfig: restarts must be >= 1");
    if (c.max_iters < 0) throw ParameterError("SolverConfig: max_iters must be >= 0");
    if (!(c.diameter_tol > 0.0)) throw ParameterError("SolverConfig: diameter_tol must be > 0");
    if (!(c.initial_step > 0.0)) throw ParameterError("SolverConfig: initial_step must be > 0");
}

struct TurnoverConstraint {
    Weights prev;
    double cap = 0.075;
};

// The point of [prev, proposed] whose L1 displacement from prev equals cap,
// or `proposed` when it already moves less than cap.
inline Weights apply_turnover_cap(const Weights& prev, const Weights& proposed, double cap) {
    if (!(cap > 0.0)) throw ParameterError("apply_turnover_cap: cap must be > 0");
    const double d = l1_distance(prev, proposed);
    if (d <= cap) return proposed;
    const double t = cap / d;
    std::vector<double> w(prev.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = prev[i] + t * (proposed[i] - prev[i]);
    return Weights::normalized(std::move(w));
}

using Objective = std::function<double(const Weights&)>;

namespace detail {

inline Weights from_v(const std::vector<double>& v) {
    std::vector<double> w(v.size());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        w[i] = v[i] * v[i];
        s += w[i];
    }
    for (double& x : w) x /= s;
    return Weights(std::move(w));
}

inline std::vector<double> to_v(const Weights& w) {
    std::vector<double> v(w.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(w[i]);
    return v;
}

struct NmResult {
    std::vector<double> v;
    double f = std::numeric_limits<double>::infinity();
    bool any_finite = false;
};

// Plain Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
template <class F>
NmResult nelder_mead(F& f, std::vector<double> v0, double step, double tol, int max_iters) {
    const std::size_t n = v0.size();
    std::vector<std::vector<double>> pts(n + 1, v0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += (v0[i] > 0.5 ? -step : step);
    std::vector<double> fv(n + 1);
    bool any_finite = false;
    auto eval = [&](const std::vector<double>& v) {
        const double r = f(v);
        if (std::isfinite(r)) any_finite = true;
        return r;
    };
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> idx(n + 1);
    std::vector<std::vector<double>> ws(n + 1);
    auto weights_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        std::vector<double> w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = s > 0.0 ? v[i] * v[i] / s : 0.0;
        return w;
    };
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    for (int it = 0; it < max_iters; ++it) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = idx.front(), worst = idx.back(), second = idx[n - 1];

        double diam = 0.0;
        const auto wb = weights_of(pts[best]);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == best) continue;
            const auto wk = weights_of(pts[k]);
            for (std::size_t i = 0; i < n; ++i) diam = std::max(diam, std::abs(wk[i] - wb[i]));
        }
        if (diam < tol) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k <= n; ++k)
            if (k != worst)
                for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) xr[i] = centroid[i] + (centroid[i] - pts[worst][i]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            for (std::size_t i = 0; i < n; ++i) xe[i] = centroid[i] + 2.0 * (centroid[i] - pts[worst][i]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        for (std::size_t i = 0; i < n; ++i)
            xc[i] = outside ? centroid[i] + 0.5 * (xr[i] - centroid[i])
                            : centroid[i] + 0.5 * (pts[worst][i] - centroid[i]);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            pts[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == best) continue;
            for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
            fv[k] = eval(pts[k]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    return {pts[best], fv[best], any_finite};
}

} // namespace detail

// Minimizes `objective` over the n-simplex. Starts: cfg.start (or equal
// weights), then cfg.extra_starts, up to cfg.restarts of them, followed by a
// polish run from the best point. A turnover constraint enters as an exact
// penalty and is enforced on the result by apply_turnover_cap.
inline Weights minimize_on_simplex(const Objective& objective, std::size_t n, const SolverConfig& cfg = {},
                                   const std::optional<TurnoverConstraint>& turnover = std::nullopt) {
    validate(cfg);
    if (n < 2) throw ParameterError("minimize_on_simplex: n must be >= 2");
    if (turnover) {
        if (turnover->prev.size() != n) throw InfeasibleError("minimize_on_simplex: previous weights have the wrong size");
        if (!(turnover->cap > 0.0)) throw InfeasibleError("minimize_on_simplex: turnover cap must be > 0");
    }

    std::vector<Weights> starts;
    starts.push_back(cfg.start ? *cfg.start : Weights::equal(n));
    for (const auto& s : cfg.extra_starts) {
        if (static_cast<int>(starts.size()) >= cfg.restarts) break;
        if (s.size() != n) throw ParameterError("minimize_on_simplex: start has the wrong size");
        if (std::find(starts.begin(), starts.end(), s) == starts.end()) starts.push_back(s);
    }
    if (starts.front().size() != n) throw ParameterError("minimize_on_simplex: start has the wrong size");

    auto safe = [&](const Weights& w) {
        try {
            const double r = objective(w);
            return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
        } catch (const DegenerateSample&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    double scale = 1.0;
    for (const auto& s : starts) {
        const double f0 = safe(s);
        if (std::isfinite(f0)) {
            scale = 1.0 + std::abs(f0);
            break;
        }
    }
    const double lambda = 1e3 * scale;
    auto penalized = [&](const Weights& w) {
        double r = safe(w);
        if (turnover) r += lambda * std::max(0.0, l1_distance(w, turnover->prev) - turnover->cap);
        return r;
    };
    auto fv = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        if (!(s > 0.0) || !std::isfinite(s)) return std::numeric_limits<double>::infinity();
        return penalized(detail::from_v(v));
    };

    const int iters = cfg.max_iters > 0 ? cfg.max_iters : static_cast<int>(500 * n);
    detail::NmResult best;
    bool any_finite = false;
    for (const auto& s : starts) {
        const double fs = penalized(s);
        if (std::isfinite(fs)) any_finite = true;
        auto r = detail::nelder_mead(fv, detail::to_v(s), cfg.initial_step, cfg.diameter_tol, iters);
        any_finite = any_finite || r.any_finite;
        // A run never ends above its own start; keep the start if it wins.
        if (fs <= r.f) r = {detail::to_v(s), fs, r.any_finite};
        if (r.f < best.f || best.v.empty()) best = r;
    }
    if (!any_finite) throw ObjectiveError("minimize_on_simplex: objective is non-finite at every probe");
    auto polish = detail::nelder_mead(fv, best.v, 0.1 * cfg.initial_step, cfg.diameter_tol, iters);
    if (polish.f < best.f) best = polish;

    Weights w = detail::from_v(best.v);
    if (turnover && l1_distance(w, turnover->prev) > turnover->cap)
        w = apply_turnover_cap(turnover->prev, w, turnover->cap);
    return w;
}

// Minimizes f on [0, 1]: grid of `grid` steps, then golden-section refinement
// around the best grid point.
inline double minimize_on_segment(const std::function<double(double)>& f, int grid = 1000, double tol = 1e-7) {
    if (grid < 2) throw ParameterError("minimize_on_segment: grid must be >= 2");
    auto safe = [&](double x) {
        try {
            const double r = f(x);
            return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
        } catch (const DegenerateSample&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    int best = 0;
    double fbest = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid; ++k) {
        const double v = safe(static_cast<double>(k) / grid);
        if (v < fbest) {
            fbest = v;
            best = k;
        }
    }
    if (!std::isfinite(fbest)) throw ObjectiveError("minimize_on_segment: objective is non-finite everywhere");
    double a = static_cast<double>(std::max(best - 1, 0)) / grid;
    double b = static_cast<double>(std::min(best + 1, grid)) / grid;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = safe(c), fd = safe(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = safe(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = safe(d);
        }
    }
    const double xm = 0.5 * (a + b);
    const double fm = safe(xm);
    const double xg = static_cast<double>(best) / grid;
    return fm <= fbest ? xm : xg;
}

// ---- strategies ----

struct ROpt {
    double alpha = 1.0;
    // m = ceil(N^(1/m_root)) unless m is fixed.
    double m_root = 1.5;
    std::optional<std::size_t> m;
    bool bias_correct = false;
};
struct MV {
    CovarianceKind covariance = CovarianceKind::Sample;
    // Shrinkage intensity; empty means the automatic estimate.
    std::optional<double> delta;
};
struct MVaR {
    double r = 0.05;
};
struct MCVaR {
    double r = 0.05;
};
struct MSR {
    double periods_per_year = 52.0;
};
struct EW {};
struct SixtyForty {
    std::size_t equity = 0;
    std::size_t bond = 1;
};

using StrategyKind = std::variant<ROpt, MV, MVaR, MCVaR, MSR, EW, SixtyForty>;

struct Strategy {
    std::string name;
    StrategyKind kind;
    std::optional<double> turnover_cap;
};

inline void validate(const Strategy& s) {
    if (s.turnover_cap && !(*s.turnover_cap > 0.0)) throw ParameterError("Strategy: turnover_cap must be > 0");
    std::visit(
        [](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ROpt>) {
                detail::check_alpha(k.alpha);
                if (!(k.m_root > 0.0)) throw ParameterError("ROpt: m_root must be > 0");
                if (k.m && *k.m < 1) throw ParameterError("ROpt: m must be >= 1");
                if (k.bias_correct && !is_shannon(k.alpha)) throw ParameterError("ROpt: bias correction needs alpha = 1");
            } else if constexpr (std::is_same_v<K, MV>) {
                if (k.delta && !(*k.delta >= 0.0 && *k.delta <= 1.0)) throw ParameterError("MV: delta must lie in [0, 1]");
            } else if constexpr (std::is_same_v<K, MVaR> || std::is_same_v<K, MCVaR>) {
                if (!(k.r > 0.0 && k.r <= 0.5)) throw ParameterError("tail strategy: r must lie in (0, 0.5]");
            } else if constexpr (std::is_same_v<K, MSR>) {
                if (!(k.periods_per_year > 0.0)) throw ParameterError("MSR: periods_per_year must be > 0");
            } else if constexpr (std::is_same_v<K, SixtyForty>) {
                if (k.equity == k.bond) throw ParameterError("SixtyForty: equity and bond must differ");
            }
        },
        s.kind);
}

// Annualized geometric mean return: (prod(1 + P))^(ppy / T) - 1.
inline double annual_geometric_return(std::span<const double> p, double periods_per_year = 52.0) {
    double log_sum = 0.0;
    for (double x : p) {
        if (!(x > -1.0)) return -1.0;
        log_sum += std::log1p(x);
    }
    return std::expm1(log_sum * periods_per_year / static_cast<double>(p.size()));
}

inline double annual_volatility(std::span<const double> p, double periods_per_year = 52.0) {
    return sample_moments(p).stdev * std::sqrt(periods_per_year);
}

namespace detail {

inline std::size_t lowest_variance_asset(const Eigen::MatrixXd& R) {
    const Eigen::MatrixXd c = R.rowwise() - R.colwise().mean();
    Eigen::Index best = 0;
    c.colwise().squaredNorm().minCoeff(&best);
    return static_cast<std::size_t>(best);
}

} // namespace detail

// Fits the strategy's weights on an estimation window (T x n).
inline Weights solve_strategy(const Strategy& s, const Eigen::MatrixXd& R, const std::optional<Weights>& prev,
                              const SolverConfig& base = {}) {
    validate(s);
    const std::size_t n = static_cast<std::size_t>(R.cols());
    const std::size_t t = static_cast<std::size_t>(R.rows());
    if (t < 30) throw InsufficientData("solve_strategy: estimation window needs at least 30 rows");
    if (n < 1) throw InsufficientData("solve_strategy: no assets");
    if (s.turnover_cap && !prev) throw ParameterError("solve_strategy: turnover cap requires previous weights");
    if (prev && prev->size() != n) throw ParameterError("solve_strategy: previous weights have the wrong size");

    if (std::holds_alternative<EW>(s.kind)) return Weights::equal(n);
    if (const auto* sf = std::get_if<SixtyForty>(&s.kind)) {
        if (sf->equity >= n || sf->bond >= n) throw ParameterError("SixtyForty: asset index out of range");
        std::vector<double> w(n, 0.0);
        w[sf->equity] = 0.6;
        w[sf->bond] = 0.4;
        return Weights(std::move(w));
    }
    if (n == 1) return Weights::equal(1);

    SolverConfig cfg = base;
    if (prev) cfg.extra_starts.insert(cfg.extra_starts.begin(), *prev);
    cfg.extra_starts.push_back(Weights::vertex(n, detail::lowest_variance_asset(R)));

    std::optional<TurnoverConstraint> tc;
    if (s.turnover_cap) tc = TurnoverConstraint{*prev, *s.turnover_cap};

    std::vector<double> buf(t);
    auto portfolio = [&](const Weights& w) -> std::span<const double> {
        Eigen::Map<Eigen::VectorXd>(buf.data(), static_cast<Eigen::Index>(t)) = R * w.vec();
        return buf;
    };

    Objective obj;
    Eigen::MatrixXd sigma;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ROpt>) {
                RenyiParams p{k.alpha, k.m ? *k.m : m_from_root(t, k.m_root), k.bias_correct};
                if (p.m >= t) throw ParameterError("ROpt: m must be < window length");
                obj = [&, p](const Weights& w) { return m_spacings_estimate(portfolio(w), p); };
            } else if constexpr (std::is_same_v<K, MV>) {
                sigma = k.covariance == CovarianceKind::Sample ? sample_covariance(R).matrix
                                                               : shrinkage_covariance(R, k.delta).matrix;
                obj = [&](const Weights& w) { return w.vec().dot(sigma * w.vec()); };
            } else if constexpr (std::is_same_v<K, MVaR>) {
                const TailSpec spec{k.r, TailMethod::CornishFisher};
                obj = [&, spec](const Weights& w) { return tail_risk(portfolio(w), spec, false); };
            } else if constexpr (std::is_same_v<K, MCVaR>) {
                const TailSpec spec{k.r, TailMethod::ModifiedES};
                obj = [&, spec](const Weights& w) { return tail_risk(portfolio(w), spec, true); };
            } else if constexpr (std::is_same_v<K, MSR>) {
                const double ppy = k.periods_per_year;
                obj = [&, ppy](const Weights& w) {
                    const auto p = portfolio(w);
                    const double vol = annual_volatility(p, ppy);
                    if (!(vol > 0.0)) return std::numeric_limits<double>::infinity();
                    return -annual_geometric_return(p, ppy) / vol;
                };
            }
        },
        s.kind);
    return minimize_on_simplex(obj, n, cfg, tc);
}

} // namespace renyi
