// experiments.hpp
// Synthetic studies: sub-additivity (independent and copula-linked pairs),
// tail sensitivity, the variance/kurtosis trade-off of the optimal weight,
// estimator bias, small-sample weights, outlier robustness, and the
// comonotonic counter-example. Each returns typed results plus a Table.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "dists.hpp"
#include "entropy.hpp"
#include "error.hpp"
#include "optim.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "table.hpp"

namespace renyi {

enum class StudyKind {
    SubAdditivityIndependent,
    SubAdditivityCopula,
    TailSensitivity,
    VarianceKurtosisTradeoff,
    AsymptoticBias,
    SmallSampleWeights,
    OutlierRobustness,
    ComonotonicCounterexample,
};

struct StudyName {
    StudyKind kind;
    const char* name;
};

inline constexpr std::array<StudyName, 8> kStudies = {{
    {StudyKind::SubAdditivityIndependent, "subadditivity"},
    {StudyKind::SubAdditivityCopula, "copula"},
    {StudyKind::TailSensitivity, "tail-sensitivity"},
    {StudyKind::VarianceKurtosisTradeoff, "tradeoff"},
    {StudyKind::AsymptoticBias, "bias"},
    {StudyKind::SmallSampleWeights, "small-sample"},
    {StudyKind::OutlierRobustness, "outliers"},
    {StudyKind::ComonotonicCounterexample, "comonotonic"},
}};

inline std::optional<StudyKind> study_from_name(const std::string& s) {
    for (const auto& e : kStudies)
        if (s == e.name) return e.kind;
    return std::nullopt;
}

inline std::string study_name(StudyKind k) {
    for (const auto& e : kStudies)
        if (e.kind == k) return e.name;
    return "unknown";
}

struct StudyOptions {
    std::uint64_t seed = 1;
    // Cuts repetitions and sample sizes tenfold.
    bool desk_scale = false;
    // Overrides of the default repetition count / sample size.
    std::optional<int> reps;
    std::optional<std::size_t> samples;
    unsigned workers = 1;
    QuadratureSpec quad;
};

namespace detail {

inline int reps_or(const StudyOptions& o, int full) {
    if (o.reps) {
        if (*o.reps < 1) throw ParameterError("study: reps must be >= 1");
        return *o.reps;
    }
    return o.desk_scale ? full / 10 : full;
}

inline std::size_t samples_or(const StudyOptions& o, std::size_t full) {
    if (o.samples) {
        if (*o.samples < 3) throw ParameterError("study: samples must be >= 3");
        return *o.samples;
    }
    return o.desk_scale ? full / 10 : full;
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. Callers write
// results into slot i only, so output never depends on scheduling.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& fn) {
    const std::size_t w = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (w == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(w);
    for (std::size_t t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += w) fn(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

inline double estimate_sorted(std::span<const double> sorted, double alpha, std::size_t m) {
    const RenyiParams p{alpha, m, false};
    check_params(sorted.size(), p);
    return m_spacings_sorted(sorted, p);
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stdev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Estimated optimal weight on X for the two-asset portfolio w X + (1 - w) Y.
inline double estimated_weight(const std::vector<double>& x, const std::vector<double>& y, double alpha,
                               std::size_t m) {
    std::vector<double> p(x.size());
    const RenyiParams params{alpha, m, false};
    return minimize_on_segment([&](double w) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = w * x[i] + (1.0 - w) * y[i];
        return m_spacings_estimate(p, params);
    });
}

} // namespace detail

// Density of w X + (1 - w) Y for independent X, Y.
inline Density portfolio_density(const Marginal& x, const Marginal& y, double w, const QuadratureSpec& q = {}) {
    if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("portfolio_density: w must lie in [0, 1]");
    if (w == 0.0) return make_density(y, q);
    if (w == 1.0) return make_density(x, q);
    return convolve_density(scaled(x, w), scaled(y, 1.0 - w), q);
}

// ---- comonotonic counter-example ----

struct ComonotonicResult {
    double e_w = 0.0;        // E[ln(1 + zeta)], zeta ~ Exp(1)
    double e_z = 0.0;        // E[ln zeta]
    double e_gamma_ref = 0.0;  // e * Gamma(0, 1) from the exponential integral
    double lhs = 0.0;        // exp(E[W])
    double rhs = 0.0;        // 1 + exp(E[Z])
    bool superadditive = false;
};

inline ComonotonicResult comonotonic_study(const QuadratureSpec& q = {}) {
    ComonotonicResult r;
    const std::vector<double> kw{0.0, 0.5, 1.0, 2.0, 4.0, 6.0};
    r.e_w = integrate_pieces([](double x) { return x * std::exp(1.0 + x - std::exp(x)); }, kw, q);
    const std::vector<double> kz{-60.0, -20.0, -5.0, -1.0, 0.0, 1.0, 2.0, 4.0};
    r.e_z = integrate_pieces([](double x) { return x * std::exp(x - std::exp(x)); }, kz, q);
    r.e_gamma_ref = std::numbers::e * boost::math::expint(1, 1.0);
    r.lhs = std::exp(r.e_w);
    r.rhs = 1.0 + std::exp(r.e_z);
    r.superadditive = r.lhs > r.rhs;
    return r;
}

inline Table to_table(const ComonotonicResult& r) {
    Table t;
    t.name = "comonotonic";
    t.columns = {"quantity", "value"};
    t.add(Table::Row{} << "E[W]" << r.e_w);
    t.add(Table::Row{} << "e*Gamma(0,1)" << r.e_gamma_ref);
    t.add(Table::Row{} << "E[Z]" << r.e_z);
    t.add(Table::Row{} << "-euler_gamma" << -kEulerGamma);
    t.add(Table::Row{} << "exp(E[W])" << r.lhs);
    t.add(Table::Row{} << "1+exp(E[Z])" << r.rhs);
    t.add(Table::Row{} << "superadditive" << (r.superadditive ? 1.0 : 0.0));
    return t;
}

// ---- sub-additivity, independent pairs ----

struct PairSpec {
    std::string family;
    Marginal x;
    Marginal y;
};

inline std::vector<PairSpec> default_pairs() {
    return {{"student_t", StudentT{0.03, 0.20, 10.0}, StudentT{0.10, 0.40, 4.0}},
            {"skew_normal", SkewNormal{0.03, 0.20, -2.0}, SkewNormal{0.10, 0.40, -5.0}}};
}

inline const std::vector<double>& default_alpha_grid() {
    static const std::vector<double> g{0.3, 0.5, 0.7, 1.0, 1.5, 2.0};
    return g;
}

struct SubAdditivityRow {
    std::string family;
    double alpha = 1.0;
    double hx = 0.0, hy = 0.0, hz = 0.0;
    double gap = 0.0;  // H(X + Y) - H(X) - H(Y)
};

// Quadrature for the given pairs, plus the closed-form Levy pair at alpha = 1
// (sum of independent Levy laws is Levy with scale (sqrt(sx) + sqrt(sy))^2).
inline std::vector<SubAdditivityRow> subadditivity_study(const std::vector<PairSpec>& pairs,
                                                         const std::vector<double>& alphas,
                                                         const QuadratureSpec& q = {}) {
    std::vector<SubAdditivityRow> out;
    for (const auto& p : pairs) {
        const Density dz = convolve_density(p.x, p.y, q);
        for (double a : alphas) {
            SubAdditivityRow r{p.family, a};
            r.hx = exp_renyi_oracle(p.x, a, q);
            r.hy = exp_renyi_oracle(p.y, a, q);
            r.hz = exp_renyi_oracle(dz, a, q);
            r.gap = r.hz - r.hx - r.hy;
            out.push_back(r);
        }
    }
    const Levy lx{0.03, 0.20}, ly{0.10, 0.40};
    const double s = std::pow(std::sqrt(lx.sigma) + std::sqrt(ly.sigma), 2);
    SubAdditivityRow r{"levy_closed_form", 1.0};
    r.hx = *closed_form_entropy(lx, 1.0);
    r.hy = *closed_form_entropy(ly, 1.0);
    r.hz = *closed_form_entropy(Levy{lx.mu + ly.mu, s}, 1.0);
    r.gap = r.hz - r.hx - r.hy;
    out.push_back(r);
    return out;
}

inline Table to_table(const std::vector<SubAdditivityRow>& rows) {
    Table t;
    t.name = "subadditivity";
    t.columns = {"family", "alpha", "H_X", "H_Y", "H_X+Y", "gap", "subadditive"};
    for (const auto& r : rows) t.add(Table::Row{} << r.family << r.alpha << r.hx << r.hy << r.hz << r.gap << (r.gap <= 0.0));
    return t;
}

// ---- sub-additivity under a t copula ----

// m = N^(1/4), N^(1/3), N^(1/2.5), N^(1/2) for alpha in [0, 0.5), [0.5, 0.7), [0.7, 1), [1, inf).
inline std::size_t copula_m(std::size_t n, double alpha) {
    if (alpha < 0.5) return m_from_root(n, 4.0);
    if (alpha < 0.7) return m_from_root(n, 3.0);
    if (alpha < 1.0 && !is_shannon(alpha)) return m_from_root(n, 2.5);
    return m_from_root(n, 2.0);
}

struct CopulaRow {
    double rho = 0.0;
    double alpha = 1.0;
    std::size_t m = 1;
    double hx = 0.0, hy = 0.0, hz = 0.0;
    double gap = 0.0;
};

// Every rho reuses the same underlying draws (common random numbers), so the
// comparison across rho is not blurred by sampling noise.
inline std::vector<CopulaRow> copula_study(const StudyOptions& o, const std::vector<double>& rhos = {-1.0, -0.5, 0.0, 0.5, 1.0},
                                           const std::vector<double>& alphas = default_alpha_grid()) {
    const auto pair = default_pairs().front();
    CopulaSpec c;
    c.nu = 7.0;
    c.sample_count = detail::samples_or(o, 500000);
    std::vector<std::vector<CopulaRow>> slots(rhos.size());
    detail::parallel_for(rhos.size(), o.workers, [&](std::size_t i) {
        CopulaSpec ci = c;
        ci.rho = rhos[i];
        auto s = sample_copula(pair.x, pair.y, ci, Rng::derive(o.seed, 0));
        std::vector<double> z(s.x.size());
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = s.x[k] + s.y[k];
        const auto sx = detail::sorted_with_jitter(s.x);
        const auto sy = detail::sorted_with_jitter(s.y);
        const auto sz = detail::sorted_with_jitter(z);
        for (double a : alphas) {
            CopulaRow r{rhos[i], a, copula_m(z.size(), a)};
            r.hx = detail::estimate_sorted(sx, a, r.m);
            r.hy = detail::estimate_sorted(sy, a, r.m);
            r.hz = detail::estimate_sorted(sz, a, r.m);
            r.gap = r.hz - r.hx - r.hy;
            slots[i].push_back(r);
        }
    });
    std::vector<CopulaRow> out;
    for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
    return out;
}

inline Table to_table(const std::vector<CopulaRow>& rows) {
    Table t;
    t.name = "copula";
    t.columns = {"rho", "alpha", "m", "H_X", "H_Y", "H_X+Y", "gap"};
    for (const auto& r : rows) t.add(Table::Row{} << r.rho << r.alpha << r.m << r.hx << r.hy << r.hz << r.gap);
    return t;
}

// ---- tail sensitivity ----

struct TailSensitivityRow {
    double nu = 0.0;
    double alpha = 1.0;
    double h = 0.0;
};

inline std::vector<TailSensitivityRow> tail_sensitivity_study(const std::vector<double>& nus,
                                                              const std::vector<double>& alphas,
                                                              const QuadratureSpec& q = {}) {
    std::vector<TailSensitivityRow> out;
    for (double a : alphas)
        for (double nu : nus) out.push_back({nu, a, exp_renyi_oracle(StudentT{0.0, 1.0, nu}, a, q)});
    return out;
}

inline std::vector<TailSensitivityRow> tail_sensitivity_study(const QuadratureSpec& q = {}) {
    std::vector<double> nus;
    for (int v = 2; v <= 30; ++v) nus.push_back(v);
    return tail_sensitivity_study(nus, {0.4, 0.5, 0.7, 1.0}, q);
}

inline Table to_table(const std::vector<TailSensitivityRow>& rows) {
    Table t;
    t.name = "tail-sensitivity";
    t.columns = {"alpha", "nu", "H"};
    for (const auto& r : rows) t.add(Table::Row{} << r.alpha << r.nu << r.h);
    return t;
}

// ---- variance / kurtosis trade-off ----

struct TradeoffPoint {
    double w = 0.0;
    double stdev = 0.0;
    double exkurt = 0.0;
    std::vector<double> h;  // one per alpha
};

struct TradeoffResult {
    std::vector<double> alphas;
    std::vector<TradeoffPoint> curve;
    std::vector<double> argmin;  // oracle-optimal weight per alpha
    double w_min_variance = 0.0;
    double w_min_kurtosis = 0.0;
};

inline double tradeoff_variance(const StudentT& t, double w) { return w * w * t.sigma * t.sigma * t.nu / (t.nu - 2.0); }

inline TradeoffResult tradeoff_study(const QuadratureSpec& q = {}, double grid_step = 0.05,
                                     const std::vector<double>& alphas = {0.5, 0.7, 1.0, 2.0}, bool curve = true) {
    const StudentT x{0.0, 0.3, 10.0}, y{0.0, 0.2, 6.0};
    const double kx = *kurtosis(x), ky = *kurtosis(y);
    TradeoffResult r;
    r.alphas = alphas;
    auto var_at = [&](double w) { return tradeoff_variance(x, w) + tradeoff_variance(y, 1.0 - w); };
    auto kurt_at = [&](double w) {
        if (w <= 0.0) return ky;
        if (w >= 1.0) return kx;
        return kurtosis_of_independent_sum(tradeoff_variance(x, w), kx, tradeoff_variance(y, 1.0 - w), ky);
    };
    const double vx = tradeoff_variance(x, 1.0), vy = tradeoff_variance(y, 1.0);
    r.w_min_variance = vy / (vx + vy);
    r.w_min_kurtosis = minimize_on_segment(kurt_at, 1000, 1e-9);
    if (curve) {
        const int steps = static_cast<int>(std::lround(1.0 / grid_step));
        for (int k = 0; k <= steps; ++k) {
            const double w = static_cast<double>(k) / steps;
            TradeoffPoint p{w, std::sqrt(var_at(w)), kurt_at(w) - 3.0, {}};
            const Density d = portfolio_density(x, y, w, q);
            for (double a : alphas) p.h.push_back(exp_renyi_oracle(d, a, q));
            r.curve.push_back(std::move(p));
        }
    }
    for (double a : alphas)
        r.argmin.push_back(minimize_on_segment(
            [&](double w) { return exp_renyi_oracle(portfolio_density(x, y, w, q), a, q); }, 10, 1e-5));
    return r;
}

inline Table to_table(const TradeoffResult& r) {
    Table t;
    t.name = "tradeoff";
    t.add_meta("w_min_variance", r.w_min_variance);
    t.add_meta("w_min_kurtosis", r.w_min_kurtosis);
    for (std::size_t i = 0; i < r.alphas.size(); ++i) t.add_meta("argmin_alpha_" + fmt_num(r.alphas[i]), r.argmin[i]);
    t.columns = {"w", "stdev", "excess_kurtosis"};
    for (double a : r.alphas) t.columns.push_back("H_alpha_" + fmt_num(a));
    for (const auto& p : r.curve) {
        Table::Row row;
        row << p.w << p.stdev << p.exkurt;
        for (double h : p.h) row << h;
        t.add(row);
    }
    return t;
}

// ---- asymptotic bias ----

struct BiasRow {
    std::string density;
    std::size_t m = 1;
    double alpha = 1.0;
    double estimate = 0.0;
    double truth = 0.0;
    double log_gap = 0.0;      // ln(estimate) - ln(truth)
    double digamma_law = 0.0;  // psi(m) - ln m
};

struct NamedMarginal {
    std::string name;
    Marginal law;
};

inline std::vector<NamedMarginal> bias_densities() {
    return {{"uniform", Uniform{0.0, 1.0}},
            {"beta", Beta{2.0, 2.0}},
            {"gaussian", Gaussian{0.0, 1.0}},
            {"exponential", Exponential{1.0}}};
}

inline std::vector<double> bias_alpha_grid() {
    std::vector<double> g;
    for (int k = 2; k <= 20; ++k) g.push_back(k / 10.0);
    return g;
}

inline std::vector<BiasRow> bias_study(const StudyOptions& o, const std::vector<NamedMarginal>& laws = bias_densities(),
                                       const std::vector<std::size_t>& ms = {1, 2, 5, 10},
                                       const std::vector<double>& alphas = bias_alpha_grid()) {
    const std::size_t n = detail::samples_or(o, 1000000);
    std::vector<std::vector<BiasRow>> slots(laws.size());
    detail::parallel_for(laws.size(), o.workers, [&](std::size_t i) {
        const auto& law = laws[i];
        const auto s = detail::sorted_with_jitter(sample(law.law, n, Rng::derive(o.seed, i)));
        for (std::size_t m : ms)
            for (double a : alphas) {
                BiasRow r{law.name, m, a};
                r.estimate = detail::estimate_sorted(s, a, m);
                const auto cf = closed_form_entropy(law.law, a);
                r.truth = cf ? *cf : exp_renyi_oracle(law.law, a, o.quad);
                r.log_gap = std::log(r.estimate) - std::log(r.truth);
                r.digamma_law = asymptotic_bias(m);
                slots[i].push_back(r);
            }
    });
    std::vector<BiasRow> out;
    for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
    return out;
}

inline Table to_table(const std::vector<BiasRow>& rows, std::size_t n) {
    Table t;
    t.name = "bias";
    t.add_meta("N", static_cast<double>(n));
    t.columns = {"density", "m", "alpha", "estimate", "truth", "log_gap", "digamma_law"};
    for (const auto& r : rows)
        t.add(Table::Row{} << r.density << r.m << r.alpha << r.estimate << r.truth << r.log_gap << r.digamma_law);
    return t;
}

// ---- small-sample optimal weights ----

struct WeightCell {
    double alpha = 1.0;
    std::size_t m = 1;
    std::string m_label;
    double mean = 0.0;
    double stdev = 0.0;
};

struct SmallSampleResult {
    std::vector<double> alphas;
    std::vector<double> true_w;  // oracle-optimal weight per alpha
    std::vector<WeightCell> cells;
    int reps = 0;
    std::size_t n = 0;
};

inline SmallSampleResult small_sample_weight_study(const StudyOptions& o) {
    const StudentT x{0.08, 0.2, 6.0}, y{0.03, 0.15, 8.0};
    SmallSampleResult r;
    r.alphas = {0.5, 1.0};
    r.n = o.samples ? *o.samples : 260;
    r.reps = detail::reps_or(o, 500);
    const std::size_t sqrt_m = m_from_root(r.n, 2.0);
    const std::vector<std::pair<std::size_t, std::string>> ms{{1, "1"}, {sqrt_m, "sqrt(N)"}};

    for (double a : r.alphas)
        r.true_w.push_back(minimize_on_segment(
            [&](double w) { return exp_renyi_oracle(portfolio_density(x, y, w, o.quad), a, o.quad); }, 10, 1e-6));

    const std::size_t cells = r.alphas.size() * ms.size();
    std::vector<std::vector<double>> est(static_cast<std::size_t>(r.reps), std::vector<double>(cells));
    detail::parallel_for(static_cast<std::size_t>(r.reps), o.workers, [&](std::size_t rep) {
        Rng rng(Rng::derive(o.seed, rep));
        std::vector<double> xs(r.n), ys(r.n);
        for (auto& v : xs) v = draw(x, rng);
        for (auto& v : ys) v = draw(y, rng);
        std::size_t c = 0;
        for (double a : r.alphas)
            for (const auto& mm : ms) est[rep][c++] = detail::estimated_weight(xs, ys, a, mm.first);
    });
    std::size_t c = 0;
    for (double a : r.alphas)
        for (const auto& mm : ms) {
            std::vector<double> col;
            for (const auto& e : est) col.push_back(e[c]);
            r.cells.push_back({a, mm.first, mm.second, detail::mean_of(col), detail::stdev_of(col)});
            ++c;
        }
    return r;
}

inline Table to_table(const SmallSampleResult& r) {
    Table t;
    t.name = "small-sample";
    t.add_meta("N", static_cast<double>(r.n));
    t.add_meta("reps", static_cast<double>(r.reps));
    for (std::size_t i = 0; i < r.alphas.size(); ++i) t.add_meta("true_w_alpha_" + fmt_num(r.alphas[i]), r.true_w[i]);
    t.columns = {"alpha", "m_rule", "m", "true_w", "mean_w", "stdev_w"};
    for (const auto& cell : r.cells) {
        const auto it = std::find(r.alphas.begin(), r.alphas.end(), cell.alpha);
        const double tw = r.true_w[static_cast<std::size_t>(it - r.alphas.begin())];
        t.add(Table::Row{} << cell.alpha << cell.m_label << cell.m << tw << cell.mean << cell.stdev);
    }
    return t;
}

// ---- outlier robustness ----

struct OutlierResult {
    std::vector<double> alphas;
    std::vector<double> roots;  // m = ceil(N^(1/root))
    std::vector<std::size_t> ms;
    std::vector<std::vector<double>> mean;   // [alpha][root]
    std::vector<std::vector<double>> stdev;  // [alpha][root]
    double outlier = 0.0;
    int reps = 0;
    std::size_t n = 0;
};

// Two i.i.d. t(0, 0.3, 10) assets, N = 100; the last draw of X is replaced by
// the 0.05% quantile. The same draws serve every (alpha, m).
inline OutlierResult outlier_study(const StudyOptions& o) {
    const StudentT law{0.0, 0.3, 10.0};
    OutlierResult r;
    r.alphas = {0.3, 0.5, 0.7, 1.0};
    r.roots = {4.0, 3.0, 2.0, 1.5};
    r.n = o.samples ? *o.samples : 100;
    r.reps = detail::reps_or(o, 500);
    for (double root : r.roots) r.ms.push_back(m_from_root(r.n, root));
    r.outlier = quantile(law, 0.0005);

    const std::size_t na = r.alphas.size(), nm = r.ms.size();
    std::vector<std::vector<double>> est(static_cast<std::size_t>(r.reps), std::vector<double>(na * nm));
    detail::parallel_for(static_cast<std::size_t>(r.reps), o.workers, [&](std::size_t rep) {
        Rng rng(Rng::derive(o.seed, rep));
        std::vector<double> xs(r.n), ys(r.n);
        for (auto& v : xs) v = draw(law, rng);
        for (auto& v : ys) v = draw(law, rng);
        xs.back() = r.outlier;
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < nm; ++j) est[rep][i * nm + j] = detail::estimated_weight(xs, ys, r.alphas[i], r.ms[j]);
    });
    r.mean.assign(na, std::vector<double>(nm));
    r.stdev.assign(na, std::vector<double>(nm));
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nm; ++j) {
            std::vector<double> col;
            for (const auto& e : est) col.push_back(e[i * nm + j]);
            r.mean[i][j] = detail::mean_of(col);
            r.stdev[i][j] = detail::stdev_of(col);
        }
    return r;
}

inline Table to_table(const OutlierResult& r) {
    Table t;
    t.name = "outliers";
    t.add_meta("N", static_cast<double>(r.n));
    t.add_meta("reps", static_cast<double>(r.reps));
    t.add_meta("outlier", r.outlier);
    t.columns = {"alpha"};
    for (std::size_t j = 0; j < r.roots.size(); ++j)
        t.columns.push_back("mean_w_m=N^(1/" + fmt_num(r.roots[j]) + ")=" + std::to_string(r.ms[j]));
    for (std::size_t j = 0; j < r.roots.size(); ++j) t.columns.push_back("stdev_w_m=" + std::to_string(r.ms[j]));
    for (std::size_t i = 0; i < r.alphas.size(); ++i) {
        Table::Row row;
        row << r.alphas[i];
        for (double v : r.mean[i]) row << v;
        for (double v : r.stdev[i]) row << v;
        t.add(row);
    }
    return t;
}

// ---- dispatcher ----

inline Table run_study(StudyKind kind, const StudyOptions& o) {
    validate(o.quad);
    Table t;
    switch (kind) {
    case StudyKind::ComonotonicCounterexample: t = to_table(comonotonic_study(o.quad)); break;
    case StudyKind::SubAdditivityIndependent:
        t = to_table(subadditivity_study(default_pairs(), default_alpha_grid(), o.quad));
        break;
    case StudyKind::SubAdditivityCopula: {
        t = to_table(copula_study(o));
        t.add_meta("samples", static_cast<double>(detail::samples_or(o, 500000)));
        break;
    }
    case StudyKind::TailSensitivity: t = to_table(tail_sensitivity_study(o.quad)); break;
    case StudyKind::VarianceKurtosisTradeoff: t = to_table(tradeoff_study(o.quad)); break;
    case StudyKind::AsymptoticBias: t = to_table(bias_study(o), detail::samples_or(o, 1000000)); break;
    case StudyKind::SmallSampleWeights: t = to_table(small_sample_weight_study(o)); break;
    case StudyKind::OutlierRobustness: t = to_table(outlier_study(o)); break;
    }
    t.meta.insert(t.meta.begin(), {"seed", std::to_string(o.seed)});
    t.meta.insert(t.meta.begin() + 1, {"desk_scale", o.desk_scale ? "true" : "false"});
    return t;
}

} // namespace renyi
