// backtest.hpp
// Rolling-window rebalancing: fit on [k roll, k roll + est), hold the weights
// fixed for the next `roll` rows, shift by `roll`.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "optim.hpp"
#include "risk.hpp"
#include "rng.hpp"

namespace renyi {

struct ReturnMatrix {
    std::vector<std::string> dates;  // ISO-8601, strictly increasing
    Eigen::MatrixXd returns;         // T x n arithmetic returns
    std::vector<std::string> asset_names;

    std::size_t periods() const { return static_cast<std::size_t>(returns.rows()); }
    std::size_t assets() const { return static_cast<std::size_t>(returns.cols()); }
};

inline void validate(const ReturnMatrix& r) {
    if (r.dates.size() != r.periods()) throw InputError("ReturnMatrix: one date per row required");
    if (r.asset_names.size() != r.assets()) throw InputError("ReturnMatrix: one name per column required");
    for (std::size_t i = 1; i < r.dates.size(); ++i)
        if (!(r.dates[i - 1] < r.dates[i]))
            throw InputError("ReturnMatrix: dates not strictly increasing at row " + std::to_string(i + 1));
    for (Eigen::Index i = 0; i < r.returns.rows(); ++i)
        for (Eigen::Index j = 0; j < r.returns.cols(); ++j) {
            const double v = r.returns(i, j);
            if (!std::isfinite(v) || v <= -1.0)
                throw InputError("ReturnMatrix: invalid return at row " + std::to_string(i + 1) + ", column " +
                                 r.asset_names[static_cast<std::size_t>(j)]);
        }
}

struct BacktestConfig {
    std::size_t estimation_window = 260;
    std::size_t roll = 26;
    std::vector<Strategy> strategies;
    SolverConfig solver;
    // Strategies run concurrently on up to this many threads.
    unsigned workers = 1;
};

struct Window {
    std::size_t est_begin = 0;   // first estimation row
    std::size_t hold_begin = 0;  // first held row (== est_begin + estimation_window)
    std::size_t hold_end = 0;    // one past the last held row
};

struct StrategyTrack {
    std::string name;
    std::vector<Weights> weights;  // one per completed window
    std::vector<double> returns;   // out-of-sample portfolio returns
    // Set when the strategy failed; the track stops at that window.
    std::optional<std::string> error;
    std::optional<std::size_t> failed_window;
};

struct BacktestResult {
    std::vector<Window> windows;
    // Sample covariance of each estimation window.
    std::vector<Eigen::MatrixXd> window_covariances;
    std::vector<StrategyTrack> tracks;
    // Dates of the out-of-sample rows.
    std::vector<std::string> oos_dates;
};

inline std::size_t window_count(std::size_t periods, std::size_t estimation_window, std::size_t roll) {
    if (roll < 1) throw ParameterError("backtest: roll must be >= 1");
    if (periods < estimation_window + roll) return 0;
    return (periods - estimation_window) / roll;
}

inline std::vector<Window> make_windows(std::size_t periods, std::size_t estimation_window, std::size_t roll) {
    const std::size_t k = window_count(periods, estimation_window, roll);
    std::vector<Window> out;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t b = i * roll;
        out.push_back({b, b + estimation_window, b + estimation_window + roll});
    }
    return out;
}

namespace detail {

inline StrategyTrack run_track(const Strategy& s, const ReturnMatrix& data, const std::vector<Window>& windows,
                               const SolverConfig& solver) {
    StrategyTrack tr;
    tr.name = s.name;
    std::optional<Weights> prev;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        const auto& win = windows[k];
        const auto est = static_cast<Eigen::Index>(win.hold_begin - win.est_begin);
        const Eigen::MatrixXd R = data.returns.middleRows(static_cast<Eigen::Index>(win.est_begin), est);
        try {
            // The first window has nothing to measure turnover against.
            Strategy sk = s;
            if (!prev) sk.turnover_cap.reset();
            Weights w = solve_strategy(sk, R, prev, solver);
            const auto hold = static_cast<Eigen::Index>(win.hold_end - win.hold_begin);
            const Eigen::VectorXd p =
                data.returns.middleRows(static_cast<Eigen::Index>(win.hold_begin), hold) * w.vec();
            tr.returns.insert(tr.returns.end(), p.data(), p.data() + p.size());
            tr.weights.push_back(w);
            prev = std::move(w);
        } catch (const Error& e) {
            tr.error = "window " + std::to_string(k) + ": " + e.what();
            tr.failed_window = k;
            break;
        }
    }
    return tr;
}

} // namespace detail

inline BacktestResult run_backtest(const ReturnMatrix& data, const BacktestConfig& cfg) {
    validate(data);
    validate(cfg.solver);
    if (cfg.roll < 1) throw ParameterError("backtest: roll must be >= 1");
    if (cfg.estimation_window < 2) throw ParameterError("backtest: estimation window must be >= 2");
    if (cfg.estimation_window + cfg.roll > data.periods())
        throw InsufficientData("backtest: need at least estimation_window + roll rows (have " +
                               std::to_string(data.periods()) + ")");
    for (const auto& s : cfg.strategies) validate(s);

    BacktestResult res;
    res.windows = make_windows(data.periods(), cfg.estimation_window, cfg.roll);
    for (const auto& w : res.windows) {
        res.window_covariances.push_back(
            sample_covariance(data.returns.middleRows(static_cast<Eigen::Index>(w.est_begin),
                                                      static_cast<Eigen::Index>(cfg.estimation_window)))
                .matrix);
        for (std::size_t t = w.hold_begin; t < w.hold_end; ++t) res.oos_dates.push_back(data.dates[t]);
    }

    res.tracks.resize(cfg.strategies.size());
    const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, std::max<std::size_t>(cfg.strategies.size(), 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < cfg.strategies.size(); ++i)
            res.tracks[i] = detail::run_track(cfg.strategies[i], data, res.windows, cfg.solver);
        return res;
    }
    // Strategy i goes to worker i % workers; each writes only its own slots.
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < cfg.strategies.size(); i += workers)
                res.tracks[i] = detail::run_track(cfg.strategies[i], data, res.windows, cfg.solver);
        });
    for (auto& t : pool) t.join();
    return res;
}

// `count` ISO dates one week apart starting at y-m-d.
inline std::vector<std::string> weekly_dates(int y, unsigned m, unsigned d, std::size_t count) {
    using namespace std::chrono;
    const year_month_day start{year{y}, month{m}, day{d}};
    if (!start.ok()) throw ParameterError("weekly_dates: invalid start date");
    std::vector<std::string> out;
    out.reserve(count);
    sys_days day0{start};
    for (std::size_t i = 0; i < count; ++i) {
        const year_month_day t{day0 + days{7 * static_cast<long>(i)}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(t.year()), static_cast<unsigned>(t.month()),
                      static_cast<unsigned>(t.day()));
        out.emplace_back(buf);
    }
    return out;
}

// i.i.d. multivariate Gaussian returns with weekly dates from 1990-01-05.
inline ReturnMatrix gaussian_panel(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, std::size_t periods,
                                   std::uint64_t seed) {
    const Eigen::Index n = mu.size();
    if (cov.rows() != n || cov.cols() != n) throw ParameterError("gaussian_panel: shape mismatch");
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw ParameterError("gaussian_panel: covariance not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    Rng rng(seed);
    ReturnMatrix r;
    r.returns.resize(static_cast<Eigen::Index>(periods), n);
    Eigen::VectorXd z(n);
    for (Eigen::Index t = 0; t < r.returns.rows(); ++t) {
        for (Eigen::Index j = 0; j < n; ++j) z(j) = rng.normal();
        r.returns.row(t) = (mu + l * z).transpose();
    }
    r.dates = weekly_dates(1990, 1, 5, periods);
    for (Eigen::Index j = 0; j < n; ++j) r.asset_names.push_back("A" + std::to_string(j + 1));
    return r;
}

// Consecutive (w_t, w_{t+1}) target-weight pairs at each rebalance.
inline std::vector<std::pair<Weights, Weights>> weight_trajectory_stats(const StrategyTrack& tr) {
    std::vector<std::pair<Weights, Weights>> out;
    for (std::size_t k = 1; k < tr.weights.size(); ++k) out.emplace_back(tr.weights[k - 1], tr.weights[k]);
    return out;
}

} // namespace renyi
