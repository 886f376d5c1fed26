// metrics.hpp
// Out-of-sample performance indicators and the Ledoit-Wolf (2008) studentized
// circular block bootstrap test for a difference of Sharpe ratios.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "optim.hpp"
#include "risk.hpp"
#include "rng.hpp"

namespace renyi {

struct PerformanceReport {
    double annual_geometric_return = 0.0;
    double annual_volatility = 0.0;
    double sharpe = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double hist_var = 0.0;
    double hist_cvar = 0.0;
    double max_drawdown = 0.0;
    // Averages over windows.
    double entropy_of_weights = 0.0;
    double volatility_concentration = 0.0;
    double diversification_ratio = 0.0;
    double turnover = 0.0;
};

// exp(-sum w ln w), with 0 ln 0 = 0. Ranges from 1 (a vertex) to n (equal weights).
inline double entropy_of_weights(const Weights& w) {
    double s = 0.0;
    for (double x : w.values())
        if (x > 0.0) s -= x * std::log(x);
    return std::exp(s);
}

// w_i (Sigma w)_i / w' Sigma w for each asset; sums to one.
inline std::vector<double> euler_contributions(const Weights& w, const Eigen::MatrixXd& sigma) {
    const Eigen::VectorXd sw = sigma * w.vec();
    const double var = w.vec().dot(sw);
    if (!(var > 0.0)) throw DegenerateSample("euler_contributions: zero portfolio variance");
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] * sw(static_cast<Eigen::Index>(i)) / var;
    return out;
}

inline double volatility_concentration(const Weights& w, const Eigen::MatrixXd& sigma) {
    const auto c = euler_contributions(w, sigma);
    return *std::max_element(c.begin(), c.end());
}

// (sum w_i sigma_i - sqrt(w' Sigma w)) / sum w_i sigma_i
inline double diversification_ratio(const Weights& w, const Eigen::MatrixXd& sigma) {
    const Eigen::VectorXd sd = sigma.diagonal().cwiseMax(0.0).cwiseSqrt();
    const double wsd = w.vec().dot(sd);
    if (!(wsd > 0.0)) throw DegenerateSample("diversification_ratio: zero weighted volatility");
    const double pv = std::sqrt(std::max(0.0, w.vec().dot(sigma * w.vec())));
    return (wsd - pv) / wsd;
}

// Mean L1 distance between consecutive rebalance targets; 0 with fewer than two.
inline double turnover(std::span<const Weights> traj) {
    if (traj.size() < 2) return 0.0;
    double s = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) s += l1_distance(traj[k - 1], traj[k]);
    return s / static_cast<double>(traj.size() - 1);
}

// Largest peak-to-trough loss of W_t = prod (1 + P_s), W_0 = 1. Non-positive.
inline double max_drawdown(std::span<const double> p) {
    double wealth = 1.0, peak = 1.0, dd = 0.0;
    for (double x : p) {
        wealth *= 1.0 + x;
        peak = std::max(peak, wealth);
        dd = std::min(dd, wealth / peak - 1.0);
    }
    return dd;
}

inline PerformanceReport performance_report(std::span<const double> series, std::span<const Weights> weights,
                                            std::span<const Eigen::MatrixXd> covariances, double r = 0.05,
                                            double periods_per_year = 52.0) {
    if (series.size() < 8) throw InsufficientData("performance_report: need at least 8 returns");
    if (weights.empty()) throw InsufficientData("performance_report: empty weight trajectory");
    if (covariances.size() < weights.size())
        throw ParameterError("performance_report: one covariance per window required");
    PerformanceReport out;
    out.annual_geometric_return = annual_geometric_return(series, periods_per_year);
    out.annual_volatility = annual_volatility(series, periods_per_year);
    if (!(out.annual_volatility > 0.0)) throw DegenerateSample("performance_report: Sharpe undefined for a zero-variance series");
    out.sharpe = out.annual_geometric_return / out.annual_volatility;
    const auto mom = sample_moments(series);
    out.skewness = mom.skewness;
    out.excess_kurtosis = mom.exkurt;
    const auto tail = historical_var_cvar(series, r);
    out.hist_var = tail.var;
    out.hist_cvar = tail.cvar;
    out.max_drawdown = max_drawdown(series);
    const double k = static_cast<double>(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.entropy_of_weights += entropy_of_weights(weights[i]) / k;
        out.volatility_concentration += volatility_concentration(weights[i], covariances[i]) / k;
        out.diversification_ratio += diversification_ratio(weights[i], covariances[i]) / k;
    }
    out.turnover = turnover(weights);
    return out;
}

struct SharpeTestResult {
    // Per-period mean / stdev Sharpe ratios used by the test.
    double sharpe_a = 0.0;
    double sharpe_b = 0.0;
    double difference = 0.0;
    double two_sided_p = 1.0;
    int resamples = 0;
    int block_size = 0;
};

namespace detail {

struct SharpeDiff {
    double d = 0.0;
    double se = 0.0;
    double sa = 0.0;
    double sb = 0.0;
};

// Difference of Sharpe ratios and its delta-method standard error, with the
// long-run covariance of y_t = (a, b, a^2, b^2) estimated from blocks of
// length l: Psi = (1/B) sum_j zeta_j zeta_j', zeta_j = l^(-1/2) sum_{t in j} (y_t - mean).
inline SharpeDiff sharpe_diff(std::span<const double> a, std::span<const double> b, std::size_t l) {
    const std::size_t t = a.size();
    const double td = static_cast<double>(t);
    std::array<double, 4> mu{0, 0, 0, 0};
    for (std::size_t i = 0; i < t; ++i) {
        mu[0] += a[i];
        mu[1] += b[i];
        mu[2] += a[i] * a[i];
        mu[3] += b[i] * b[i];
    }
    for (double& x : mu) x /= td;
    const double va = mu[2] - mu[0] * mu[0];
    const double vb = mu[3] - mu[1] * mu[1];
    SharpeDiff out;
    if (!(va > 0.0 && vb > 0.0)) {
        out.se = 0.0;
        return out;
    }
    out.sa = mu[0] / std::sqrt(va);
    out.sb = mu[1] / std::sqrt(vb);
    out.d = out.sa - out.sb;
    const Eigen::Vector4d grad(mu[2] / std::pow(va, 1.5), -mu[3] / std::pow(vb, 1.5), -0.5 * mu[0] / std::pow(va, 1.5),
                               0.5 * mu[1] / std::pow(vb, 1.5));
    const std::size_t blocks = t / l;
    Eigen::Matrix4d psi = Eigen::Matrix4d::Zero();
    for (std::size_t j = 0; j < blocks; ++j) {
        Eigen::Vector4d z = Eigen::Vector4d::Zero();
        for (std::size_t i = j * l; i < (j + 1) * l; ++i)
            z += Eigen::Vector4d(a[i] - mu[0], b[i] - mu[1], a[i] * a[i] - mu[2], b[i] * b[i] - mu[3]);
        z /= std::sqrt(static_cast<double>(l));
        psi += z * z.transpose();
    }
    psi /= static_cast<double>(blocks);
    out.se = std::sqrt(std::max(0.0, grad.dot(psi * grad)) / td);
    return out;
}

} // namespace detail

// Two-sided p-value for H0: Sharpe(a) = Sharpe(b) by the studentized circular
// block bootstrap: p = (#{|d* - d| / se* >= |d| / se} + 1) / (M + 1).
inline SharpeTestResult sharpe_test(std::span<const double> a, std::span<const double> b, int resamples = 5000,
                                    int block_size = 5, std::uint64_t seed = 1) {
    if (a.size() != b.size()) throw InputError("sharpe_test: series lengths differ");
    if (resamples < 1) throw ParameterError("sharpe_test: resamples must be >= 1");
    if (block_size < 1) throw ParameterError("sharpe_test: block_size must be >= 1");
    const std::size_t l = static_cast<std::size_t>(block_size);
    if (a.size() < 10 * l) throw InsufficientData("sharpe_test: need at least 10 blocks of data");
    SharpeTestResult res;
    res.resamples = resamples;
    res.block_size = block_size;
    const auto orig = detail::sharpe_diff(a, b, l);
    res.sharpe_a = orig.sa;
    res.sharpe_b = orig.sb;
    res.difference = orig.d;
    if (std::equal(a.begin(), a.end(), b.begin()) || orig.d == 0.0) {
        res.two_sided_p = 1.0;
        return res;
    }
    if (!(orig.se > 0.0)) throw DegenerateSample("sharpe_test: zero standard error");
    const double stat = std::abs(orig.d) / orig.se;

    const std::size_t t = a.size();
    const std::size_t blocks = (t + l - 1) / l;
    std::vector<double> ra(t), rb(t);
    int exceed = 0;
    for (int m = 0; m < resamples; ++m) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(m)));
        std::size_t pos = 0;
        for (std::size_t k = 0; k < blocks && pos < t; ++k) {
            const std::size_t start = rng.index(t);
            for (std::size_t i = 0; i < l && pos < t; ++i, ++pos) {
                ra[pos] = a[(start + i) % t];
                rb[pos] = b[(start + i) % t];
            }
        }
        const auto bs = detail::sharpe_diff(ra, rb, l);
        if (!(bs.se > 0.0)) continue;
        if (std::abs(bs.d - orig.d) / bs.se >= stat) ++exceed;
    }
    res.two_sided_p = (exceed + 1.0) / (resamples + 1.0);
    return res;
}

} // namespace renyi
