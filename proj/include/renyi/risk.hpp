// risk.hpp
// Covariance estimators (sample, constant-correlation shrinkage) and tail
// risk measures (historical, Cornish-Fisher VaR, modified expected shortfall).
//
// Sign convention: VaR and CVaR are reported as losses, so a 5% VaR of 0.02
// means the 5% quantile of returns is -2%.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dists.hpp"
#include "error.hpp"

namespace renyi {

enum class CovarianceKind { Sample, Shrinkage };

struct CovarianceEstimate {
    Eigen::MatrixXd matrix;
    CovarianceKind kind = CovarianceKind::Sample;
    double delta = 0.0;
    // Automatic intensity was undefined (sample already equals the target).
    bool degenerate_fallback = false;
};

// Unbiased sample covariance of the columns of R (T x n), divisor T - 1.
inline CovarianceEstimate sample_covariance(const Eigen::MatrixXd& R) {
    if (R.rows() < 2) throw InsufficientData("sample_covariance: need at least 2 observations");
    const Eigen::MatrixXd centered = R.rowwise() - R.colwise().mean();
    Eigen::MatrixXd s = centered.transpose() * centered / static_cast<double>(R.rows() - 1);
    s = 0.5 * (s + s.transpose()).eval();
    return {s, CovarianceKind::Sample, 0.0, false};
}

// Constant-correlation target: sample variances on the diagonal, the average
// pairwise sample correlation everywhere else.
inline Eigen::MatrixXd constant_correlation_target(const Eigen::MatrixXd& sample) {
    const Eigen::Index n = sample.rows();
    const Eigen::VectorXd sd = sample.diagonal().cwiseMax(0.0).cwiseSqrt();
    double rsum = 0.0;
    Eigen::Index pairs = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double den = sd(i) * sd(j);
            rsum += den > 0.0 ? sample(i, j) / den : 0.0;
            ++pairs;
        }
    const double rbar = pairs > 0 ? rsum / static_cast<double>(pairs) : 0.0;
    // Filled by mirroring so the target is exactly symmetric.
    Eigen::MatrixXd f(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        f(i, i) = sample(i, i);
        for (Eigen::Index j = i + 1; j < n; ++j) f(i, j) = f(j, i) = rbar * sd(i) * sd(j);
    }
    return f;
}

// Ledoit-Wolf (2004) constant-correlation shrinkage intensity, clipped to
// [0, 1]. Empty when the sample already coincides with the target.
inline std::optional<double> ledoit_wolf_intensity(const Eigen::MatrixXd& R) {
    const Eigen::Index t = R.rows();
    const Eigen::Index n = R.cols();
    const double td = static_cast<double>(t);
    const Eigen::MatrixXd x = R.rowwise() - R.colwise().mean();
    const Eigen::MatrixXd sample = x.transpose() * x / td;
    const Eigen::VectorXd var = sample.diagonal();
    const Eigen::VectorXd sd = var.cwiseSqrt();
    if ((sd.array() <= 0.0).any()) return std::nullopt;

    double rsum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) rsum += sample(i, j) / (sd(i) * sd(j));
    const double rbar = rsum / static_cast<double>(n * (n - 1));
    Eigen::MatrixXd prior = rbar * sd * sd.transpose();
    prior.diagonal() = var;

    const Eigen::MatrixXd y = x.array().square();
    const Eigen::MatrixXd phi_mat =
        (y.transpose() * y / td).array() - 2.0 * ((x.transpose() * x).array() * sample.array()) / td +
        sample.array().square();
    const double phi = phi_mat.sum();

    const Eigen::MatrixXd x3 = x.array().cube();
    const Eigen::MatrixXd term1 = x3.transpose() * x / td;
    const Eigen::MatrixXd help = x.transpose() * x / td;
    const Eigen::VectorXd help_diag = help.diagonal();
    Eigen::MatrixXd theta(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            theta(i, j) = term1(i, j) - help_diag(i) * sample(i, j) - help(i, j) * var(i) + var(i) * sample(i, j);
    theta.diagonal().setZero();
    double rho = phi_mat.diagonal().sum();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) rho += rbar * (sd(j) / sd(i)) * theta(i, j);

    const double gamma = (sample - prior).squaredNorm();
    if (!(gamma > 1e-300)) return std::nullopt;
    const double kappa = (phi - rho) / gamma;
    return std::clamp(kappa / td, 0.0, 1.0);
}

// delta * F + (1 - delta) * S with S the sample covariance and F its
// constant-correlation target. An empty delta requests the automatic intensity.
inline CovarianceEstimate shrinkage_covariance(const Eigen::MatrixXd& R, std::optional<double> delta) {
    if (R.cols() < 2 || R.rows() <= R.cols())
        throw InsufficientData("shrinkage_covariance: need T > n >= 2");
    const Eigen::MatrixXd s = sample_covariance(R).matrix;
    const Eigen::MatrixXd f = constant_correlation_target(s);
    bool fallback = false;
    double d;
    if (delta) {
        if (!(*delta >= 0.0 && *delta <= 1.0)) throw ParameterError("shrinkage_covariance: delta must lie in [0, 1]");
        d = *delta;
    } else if (auto lw = ledoit_wolf_intensity(R)) {
        d = *lw;
    } else {
        d = 0.0;
        fallback = true;
    }
    Eigen::MatrixXd out = d * f + (1.0 - d) * s;
    return {out, CovarianceKind::Shrinkage, d, fallback};
}

struct Moments {
    double mean = 0.0;
    double stdev = 0.0;     // divisor N - 1
    double skewness = 0.0;  // plain standardized third moment
    double exkurt = 0.0;    // plain standardized fourth moment minus 3
};

inline Moments sample_moments(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw InsufficientData("sample_moments: need at least 2 observations");
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    Moments out;
    out.mean = mean;
    out.stdev = std::sqrt(m2 / (nd - 1.0));
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;
    if (m2 > 0.0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.exkurt = m4 / (m2 * m2) - 3.0;
    }
    return out;
}

// Empirical quantile with the sorted i-th value (1-based) placed at (i - 0.5)/N
// and linear interpolation in between; clamped to the extremes outside.
inline double empirical_quantile_sorted(std::span<const double> sorted, double p) {
    const std::size_t n = sorted.size();
    const double h = static_cast<double>(n) * p + 0.5;  // 1-based fractional rank
    if (h <= 1.0) return sorted.front();
    if (h >= static_cast<double>(n)) return sorted.back();
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

struct TailRisk {
    double var = 0.0;
    double cvar = 0.0;
};

inline TailRisk historical_var_cvar(std::span<const double> x, double r) {
    if (!(r > 0.0 && r <= 0.5)) throw ParameterError("historical_var_cvar: r must lie in (0, 0.5]");
    if (static_cast<double>(x.size()) < std::ceil(1.0 / r - 1e-12))
        throw InsufficientData("historical_var_cvar: need at least ceil(1/r) observations");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double q = empirical_quantile_sorted(s, r);
    double sum = 0.0;
    std::size_t cnt = 0;
    for (double v : s) {
        if (v > q) break;
        sum += v;
        ++cnt;
    }
    return {-q, -sum / static_cast<double>(cnt)};
}

// Second-order Cornish-Fisher quantile of the standardized distribution.
inline double cornish_fisher_quantile(double skew, double exkurt, double r) {
    const double z = detail::std_normal_quantile(r);
    return z + (z * z - 1.0) * skew / 6.0 + (z * z * z - 3.0 * z) * exkurt / 24.0 -
           (2.0 * z * z * z - 5.0 * z) * skew * skew / 36.0;
}

inline double cornish_fisher_var(double mu, double sigma, double skew, double exkurt, double r) {
    if (!(sigma > 0.0)) throw ParameterError("cornish_fisher_var: sigma must be > 0");
    if (!(r > 0.0 && r < 1.0)) throw ParameterError("cornish_fisher_var: r must lie in (0, 1)");
    return -(mu + sigma * cornish_fisher_quantile(skew, exkurt, r));
}

// Modified expected shortfall: the Edgeworth-expanded tail expectation below
// the Cornish-Fisher quantile g,
//
//   E = -phi(g)/r [1 + S g^3/6 + K (g^4 - 2g^2 - 1)/24 + S^2 (g^6 - 9g^4 + 9g^2 + 3)/72],
//
// and ES = -mu - sigma min(E, g), which keeps ES >= the modified VaR.
inline double modified_cvar(double mu, double sigma, double skew, double exkurt, double r) {
    if (!(sigma > 0.0)) throw ParameterError("modified_cvar: sigma must be > 0");
    if (!(r > 0.0 && r < 1.0)) throw ParameterError("modified_cvar: r must lie in (0, 1)");
    const double g = cornish_fisher_quantile(skew, exkurt, r);
    const double g2 = g * g;
    const double g4 = g2 * g2;
    const double bracket = 1.0 + skew * g2 * g / 6.0 + exkurt * (g4 - 2.0 * g2 - 1.0) / 24.0 +
                           skew * skew * (g4 * g2 - 9.0 * g4 + 9.0 * g2 + 3.0) / 72.0;
    const double tail = -detail::std_normal_pdf(g) / r * bracket;
    return -mu - sigma * std::min(tail, g);
}

enum class TailMethod { Historical, CornishFisher, ModifiedES };

struct TailSpec {
    double r = 0.05;
    TailMethod method = TailMethod::CornishFisher;
};

// Tail risk of a single return series. Historical returns the empirical VaR
// (or CVaR when `shortfall`); the parametric methods plug in sample moments.
inline double tail_risk(std::span<const double> x, const TailSpec& spec, bool shortfall) {
    if (spec.method == TailMethod::Historical) {
        const auto t = historical_var_cvar(x, spec.r);
        return shortfall ? t.cvar : t.var;
    }
    const auto mom = sample_moments(x);
    if (!(mom.stdev > 0.0)) throw DegenerateSample("tail_risk: zero-variance series");
    if (spec.method == TailMethod::ModifiedES || shortfall)
        return modified_cvar(mom.mean, mom.stdev, mom.skewness, mom.exkurt, spec.r);
    return cornish_fisher_var(mom.mean, mom.stdev, mom.skewness, mom.exkurt, spec.r);
}

} // namespace renyi
