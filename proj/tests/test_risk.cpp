#include <cmath>
#include <random>

#include <catch_amalgamated.hpp>

#include <renyi/dists.hpp>
#include <renyi/risk.hpp>

using namespace renyi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd random_panel(std::mt19937_64& g, int t, int n) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd r(t, n);
    for (int i = 0; i < t; ++i) {
        const double common = z(g);
        for (int j = 0; j < n; ++j) r(i, j) = 0.01 * (0.5 * common + z(g) * (1 + 0.3 * j));
    }
    return r;
}

double min_eig(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

} // namespace

TEST_CASE("sample covariance: structure") {
    Eigen::MatrixXd r(4, 3);
    r << 1, 1, 5, 2, 2, 5, 4, 4, 5, 7, 7, 5;
    const auto s = sample_covariance(r).matrix;
    CHECK(s(0, 0) == s(1, 1));
    CHECK(s(0, 1) == s(0, 0));
    CHECK(s.col(2).isZero());
    CHECK(s.row(2).isZero());
    CHECK_THAT(s(0, 0), WithinRel(7.0, 1e-14));  // var{1,2,4,7}, divisor 3
    CHECK_THROWS_AS(sample_covariance(Eigen::MatrixXd::Ones(1, 3)), InsufficientData);
}

TEST_CASE("sample covariance: Monte Carlo against the generating matrix") {
    Eigen::Matrix3d sigma;
    sigma << 0.04, 0.006, -0.002, 0.006, 0.01, 0.001, -0.002, 0.001, 0.0225;
    const Eigen::MatrixXd l = sigma.llt().matrixL();
    Rng rng(3);
    Eigen::MatrixXd r(100000, 3);
    for (int i = 0; i < r.rows(); ++i) {
        Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
        r.row(i) = (l * z).transpose();
    }
    const auto s = sample_covariance(r).matrix;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(s(i, j) - sigma(i, j)) <= 0.01 * std::sqrt(sigma(i, i) * sigma(j, j)));
}

TEST_CASE("shrinkage: endpoints and affinity in delta") {
    std::mt19937_64 g(1);
    const auto r = random_panel(g, 80, 5);
    const auto s = sample_covariance(r).matrix;
    const auto s0 = shrinkage_covariance(r, 0.0).matrix;
    const auto s1 = shrinkage_covariance(r, 1.0).matrix;
    CHECK(s0 == s);
    CHECK(s1 == constant_correlation_target(s));
    // All off-diagonal correlations of the target coincide.
    const double c01 = s1(0, 1) / std::sqrt(s1(0, 0) * s1(1, 1));
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) CHECK_THAT(s1(i, j) / std::sqrt(s1(i, i) * s1(j, j)), WithinAbs(c01, 1e-12));
    for (double d : {0.2, 0.4, 0.6, 0.8}) {
        const auto sd = shrinkage_covariance(r, d).matrix;
        CHECK(sd.isApprox(d * s1 + (1 - d) * s0, 1e-14));
        CHECK(shrinkage_covariance(r, d).delta == d);
    }
    CHECK_THROWS_AS(shrinkage_covariance(r, 1.5), ParameterError);
    CHECK_THROWS_AS(shrinkage_covariance(r.topRows(5), std::nullopt), InsufficientData);
}

TEST_CASE("shrinkage: automatic intensity matches reference") {
    // tests/oracle/oracle_values.py (fixed 12 x 3 panel)
    Eigen::MatrixXd p(12, 3);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 3; ++j)
            p(i, j) = std::sin(1.3 * i + j) * 0.02 + 0.001 * j + 0.01 * std::cos(2.1 * i * (j + 1));
    const auto lw = ledoit_wolf_intensity(p);
    REQUIRE(lw.has_value());
    CHECK_THAT(*lw, WithinAbs(0.3097520544067464, 1e-12));
    const auto est = shrinkage_covariance(p, std::nullopt);
    CHECK(est.delta == *lw);
    CHECK_FALSE(est.degenerate_fallback);
}

TEST_CASE("shrinkage: degenerate intensity falls back to the sample matrix") {
    // Two perfectly correlated columns: the sample matrix already equals the target.
    Eigen::MatrixXd r(10, 2);
    for (int i = 0; i < 10; ++i) {
        r(i, 0) = 0.01 * std::sin(i);
        r(i, 1) = 2.0 * r(i, 0);
    }
    const auto est = shrinkage_covariance(r, std::nullopt);
    CHECK(est.degenerate_fallback);
    CHECK(est.delta == 0.0);
    CHECK(est.matrix == sample_covariance(r).matrix);
}

TEST_CASE("shrinkage: beats the sample matrix under constant correlation") {
    const int n = 10, t = 60;
    Eigen::MatrixXd sigma(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sigma(i, j) = (i == j ? 1.0 : 0.5) * (0.01 + 0.002 * i) * (0.01 + 0.002 * j);
    const Eigen::MatrixXd l = sigma.llt().matrixL();
    double err_s = 0, err_lw = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng(Rng::derive(99, rep));
        Eigen::MatrixXd r(t, n);
        for (int i = 0; i < t; ++i) {
            Eigen::VectorXd z(n);
            for (int j = 0; j < n; ++j) z(j) = rng.normal();
            r.row(i) = (l * z).transpose();
        }
        err_s += (sample_covariance(r).matrix - sigma).norm();
        err_lw += (shrinkage_covariance(r, std::nullopt).matrix - sigma).norm();
    }
    CHECK(err_lw < err_s);
}

TEST_CASE("covariance outputs are symmetric PSD on random panels") {
    std::mt19937_64 g(11);
    for (int rep = 0; rep < 40; ++rep) {
        const int n = 2 + rep % 6;
        const auto r = random_panel(g, n + 1 + rep, n);
        for (const auto& m : {sample_covariance(r).matrix, shrinkage_covariance(r, std::nullopt).matrix}) {
            CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * m.cwiseAbs().maxCoeff());
            CHECK(min_eig(m) >= -1e-10 * m.trace());
        }
        const double d = shrinkage_covariance(r, std::nullopt).delta;
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
}

TEST_CASE("historical VaR and CVaR: golden") {
    std::vector<double> x{-10, -1};
    for (int i = 0; i <= 17; ++i) x.push_back(i);
    const auto t = historical_var_cvar(x, 0.05);
    // Sorted values sit at (i - 0.5)/20; the 5% quantile lies halfway between -10 and -1.
    CHECK_THAT(t.var, WithinAbs(5.5, 1e-14));
    CHECK_THAT(t.cvar, WithinAbs(10.0, 1e-14));

    const std::vector<double> gains{0.01, 0.02, 0.03, 0.05, 0.04, 0.06, 0.01, 0.02, 0.03, 0.02,
                                    0.01, 0.02, 0.03, 0.05, 0.04, 0.06, 0.01, 0.02, 0.03, 0.02};
    CHECK(historical_var_cvar(gains, 0.05).var < 0.0);
    CHECK_THROWS_AS(historical_var_cvar(std::vector<double>(19, 0.0), 0.05), InsufficientData);
    CHECK_THROWS_AS(historical_var_cvar(gains, 0.6), ParameterError);
}

TEST_CASE("historical CVaR dominates VaR on random samples") {
    std::mt19937_64 g(2);
    std::student_t_distribution<double> t(3);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(20 + rep);
        for (auto& v : x) v = 0.01 * t(g);
        for (double r : {0.01, 0.05, 0.1, 0.5})
            if (x.size() >= std::ceil(1 / r)) {
                const auto tr = historical_var_cvar(x, r);
                CHECK(tr.cvar >= tr.var);
            }
    }
}

TEST_CASE("Cornish-Fisher VaR") {
    const double z05 = detail::std_normal_quantile(0.05);
    CHECK_THAT(z05, WithinAbs(-1.6448536269514722, 1e-12));
    CHECK_THAT(cornish_fisher_var(0.01, 0.02, 0, 0, 0.05), WithinAbs(-(0.01 + 0.02 * z05), 1e-15));
    // tests/oracle/oracle_values.py
    CHECK_THAT(cornish_fisher_var(0, 1, -0.5, 3, 0.05), WithinAbs(1.7217443293266212, 1e-12));

    // Sign of dVaR/dK at S < 0: (z^3 - 3z) > 0 at z = -1.645, so VaR falls with K
    // at r = 5%; at r = 1% (z = -2.33) the sign reverses and VaR rises.
    const double h = 1e-6;
    const double d05 = (cornish_fisher_var(0, 1, -0.5, 3 + h, 0.05) - cornish_fisher_var(0, 1, -0.5, 3, 0.05)) / h;
    const double z = z05;
    CHECK_THAT(d05, WithinAbs(-(z * z * z - 3 * z) / 24, 1e-6));
    CHECK(d05 < 0.0);
    const double d01 = (cornish_fisher_var(0, 1, -0.5, 3 + h, 0.01) - cornish_fisher_var(0, 1, -0.5, 3, 0.01)) / h;
    CHECK(d01 > 0.0);
    CHECK_THROWS_AS(cornish_fisher_var(0, 0, 0, 0, 0.05), ParameterError);
}

TEST_CASE("modified ES") {
    CHECK_THAT(modified_cvar(0, 1, 0, 0, 0.05), WithinAbs(2.0627128075074253, 1e-12));
    CHECK_THAT(modified_cvar(0, 1, 0, 0, 0.05), WithinAbs(2.0627, 1e-4));
    // tests/oracle/oracle_values.py: numerical integral of the Edgeworth density
    CHECK_THAT(modified_cvar(0, 1, -0.5, 3, 0.05), WithinAbs(2.857222614935263, 1e-9));
    CHECK_THAT(modified_cvar(0, 1, -0.3, 1, 0.05), WithinAbs(2.394517512804531, 1e-9));
    CHECK_THAT(modified_cvar(0, 1, 0.2, 0.5, 0.05), WithinAbs(1.990693403217324, 1e-9));

    // ES >= VaR on a grid of mild shapes; monotone in sigma.
    for (double s = -1.0; s <= 1.0; s += 0.25)
        for (double k = 0.0; k <= 4.0; k += 0.5)
            for (double r : {0.01, 0.05, 0.1}) {
                INFO("S=" << s << " K=" << k << " r=" << r);
                CHECK(modified_cvar(0.001, 0.02, s, k, r) >= cornish_fisher_var(0.001, 0.02, s, k, r));
                CHECK(modified_cvar(0.001, 0.03, s, k, r) > modified_cvar(0.001, 0.02, s, k, r));
            }
}

TEST_CASE("parametric measures: translation and homogeneity") {
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int rep = 0; rep < 200; ++rep) {
        const double mu = 0.01 * u(g), sigma = 0.01 + 0.05 * (u(g) + 1), s = u(g), k = 2 + 2 * u(g), c = u(g);
        const double lam = 0.1 + 5 * (u(g) + 1);
        for (auto f : {cornish_fisher_var, modified_cvar}) {
            CHECK_THAT(f(mu + c, sigma, s, k, 0.05), WithinAbs(f(mu, sigma, s, k, 0.05) - c, 1e-12));
            CHECK_THAT(f(0, lam * sigma, s, k, 0.05), WithinRel(lam * f(0, sigma, s, k, 0.05), 1e-12));
        }
    }
}

TEST_CASE("sample moments") {
    const std::vector<double> x{1, 2, 3, 4, 10};
    const auto m = sample_moments(x);
    CHECK_THAT(m.mean, WithinAbs(4.0, 1e-15));
    CHECK_THAT(m.stdev, WithinRel(std::sqrt(50.0 / 4.0), 1e-14));
    // m2 = 10, m3 = 1/5 * (-27 - 8 - 1 + 0 + 216) = 36, m4 = 1/5 * (81 + 16 + 1 + 0 + 1296) = 278.8
    CHECK_THAT(m.skewness, WithinRel(36.0 / std::pow(10.0, 1.5), 1e-13));
    CHECK_THAT(m.exkurt, WithinRel(278.8 / 100.0 - 3.0, 1e-13));
}
