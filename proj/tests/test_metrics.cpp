#include <cmath>
#include <random>

#include <catch_amalgamated.hpp>

#include <renyi/metrics.hpp>

using namespace renyi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd cov4() {
    Eigen::Matrix4d c;
    c << 4, 1, 0.5, 0.2, 1, 2, 0.3, 0.1, 0.5, 0.3, 1, -0.2, 0.2, 0.1, -0.2, 3;
    return c;
}

double brute_drawdown(const std::vector<double>& p) {
    std::vector<double> w{1.0};
    for (double x : p) w.push_back(w.back() * (1 + x));
    double dd = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j) dd = std::min(dd, w[j] / w[i] - 1);
    return dd;
}

} // namespace

TEST_CASE("entropy of weights") {
    CHECK_THAT(entropy_of_weights(Weights::equal(4)), WithinRel(4.0, 1e-14));
    CHECK(entropy_of_weights(Weights::vertex(4, 2)) == 1.0);
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 100; ++rep) {
        const auto w = Weights::normalized({u(g), u(g), u(g), u(g)});
        const double d = entropy_of_weights(w);
        CHECK(d >= 1.0);
        CHECK(d <= 4.0 + 1e-12);
    }
}

TEST_CASE("Euler contributions sum to one") {
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 200; ++rep) {
        const auto w = Weights::normalized({u(g), u(g), u(g), u(g)});
        const auto c = euler_contributions(w, cov4());
        double s = 0;
        for (double x : c) s += x;
        CHECK_THAT(s, WithinAbs(1.0, 1e-10));
        const double vc = volatility_concentration(w, cov4());
        CHECK(vc >= 0.25 - 1e-12);
        CHECK(vc <= 1.0 + 1e-12);
        const double dr = diversification_ratio(w, cov4());
        CHECK(dr > 0.0);
        CHECK(dr <= 1.0);
    }
}

TEST_CASE("vertex and perfectly correlated cases") {
    const auto v = Weights::vertex(4, 1);
    CHECK(entropy_of_weights(v) == 1.0);
    CHECK_THAT(volatility_concentration(v, cov4()), WithinAbs(1.0, 1e-15));
    CHECK_THAT(diversification_ratio(v, cov4()), WithinAbs(0.0, 1e-15));
    Eigen::Vector3d sd(0.1, 0.2, 0.3);
    const Eigen::MatrixXd full = sd * sd.transpose();
    CHECK_THAT(diversification_ratio(Weights::normalized({1, 2, 3}), full), WithinAbs(0.0, 1e-12));
}

TEST_CASE("turnover") {
    const std::vector<Weights> same(5, Weights::equal(3));
    CHECK(turnover(same) == 0.0);
    const std::vector<Weights> sw{Weights::vertex(2, 0), Weights::vertex(2, 1), Weights::vertex(2, 0)};
    CHECK(turnover(sw) == 2.0);
    // Relabeling assets leaves turnover unchanged.
    const std::vector<Weights> a{Weights::normalized({1, 2, 3}), Weights::normalized({3, 1, 1}), Weights::normalized({1, 1, 5})};
    const std::vector<Weights> b{Weights::normalized({3, 1, 2}), Weights::normalized({1, 3, 1}), Weights::normalized({5, 1, 1})};
    CHECK_THAT(turnover(a), WithinAbs(turnover(b), 1e-15));
    CHECK(turnover(std::vector<Weights>{Weights::equal(2)}) == 0.0);
}

TEST_CASE("max drawdown matches brute force") {
    std::mt19937_64 g(3);
    std::normal_distribution<double> z(0.001, 0.03);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> p(1 + rep * 4);
        for (auto& x : p) x = std::max(-0.5, z(g));
        const double dd = max_drawdown(p);
        CHECK(dd <= 0.0);
        CHECK_THAT(dd, WithinAbs(brute_drawdown(p), 1e-12));
    }
    CHECK(max_drawdown(std::vector<double>(20, 0.01)) == 0.0);
    // The initial wealth counts as a peak.
    CHECK_THAT(max_drawdown(std::vector<double>{-0.1, 0.05}), WithinAbs(-0.1, 1e-15));
}

TEST_CASE("performance report") {
    std::vector<double> p;
    for (int i = 0; i < 104; ++i) p.push_back(0.002 + 0.01 * std::sin(0.9 * i));
    const std::vector<Weights> w{Weights::equal(4), Weights::equal(4)};
    const std::vector<Eigen::MatrixXd> cov{cov4(), cov4()};
    const auto r = performance_report(p, w, cov);
    double lg = 0;
    for (double x : p) lg += std::log1p(x);
    CHECK_THAT(r.annual_geometric_return, WithinRel(std::exp(lg * 52 / 104) - 1, 1e-12));
    CHECK_THAT(r.annual_volatility, WithinRel(sample_moments(p).stdev * std::sqrt(52.0), 1e-14));
    CHECK_THAT(r.sharpe, WithinRel(r.annual_geometric_return / r.annual_volatility, 1e-15));
    CHECK_THAT(r.entropy_of_weights, WithinRel(4.0, 1e-14));
    CHECK(r.turnover == 0.0);
    CHECK(r.max_drawdown <= 0.0);
    CHECK(r.hist_cvar >= r.hist_var);
    CHECK_THROWS_AS(performance_report(std::vector<double>(7, 0.01), w, cov), InsufficientData);
    CHECK_THROWS_AS(performance_report(std::vector<double>(20, 0.25), w, cov), DegenerateSample);
}

TEST_CASE("Sharpe difference statistic matches reference") {
    std::vector<double> a, b;
    for (int i = 0; i < 60; ++i) {
        a.push_back(std::sin(0.7 * i) * 0.02 + 0.004);
        b.push_back(std::cos(0.3 * i) * 0.015 + 0.002);
    }
    // tests/oracle/oracle_values.py
    const auto d = detail::sharpe_diff(a, b, 5);
    CHECK_THAT(d.sa, WithinRel(0.34305257911043663, 1e-12));
    CHECK_THAT(d.sb, WithinRel(0.13538592051899753, 1e-12));
    CHECK_THAT(d.se, WithinRel(0.2929027485555587, 1e-10));
}

TEST_CASE("Sharpe test: identity, determinism, errors") {
    Rng rng(1);
    std::vector<double> a(300), b(300);
    for (int i = 0; i < 300; ++i) {
        a[i] = 0.001 + 0.02 * rng.normal();
        b[i] = 0.002 + 0.02 * rng.normal();
    }
    CHECK(sharpe_test(a, a, 200).two_sided_p == 1.0);
    const auto r1 = sharpe_test(a, b, 500, 5, 42), r2 = sharpe_test(a, b, 500, 5, 42);
    CHECK(r1.two_sided_p == r2.two_sided_p);
    CHECK(r1.two_sided_p > 0.0);
    CHECK(r1.two_sided_p <= 1.0);
    CHECK(r1.resamples == 500);
    CHECK_THROWS_AS(sharpe_test(a, std::vector<double>(299, 0.0)), InputError);
    CHECK_THROWS_AS(sharpe_test(std::vector<double>(49, 0.01), std::vector<double>(49, 0.01), 100, 5), InsufficientData);
}

TEST_CASE("Sharpe test: power") {
    // Per-period Sharpe 1.5/sqrt(52) vs 0.5/sqrt(52), T = 1100.
    Rng rng(7);
    const std::size_t t = 1100;
    std::vector<double> a(t), b(t);
    for (std::size_t i = 0; i < t; ++i) {
        const double c = rng.normal();
        a[i] = 0.02 * (1.5 / std::sqrt(52.0)) + 0.02 * (0.5 * c + std::sqrt(0.75) * rng.normal());
        b[i] = 0.02 * (0.5 / std::sqrt(52.0)) + 0.02 * (0.5 * c + std::sqrt(0.75) * rng.normal());
    }
    CHECK(sharpe_test(a, b, 2000, 5, 3).two_sided_p < 0.01);
}

TEST_CASE("Sharpe test: size under the null") {
    const int reps = 500;
    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(Rng::derive(2024, static_cast<std::uint64_t>(rep)));
        std::vector<double> a(200), b(200);
        for (int i = 0; i < 200; ++i) {
            a[i] = 0.002 + 0.02 * rng.normal();
            b[i] = 0.002 + 0.02 * rng.normal();
        }
        if (sharpe_test(a, b, 199, 5, static_cast<std::uint64_t>(rep)).two_sided_p < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    INFO("rejection rate " << rate);
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.09);
}
