#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <catch_amalgamated.hpp>

#include <renyi/dists.hpp>

using namespace renyi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("density: textbook values") {
    CHECK_THAT(density(Gaussian{0, 1}, 0.0), WithinAbs(1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15));
    CHECK_THAT(density(Uniform{0, 2}, 1.0), WithinAbs(0.5, 1e-15));
    CHECK(density(Uniform{0, 2}, 2.5) == 0.0);
    CHECK(density(Exponential{2.0}, -1.0) == 0.0);
    CHECK_THAT(density(Exponential{2.0}, 0.5), WithinRel(2.0 * std::exp(-1.0), 1e-14));
}

TEST_CASE("density: scipy reference values") {
    // tests/oracle/oracle_values.py
    CHECK_THAT(density(StudentT{0, 0.3, 10}, 0.0), WithinRel(1.2970279465534371, 1e-12));
    CHECK_THAT(density(SkewNormal{0.03, 0.2, -2}, 0.0), WithinRel(2.4375328438544006, 1e-12));
    CHECK_THAT(density(Levy{0, 1}, 1.0), WithinRel(0.24197072451914337, 1e-12));
    CHECK_THAT(density(Beta{2, 2}, 0.3), WithinRel(1.26, 1e-12));
    CHECK_THAT(cdf(SkewNormal{0.03, 0.2, -2}, 0.0), WithinRel(0.7857296910637535, 1e-10));
    CHECK_THAT(cdf(StudentT{0, 0.3, 10}, -0.5), WithinRel(0.06327366445910626, 1e-10));
    CHECK_THAT(quantile(StudentT{0, 0.3, 10}, 0.0005), WithinRel(-1.376068157610918, 1e-9));
}

TEST_CASE("density_function agrees with density") {
    const std::vector<Marginal> laws{Gaussian{0.1, 0.3}, StudentT{0.03, 0.2, 4}, SkewNormal{0.1, 0.4, -5},
                                     Levy{0, 0.5},       Uniform{-1, 2},          Exponential{3}, Beta{2, 5}};
    for (const auto& m : laws) {
        const auto f = density_function(m);
        for (double x = -2.0; x <= 3.0; x += 0.173) CHECK_THAT(f(x), WithinAbs(density(m, x), 1e-12 * (1 + density(m, x))));
    }
}

TEST_CASE("validation rejects out-of-domain parameters") {
    CHECK_THROWS_AS(validate(Gaussian{0, 0}), InvalidMarginal);
    CHECK_THROWS_AS(validate(StudentT{0, 1, -1}), InvalidMarginal);
    CHECK_THROWS_AS(validate(Uniform{1, 1}), InvalidMarginal);
    CHECK_THROWS_AS(validate(Exponential{0}), InvalidMarginal);
    CHECK_THROWS_AS(density(Gaussian{0, -1}, 0.0), InvalidMarginal);
}

TEST_CASE("quantile inverts cdf") {
    const std::vector<Marginal> laws{Gaussian{0.1, 0.3}, StudentT{0.03, 0.2, 4}, SkewNormal{0.1, 0.4, -5},
                                     Levy{0, 0.5},       Uniform{-1, 2},          Exponential{3}, Beta{2, 5}};
    for (const auto& m : laws)
        for (double p : {1e-9, 1e-4, 0.05, 0.3, 0.5, 0.8, 0.999}) {
            INFO(family_name(m) << " p=" << p);
            CHECK_THAT(cdf(m, quantile(m, p)), WithinAbs(p, 1e-9 * std::max(1.0, p * 1e3)));
        }
}

TEST_CASE("sample: determinism, support, moments") {
    const auto a = sample(Gaussian{0, 1}, 1000, 42);
    const auto b = sample(Gaussian{0, 1}, 1000, 42);
    CHECK(a == b);
    CHECK(sample(Gaussian{0, 1}, 1000, 43) != a);

    const auto g = sample(Gaussian{0, 1}, 1000000, 7);
    const double gm = std::accumulate(g.begin(), g.end(), 0.0) / g.size();
    CHECK(std::abs(gm) < 0.005);

    const auto u = sample(Uniform{0, 1}, 100000, 3);
    CHECK(std::all_of(u.begin(), u.end(), [](double v) { return v >= 0.0 && v <= 1.0; }));

    // Variance of t(0, 0.2, 6): 0.04 * 6 / 4.
    const auto t = sample(StudentT{0, 0.2, 6}, 400000, 11);
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / t.size();
    double v = 0.0;
    for (double x : t) v += (x - tm) * (x - tm);
    v /= t.size() - 1;
    CHECK_THAT(v, WithinRel(0.06, 0.03));

    // Skew-normal mean mu + sigma * delta * sqrt(2/pi), delta = xi / sqrt(1 + xi^2).
    const auto s = sample(SkewNormal{0.1, 0.4, -5}, 400000, 5);
    const double sm = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    CHECK_THAT(sm, WithinAbs(*mean(SkewNormal{0.1, 0.4, -5}), 0.002));
    CHECK_THAT(*mean(SkewNormal{0.1, 0.4, -5}), WithinAbs(0.1 - 0.4 * 5 / std::sqrt(26.0) * std::sqrt(2 / std::numbers::pi), 1e-14));
}

TEST_CASE("closed-form entropies") {
    const double s2pi = std::sqrt(2.0 * std::numbers::pi);
    CHECK_THAT(*closed_form_entropy(Gaussian{0, 0.2}, 0.5), WithinRel(0.2 * s2pi * 2.0, 1e-14));
    CHECK_THAT(*closed_form_entropy(Gaussian{0, 0.2}, 0.5), WithinAbs(1.00265, 1e-5));
    CHECK_THAT(*closed_form_entropy(Gaussian{3, 1.5}, 1.0), WithinRel(1.5 * s2pi * std::sqrt(std::numbers::e), 1e-14));
    CHECK_THAT(*closed_form_entropy(Uniform{-1, 2}, 0.3), WithinRel(3.0, 1e-14));
    CHECK_THAT(*closed_form_entropy(Uniform{-1, 2}, 1.0), WithinRel(3.0, 1e-14));
    CHECK_THAT(*closed_form_entropy(Exponential{4}, 2.0), WithinRel(2.0 / 4.0, 1e-14));
    CHECK_THAT(*closed_form_entropy(Exponential{4}, 1.0), WithinRel(std::numbers::e / 4.0, 1e-14));
    CHECK(closed_form_entropy(Levy{0, 1}, 0.5) == std::nullopt);
    CHECK(closed_form_entropy(StudentT{0, 1, 5}, 0.5) == std::nullopt);
    CHECK(closed_form_entropy(Levy{0, 2}, 1.0).has_value());

    // Continuity at alpha = 1 and strict decrease in alpha.
    const double near = *closed_form_entropy(Gaussian{0, 1}, 1.0 + 1e-6);
    CHECK_THAT(near, WithinRel(*closed_form_entropy(Gaussian{0, 1}, 1.0), 1e-6));
    double prev = *closed_form_entropy(Gaussian{0, 1}, 0.05);
    for (double a = 0.1; a <= 5.0; a += 0.05) {
        const double h = *closed_form_entropy(Gaussian{0, 1}, a);
        CHECK(h < prev);
        prev = h;
    }
}

TEST_CASE("kurtosis of an independent sum") {
    CHECK_THAT(kurtosis_of_independent_sum(1, 3, 1, 3), WithinAbs(3.0, 1e-15));
    CHECK_THAT(kurtosis_of_independent_sum(1, 9, 1e-12, 3), WithinAbs(9.0, 1e-9));
    CHECK_THROWS(kurtosis_of_independent_sum(0, 3, 1, 3));

    // Monte Carlo check of the t-sum kurtosis at w = 0.5.
    const StudentT x{0, 0.3, 10}, y{0, 0.2, 6};
    const double vx = 0.25 * 0.09 * 10 / 8, vy = 0.25 * 0.04 * 6 / 4;
    const double k = kurtosis_of_independent_sum(vx, 6.0 / 6 + 3, vy, 6.0 / 2 + 3);
    const auto sx = sample(x, 4000000, 21), sy = sample(y, 4000000, 22);
    double m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < sx.size(); ++i) {
        const double z = 0.5 * sx[i] + 0.5 * sy[i];
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m2 /= sx.size();
    m4 /= sx.size();
    CHECK_THAT(m4 / (m2 * m2), WithinRel(k, 0.05));
}

TEST_CASE("copula: comonotone, counter-monotone, independent") {
    const Marginal mx = StudentT{0.03, 0.2, 10}, my = SkewNormal{0.1, 0.4, -5};
    {
        const auto s = sample_copula(mx, my, {7.0, 1.0, 2000}, 1);
        std::vector<std::size_t> idx(s.x.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
        for (std::size_t i = 1; i < idx.size(); ++i) CHECK(s.y[idx[i]] >= s.y[idx[i - 1]]);
    }
    {
        const auto s = sample_copula(mx, my, {7.0, -1.0, 2000}, 1);
        std::vector<std::size_t> idx(s.x.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
        for (std::size_t i = 1; i < idx.size(); ++i) CHECK(s.y[idx[i]] <= s.y[idx[i - 1]]);
    }
    {
        // Spearman rank correlation near zero at rho = 0.
        const std::size_t n = 500000;
        const auto s = sample_copula(mx, my, {7.0, 0.0, n}, 9);
        auto ranks = [](const std::vector<double>& v) {
            std::vector<std::size_t> idx(v.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
            std::vector<double> r(v.size());
            for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
            return r;
        };
        const auto rx = ranks(s.x), ry = ranks(s.y);
        const double mr = (n - 1) / 2.0;
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sxy += (rx[i] - mr) * (ry[i] - mr);
            sxx += (rx[i] - mr) * (rx[i] - mr);
        }
        CHECK(std::abs(sxy / sxx) < 0.01);
    }
    CHECK_THROWS_AS(sample_copula(Levy{0, 1}, my, {}, 1), UnsupportedMarginal);
    CHECK_THROWS_AS(sample_copula(mx, my, {7.0, 1.5, 10}, 1), ParameterError);
}

TEST_CASE("copula marginals follow the targets") {
    const Marginal mx = Gaussian{0.0, 1.0}, my = Exponential{2.0};
    const auto s = sample_copula(mx, my, {7.0, 0.5, 200000}, 4);
    const double mxv = std::accumulate(s.x.begin(), s.x.end(), 0.0) / s.x.size();
    const double myv = std::accumulate(s.y.begin(), s.y.end(), 0.0) / s.y.size();
    CHECK(std::abs(mxv) < 0.01);
    CHECK_THAT(myv, WithinAbs(0.5, 0.01));
}
