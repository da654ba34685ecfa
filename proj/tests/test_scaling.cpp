#include <doctest.h>

#include <cmath>

#include "collapse/scaling.hpp"

using namespace collapse;

namespace {

ModelParams params_1d(double lambda, double p, double mu) {
    ModelParams params;
    params.lambda = lambda;
    params.p = p;
    params.mu = mu;
    return params;
}

std::vector<double> synthetic_normal(std::size_t n, std::uint64_t seed, double sd) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) {
        x = sd * stats::normal_quantile(rng.uniform_open01());
    }
    return out;
}

}  // namespace

TEST_CASE("marginal values vanish when n*t = 0") {
    const auto ms = marginal_samples(params_1d(1, 0.5, 1), 10, 0.0, 200, 1, 2);
    for (double v : ms.values[0]) {
        CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(marginal_samples(params_1d(1, 0.5, 1), 10, 1.0, 50, 1), ConfigError);
}

TEST_CASE("clt test accepts the null and rejects a wrong variance") {
    const auto null_sample = synthetic_normal(10000, 2024, 1.0);
    const auto ok = clt_test(null_sample, 1.0, 1.0, 0.01);
    CHECK(ok.pass);

    const auto scaled = synthetic_normal(10000, 2025, 2.0);
    const auto bad = clt_test(scaled, 1.0, 1.0, 0.01);
    CHECK(!bad.pass);

    CHECK_THROWS_AS(clt_test(null_sample, 0.0, 1.0, 0.01), ConfigError);
    CHECK_THROWS_AS(clt_test(std::vector<double>(100, 1.0), 1.0, 1.0, 0.01),
                    std::invalid_argument);
}

TEST_CASE("free walk marginal has variance lambda*t and passes the CLT test") {
    // Var X(s) = lambda s for the plain rate-lambda walk, so the rescaled
    // variance at (n, t=1) is 1
    const auto ms = marginal_samples(params_1d(1, 0, 1), 10000, 1.0, 10000, 314, 2);
    const auto mv = stats::mean_var(ms.values[0]);
    CHECK(std::abs(mv.var - 1.0) < 0.05);
    const auto rep = clt_test(ms.values[0], 1.0, 1.0, 0.01);
    CHECK(rep.pass);
}

TEST_CASE("free walk variance grows linearly with slope lambda") {
    const std::vector<double> grid{100, 200, 400, 700, 1000};
    const auto curve = variance_linearity(params_1d(1, 0, 1), grid, 4000, 99, 2);
    CHECK(std::abs(curve.fit.slope - 1.0) < 0.05);
    // intercept consistent with 0
    CHECK(std::abs(curve.fit.intercept) <= 4.0 * curve.fit.se_intercept);
}

TEST_CASE("variance grid validation") {
    const auto params = params_1d(1, 0.5, 1);
    CHECK_THROWS_AS(variance_linearity(params, {1, 2, 3, 4}, 100, 1), ConfigError);
    CHECK_THROWS_AS(variance_linearity(params, {1, 2, 3, 4, 5}, 100, 1), ConfigError);
    CHECK_THROWS_AS(variance_linearity(params, {0, 1, 2, 3, 10}, 100, 1), ConfigError);
}

TEST_CASE("recurrence fractions are monotone and start at zero") {
    const auto rs = recurrence_stats(params_1d(1, 0.5, 1), {0.0, 50.0, 100.0, 200.0}, 2000,
                                     777, 2);
    CHECK(rs.fraction_returned[0] == 0.0);
    for (std::size_t i = 1; i < rs.fraction_returned.size(); ++i) {
        CHECK(rs.fraction_returned[i] >= rs.fraction_returned[i - 1]);
        CHECK(rs.mean_returns[i] >= rs.mean_returns[i - 1]);
    }
    CHECK(rs.fraction_returned.back() > 0.5);
}

TEST_CASE("disjoint increments decorrelate") {
    const double corr = increment_correlation(params_1d(1, 1, 5), 2000.0, 2000, 555, 2);
    CHECK(std::abs(corr) < 4.0 / std::sqrt(2000.0));
}

TEST_CASE("baseline compare: p=0 is the unit ratio by construction") {
    DiffusionEstimate est;  // ignored for p = 0
    est.confidence = 0.99;
    const auto rep = baseline_compare(est, params_1d(1, 0, 1));
    CHECK(rep.ratio == doctest::Approx(1.0));
    CHECK(rep.lo == doctest::Approx(1.0));
    CHECK(!rep.faster);
}

TEST_CASE("baseline compare flags an enhanced-diffusion estimate") {
    DiffusionEstimate est;
    est.coeff = 1.2;
    est.coeff_lo = 1.15;
    est.coeff_hi = 1.25;
    est.confidence = 0.99;
    const auto rep = baseline_compare(est, params_1d(1, 1, 20));
    CHECK(rep.faster);
    CHECK(rep.ratio == doctest::Approx(1.2));
}

TEST_CASE("marginal variance at mu=20 matches the regeneration coefficient") {
    // two estimation routes for the same diffusion coefficient: cycles vs
    // direct marginal variance at n*t = 1e4
    const auto params = params_1d(1, 1, 20);
    const auto cycles = collect(params, 200000, 181, CollectOptions{.workers = 2});
    const auto est = estimate(cycles.samples, 0.99);

    const std::size_t replicas = 4000;
    const auto ms = marginal_samples(params, 10000, 1.0, replicas, 182, 2);
    const auto mv = stats::mean_var(ms.values[0]);
    // SE of a sample variance ~= var * sqrt(2/replicas); the coefficient's
    // own uncertainty is negligible at 2e5 cycles
    const double se_var = mv.var * std::sqrt(2.0 / double(replicas));
    CHECK(std::abs(mv.var - est.coeff) < 3.0 * se_var);

    const std::vector<double> grid{100, 200, 400, 700, 1000};
    const auto curve = variance_linearity(params, grid, 20000, 183, 2);
    CHECK(std::abs(curve.fit.slope - est.coeff) / est.coeff < 0.05);
}

TEST_CASE("mu=10 enhancement has the magnitude of the zeta gap") {
    // point estimate of coeff - 1 should be of the order gap/alpha ~= 1/6
    const auto result = collect(params_1d(1, 1, 10), 200000, 606, CollectOptions{});
    const auto est = estimate(result.samples, 0.99);
    const auto rep = baseline_compare(est, params_1d(1, 1, 10));
    CHECK(rep.ratio - 1.0 > 0.5 / 6.0);
    CHECK(rep.ratio - 1.0 < 2.0 / 6.0);
}
