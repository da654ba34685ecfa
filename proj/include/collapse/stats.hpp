#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace collapse::stats {

// Standard normal CDF. Rational Chebyshev approximation (Cody's erf/erfc
// scheme); absolute error well below 1e-12 over the whole real line.
double normal_cdf(double x);

// Inverse of normal_cdf (Wichura's AS 241, double precision).
// p must lie in (0, 1).
double normal_quantile(double p);

// Two-sided z multiplier for a confidence level in (0, 1),
// e.g. 0.99 -> 2.5758293.
double z_for_confidence(double confidence);

// Upper tail Q(x) = P(K > x) of the Kolmogorov distribution,
// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_tail(double x);

// c such that kolmogorov_tail(c) == alpha. The one-sample KS test at level
// alpha rejects when sqrt(n) * D exceeds this.
double kolmogorov_critical(double alpha);

struct KsResult {
    double statistic = 0.0;   // D
    double critical = 0.0;    // reject when statistic > critical
    double p_value = 1.0;     // asymptotic
    std::size_t n = 0;
    bool pass = false;
};

// One-sample KS test of `values` against the standard normal.
// Asymptotic critical value kolmogorov_critical(alpha) / sqrt(n).
KsResult ks_test_standard_normal(std::vector<double> values, double alpha);

// Two-sample KS distance sup |F_a - F_b| between empirical CDFs.
double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b);

// Two-sample KS test at level alpha, asymptotic critical value
// kolmogorov_critical(alpha) * sqrt((n+m)/(n*m)).
KsResult ks_two_sample_test(std::vector<double> a, std::vector<double> b, double alpha);

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;      // unbiased (n-1 denominator)
    double se_mean = 0.0;  // sqrt(var / n)
    std::size_t n = 0;
};

MeanVar mean_var(std::span<const double> xs);

// Sample autocorrelations at lags 1..max_lag. Returns NaN entries when the
// series is degenerate (zero variance).
std::vector<double> autocorrelations(std::span<const double> xs, int max_lag);

struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
    double se_slope = 0.0;
    double se_intercept = 0.0;
};

// Ordinary least squares y ~ intercept + slope * x; standard errors from the
// residual variance (requires n >= 3 for nonzero SEs).
LinFit least_squares(std::span<const double> x, std::span<const double> y);

// Sum with the addends ordered by increasing magnitude; limits the error of
// long accumulations of mixed-scale positive terms.
double sorted_sum(std::vector<double> xs);

}  // namespace collapse::stats
