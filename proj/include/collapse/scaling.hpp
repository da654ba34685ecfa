#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "collapse/process.hpp"
#include "collapse/regen.hpp"
#include "collapse/stats.hpp"

namespace collapse {

// Values of X(n t)/sqrt(n) across independent replicas, per coordinate.
struct MarginalSample {
    std::uint64_t n = 0;
    double t = 0.0;
    std::vector<std::vector<double>> values;  // [coord][replica]
};

MarginalSample marginal_samples(const ModelParams& params, std::uint64_t n, double t,
                                std::size_t replicas, std::uint64_t seed, int workers = 1);

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double critical = 0.0;
    double p_value = 1.0;
    bool pass = false;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

// One-sample KS test of values/sqrt(coeff * t) against the standard normal;
// coeff is the diffusion coefficient beta^2/alpha (lambda for the free walk).
TestReport clt_test(const std::vector<double>& values, double coeff, double t, double alpha);

struct VarianceCurve {
    std::vector<double> times;
    std::vector<double> variance;       // per-coordinate average, sample variance
    std::vector<double> mean;           // mean displacement per time (coord 0)
    stats::LinFit fit;                  // variance ~ intercept + slope * t
    std::size_t replicas = 0;
};

// Sample variance of X(t) on a shared time grid (>= 5 points spanning at
// least one decade), with the least-squares line through it. The slope
// estimates beta^2/alpha.
VarianceCurve variance_linearity(const ModelParams& params, const std::vector<double>& grid,
                                 std::size_t replicas, std::uint64_t seed, int workers = 1);

struct RecurrenceStats {
    std::vector<double> horizons;
    std::vector<double> fraction_returned;  // P(first return <= horizon)
    std::vector<double> mean_returns;       // mean #returns to the origin
    std::size_t replicas = 0;
};

// Returns to the origin detected at event granularity (exact for a jump
// process): position equal to the origin after an event.
RecurrenceStats recurrence_stats(const ModelParams& params, std::vector<double> horizons,
                                 std::size_t replicas, std::uint64_t seed, int workers = 1);

struct CompareReport {
    double ratio = 1.0;  // (beta^2/alpha) / lambda
    double lo = 1.0;
    double hi = 1.0;
    double confidence = 0.99;
    bool faster = false;  // CI strictly above 1
};

// Enhanced-diffusion verdict against the free walk (diffusion coefficient
// lambda). For p = 0 the ratio is 1 by construction.
CompareReport baseline_compare(const DiffusionEstimate& est, const ModelParams& params);

// Correlation of the increments over [0, T/2] and [T/2, T] (coordinate 0);
// near zero when cycles decorrelate the path.
double increment_correlation(const ModelParams& params, double horizon, std::size_t replicas,
                             std::uint64_t seed, int workers = 1);

}  // namespace collapse
