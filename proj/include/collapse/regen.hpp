#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "collapse/process.hpp"

namespace collapse {

// One regeneration cycle: the walk started with no broken bonds, run until
// the broken set first returns to empty after at least one break.
struct RegenerationSample {
    double delta_tau = 0.0;            // cycle duration tau_{i+1} - tau_i
    std::vector<std::int64_t> delta_x; // cycle displacement
    std::uint64_t attempts = 0;        // jump attempts within the cycle
    std::int32_t max_broken = 0;       // peak broken-bond count (>= 1)

    std::int64_t l1() const;
};

struct CollectOptions {
    std::uint64_t event_cap = kCycleEventCap;
    int workers = 1;
    bool mirror = false;  // negate every direction draw (reflection twin)
    // Cycles are collected in fixed-size chunks, one derived RNG stream per
    // chunk, so the merged sample list never depends on the worker count.
    std::uint64_t cycles_per_replica = 4096;
};

struct CollectResult {
    std::vector<RegenerationSample> samples;  // ordered by (replica, cycle)
    std::uint64_t truncated = 0;              // discarded cycles; 0 in any valid run
};

// n_cycles i.i.d. cycles, each restarted at the origin (increments are
// distributed as in a single long run split at its regeneration times).
// Rejects p == 0: no bond ever breaks, so no regeneration exists.
CollectResult collect(const ModelParams& params, std::uint64_t n_cycles, std::uint64_t seed,
                      const CollectOptions& options = {});

struct DiffusionEstimate {
    double alpha_hat = 0.0;  // mean cycle duration, estimates E(tau_1)
    double se_alpha = 0.0;
    std::vector<double> cov;  // dim x dim displacement covariance, row-major
    double beta2_hat = 0.0;   // per-coordinate variance (trace/dim); Var X(tau_1) in 1D
    double se_beta2 = 0.0;
    double coeff = 0.0;  // beta2_hat / alpha_hat, the diffusion coefficient
    double se_coeff = 0.0;
    std::size_t n = 0;
    double confidence = 0.99;
    double z = 0.0;  // two-sided multiplier used for the intervals below
    double alpha_lo = 0.0, alpha_hi = 0.0;
    double beta2_lo = 0.0, beta2_hi = 0.0;
    double coeff_lo = 0.0, coeff_hi = 0.0;
    bool degenerate = false;  // zero displacement variance
};

// Regenerative estimators with normal-approximation intervals; the coeff
// standard error is by the delta method and keeps the (tau, |dx|^2) cycle
// covariance term.
DiffusionEstimate estimate(const std::vector<RegenerationSample>& samples, double confidence);

struct BoundCheck {
    std::string name;
    double lhs = 0.0;  // estimated quantity
    double rhs = 0.0;  // bound it must respect
    double se = 0.0;
    double margin_se = 0.0;  // (slack)/se, negative when the bound is violated
    bool ok = true;          // violation flagged when margin_se < -3
};

struct BoundReport {
    BoundCheck alpha_bound;      // alpha_hat <= exp(lambda p / mu) / (lambda p)
    BoundCheck mean_abs_bound;   // mean |dx| <= lambda * alpha_hat
    BoundCheck positivity_bound; // freq(|dx| >= 1) >= p mu / (lambda + mu)
    bool all_ok = true;
};

BoundReport check_bounds(const DiffusionEstimate& est,
                         const std::vector<RegenerationSample>& samples,
                         const ModelParams& params);

struct MeanZeroReport {
    std::vector<double> mean, se, lo, hi;  // per coordinate
    double confidence = 0.99;
    bool pass = false;  // every interval contains 0
};

MeanZeroReport mean_increment_zero_test(const std::vector<RegenerationSample>& samples,
                                        double confidence);

struct IidDiagnostics {
    std::vector<double> tau_autocorr;              // lags 1..5
    std::vector<std::vector<double>> dx_autocorr;  // [coord][lag]
    double band = 0.0;                             // +-4/sqrt(n)
    double ks_half_statistic = 0.0;  // first-half vs second-half delta_tau
    double ks_half_critical = 0.0;   // 1% two-sample critical value
    bool degenerate = false;
    bool pass = false;
};

IidDiagnostics iid_diagnostics(const std::vector<RegenerationSample>& samples);

// For p = 1 in 1D: zeta is the first time after the first jump at which the
// particle jumps again or the broken bond is repaired. Sampled through the
// event stepper itself (two steps from a fresh state).
struct ZetaSample {
    double t = 0.0;
    std::int64_t x = 0;
};

std::vector<ZetaSample> collect_zeta(const ModelParams& params, std::uint64_t n,
                                     std::uint64_t seed, int workers = 1);

// CSV: cycle_index,delta_tau,delta_x_0[,delta_x_1,...],attempts,max_broken
void write_samples_csv(const std::vector<RegenerationSample>& samples, int dim,
                       std::ostream& out);

}  // namespace collapse
