#include "collapse/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "collapse/parallel.hpp"

namespace collapse {

namespace {

// Runs one replica to the last grid time, recording the position at every
// grid point (right-continuous: state after the last event at or before t).
void run_on_grid(const ModelParams& params, Rng rng, const std::vector<double>& grid,
                 std::vector<Site>& out) {
    Walker walker(params, rng);
    out.clear();
    out.reserve(grid.size());
    std::size_t next_idx = 0;
    std::uint64_t events = 0;
    while (next_idx < grid.size()) {
        const double t_next = walker.state().clock + walker.peek_dt();
        while (next_idx < grid.size() && grid[next_idx] < t_next) {
            out.push_back(walker.state().position);
            ++next_idx;
        }
        if (next_idx >= grid.size()) {
            break;
        }
        walker.step();
        if (++events >= kTrajectoryEventCap) {
            throw TruncationError("trajectory event cap exceeded");
        }
    }
}

}  // namespace

MarginalSample marginal_samples(const ModelParams& params, std::uint64_t n, double t,
                                std::size_t replicas, std::uint64_t seed, int workers) {
    params.validate();
    if (n < 1) {
        throw ConfigError("rescaling parameter n must be >= 1");
    }
    if (replicas < 100) {
        throw ConfigError("marginal sampling requires >= 100 replicas");
    }
    if (!(t >= 0.0)) {
        throw ConfigError("t must be >= 0");
    }
    const double horizon = double(n) * t;
    const double scale = 1.0 / std::sqrt(double(n));
    const auto dim = static_cast<std::size_t>(params.dim);

    MarginalSample ms;
    ms.n = n;
    ms.t = t;
    ms.values.assign(dim, std::vector<double>(replicas, 0.0));

    std::vector<double> grid{horizon};
    parallel_for_tasks(replicas, workers, [&](std::size_t r) {
        std::vector<Site> at;
        run_on_grid(params, make_stream(seed, r), grid, at);
        for (std::size_t c = 0; c < dim; ++c) {
            ms.values[c][r] = static_cast<double>(at[0][c]) * scale;
        }
    });
    return ms;
}

TestReport clt_test(const std::vector<double>& values, double coeff, double t, double alpha) {
    if (!(coeff > 0.0)) {
        throw ConfigError("clt test requires a positive diffusion coefficient");
    }
    if (!(t > 0.0)) {
        throw ConfigError("clt test requires t > 0");
    }
    const double sd = std::sqrt(coeff * t);
    std::vector<double> standardized(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        standardized[i] = values[i] / sd;
    }
    const auto ks = stats::ks_test_standard_normal(std::move(standardized), alpha);
    TestReport rep;
    rep.name = "ks_marginal_vs_normal";
    rep.statistic = ks.statistic;
    rep.critical = ks.critical;
    rep.p_value = ks.p_value;
    rep.pass = ks.pass;
    rep.n = ks.n;
    return rep;
}

VarianceCurve variance_linearity(const ModelParams& params, const std::vector<double>& grid,
                                 std::size_t replicas, std::uint64_t seed, int workers) {
    params.validate();
    if (grid.size() < 5) {
        throw ConfigError("variance grid needs at least 5 times");
    }
    if (!std::is_sorted(grid.begin(), grid.end()) || !(grid.front() > 0.0)) {
        throw ConfigError("variance grid must be positive and increasing");
    }
    if (grid.back() < 10.0 * grid.front()) {
        throw ConfigError("variance grid must span at least one decade");
    }
    if (replicas < 2) {
        throw ConfigError("variance_linearity requires >= 2 replicas");
    }
    const auto dim = static_cast<std::size_t>(params.dim);
    const std::size_t g = grid.size();

    // positions[r] holds the replica's coordinates at every grid time
    std::vector<std::vector<Site>> positions(replicas);
    parallel_for_tasks(replicas, workers, [&](std::size_t r) {
        run_on_grid(params, make_stream(seed, r), grid, positions[r]);
    });

    VarianceCurve curve;
    curve.times = grid;
    curve.replicas = replicas;
    curve.variance.resize(g);
    curve.mean.resize(g);
    std::vector<double> coord(replicas);
    for (std::size_t i = 0; i < g; ++i) {
        double var_sum = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            for (std::size_t r = 0; r < replicas; ++r) {
                coord[r] = static_cast<double>(positions[r][i][c]);
            }
            const auto mv = stats::mean_var(coord);
            var_sum += mv.var;
            if (c == 0) {
                curve.mean[i] = mv.mean;
            }
        }
        curve.variance[i] = var_sum / double(dim);
    }
    curve.fit = stats::least_squares(curve.times, curve.variance);
    return curve;
}

RecurrenceStats recurrence_stats(const ModelParams& params, std::vector<double> horizons,
                                 std::size_t replicas, std::uint64_t seed, int workers) {
    params.validate();
    if (horizons.empty()) {
        throw ConfigError("recurrence needs at least one horizon");
    }
    if (!std::is_sorted(horizons.begin(), horizons.end())) {
        throw ConfigError("horizons must be nondecreasing");
    }
    if (replicas < 100) {
        throw ConfigError("recurrence_stats requires >= 100 replicas");
    }
    const double max_h = horizons.back();
    const std::size_t nh = horizons.size();

    std::vector<std::vector<std::uint32_t>> returns(replicas);
    std::vector<double> first_return(replicas);

    parallel_for_tasks(replicas, workers, [&](std::size_t r) {
        Walker walker(params, make_stream(seed, r));
        std::vector<std::uint32_t> counts(nh, 0);
        double first = std::numeric_limits<double>::infinity();
        std::uint64_t events = 0;
        while (true) {
            const double t_next = walker.state().clock + walker.peek_dt();
            if (t_next > max_h) {
                break;
            }
            const Event& ev = walker.step();
            if (++events >= kTrajectoryEventCap) {
                throw TruncationError("trajectory event cap exceeded");
            }
            if (ev.kind != EventKind::JumpSuccess) {
                continue;
            }
            bool at_origin = true;
            for (std::int64_t c : walker.state().position) {
                if (c != 0) {
                    at_origin = false;
                    break;
                }
            }
            if (at_origin) {
                first = std::min(first, ev.time);
                for (std::size_t i = 0; i < nh; ++i) {
                    if (ev.time <= horizons[i]) {
                        ++counts[i];
                    }
                }
            }
        }
        returns[r] = std::move(counts);
        first_return[r] = first;
    });

    RecurrenceStats rs;
    rs.horizons = std::move(horizons);
    rs.replicas = replicas;
    rs.fraction_returned.assign(nh, 0.0);
    rs.mean_returns.assign(nh, 0.0);
    for (std::size_t r = 0; r < replicas; ++r) {
        for (std::size_t i = 0; i < nh; ++i) {
            if (first_return[r] <= rs.horizons[i]) {
                rs.fraction_returned[i] += 1.0;
            }
            rs.mean_returns[i] += double(returns[r][i]);
        }
    }
    for (std::size_t i = 0; i < nh; ++i) {
        rs.fraction_returned[i] /= double(replicas);
        rs.mean_returns[i] /= double(replicas);
    }
    return rs;
}

CompareReport baseline_compare(const DiffusionEstimate& est, const ModelParams& params) {
    params.validate();
    CompareReport rep;
    rep.confidence = est.confidence;
    if (params.p == 0.0) {
        // free walk compared with itself: diffusion coefficient is lambda
        rep.ratio = 1.0;
        rep.lo = 1.0;
        rep.hi = 1.0;
        rep.faster = false;
        return rep;
    }
    rep.ratio = est.coeff / params.lambda;
    rep.lo = est.coeff_lo / params.lambda;
    rep.hi = est.coeff_hi / params.lambda;
    rep.faster = rep.lo > 1.0;
    return rep;
}

double increment_correlation(const ModelParams& params, double horizon, std::size_t replicas,
                             std::uint64_t seed, int workers) {
    params.validate();
    if (!(horizon > 0.0) || replicas < 2) {
        throw ConfigError("increment correlation needs horizon > 0 and >= 2 replicas");
    }
    std::vector<double> grid{horizon / 2.0, horizon};
    std::vector<double> inc1(replicas);
    std::vector<double> inc2(replicas);
    parallel_for_tasks(replicas, workers, [&](std::size_t r) {
        std::vector<Site> at;
        run_on_grid(params, make_stream(seed, r), grid, at);
        inc1[r] = static_cast<double>(at[0][0]);
        inc2[r] = static_cast<double>(at[1][0] - at[0][0]);
    });
    const auto mv1 = stats::mean_var(inc1);
    const auto mv2 = stats::mean_var(inc2);
    double cov = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) {
        cov += (inc1[r] - mv1.mean) * (inc2[r] - mv2.mean);
    }
    cov /= double(replicas - 1);
    const double denom = std::sqrt(mv1.var * mv2.var);
    return (denom > 0.0) ? cov / denom : 0.0;
}

}  // namespace collapse
