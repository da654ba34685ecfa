#include "collapse/regen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "collapse/parallel.hpp"
#include "collapse/stats.hpp"

namespace collapse {

std::int64_t RegenerationSample::l1() const {
    std::int64_t s = 0;
    for (std::int64_t c : delta_x) {
        s += std::abs(c);
    }
    return s;
}

namespace {

// One cycle from a fresh state; false means the event cap was hit first.
bool run_one_cycle(Walker& walker, std::uint64_t event_cap, RegenerationSample& out) {
    walker.reset();
    for (std::uint64_t ev = 0; ev < event_cap; ++ev) {
        walker.step();
        if (walker.breaks_so_far() > 0 && walker.state().broken.empty()) {
            const WalkerState& st = walker.state();
            out.delta_tau = st.clock;
            out.delta_x = st.position;
            out.attempts = st.attempts;
            out.max_broken = static_cast<std::int32_t>(walker.max_broken());
            if (!(out.delta_tau > 0.0) || out.max_broken < 1 ||
                out.l1() > static_cast<std::int64_t>(out.attempts)) {
                throw InvariantViolation("regeneration cycle invariant failed");
            }
            return true;
        }
    }
    return false;
}

}  // namespace

CollectResult collect(const ModelParams& params, std::uint64_t n_cycles, std::uint64_t seed,
                      const CollectOptions& options) {
    params.validate();
    if (params.p == 0.0) {
        throw ConfigError("p = 0 admits no regeneration (a bond never breaks)");
    }
    if (n_cycles < 1) {
        throw ConfigError("n_cycles must be >= 1");
    }
    const std::uint64_t chunk = std::max<std::uint64_t>(1, options.cycles_per_replica);
    const std::uint64_t n_replicas = (n_cycles + chunk - 1) / chunk;

    std::vector<std::vector<RegenerationSample>> per_replica(n_replicas);
    std::vector<std::uint64_t> truncated(n_replicas, 0);

    parallel_for_tasks(n_replicas, options.workers, [&](std::size_t r) {
        const std::uint64_t quota =
            std::min(chunk, n_cycles - static_cast<std::uint64_t>(r) * chunk);
        Walker walker(params, make_stream(seed, r), options.mirror);
        auto& samples = per_replica[r];
        samples.reserve(quota);
        RegenerationSample s;
        std::uint64_t collected = 0;
        while (collected < quota) {
            if (run_one_cycle(walker, options.event_cap, s)) {
                samples.push_back(s);
                ++collected;
            } else if (++truncated[r] > quota + 1000) {
                throw TruncationError("regeneration cycles keep exceeding the event cap");
            }
        }
    });

    CollectResult result;
    result.samples.reserve(n_cycles);
    for (std::uint64_t r = 0; r < n_replicas; ++r) {
        result.truncated += truncated[r];
        std::move(per_replica[r].begin(), per_replica[r].end(),
                  std::back_inserter(result.samples));
    }
    return result;
}

DiffusionEstimate estimate(const std::vector<RegenerationSample>& samples, double confidence) {
    const std::size_t n = samples.size();
    if (n < 2) {
        throw ConfigError("estimate requires at least 2 regeneration samples");
    }
    const std::size_t dim = samples.front().delta_x.size();

    DiffusionEstimate est;
    est.n = n;
    est.confidence = confidence;
    est.z = stats::z_for_confidence(confidence);

    double mean_tau = 0.0;
    std::vector<double> mean_x(dim, 0.0);
    for (const auto& s : samples) {
        mean_tau += s.delta_tau;
        for (std::size_t c = 0; c < dim; ++c) {
            mean_x[c] += static_cast<double>(s.delta_x[c]);
        }
    }
    mean_tau /= double(n);
    for (auto& m : mean_x) {
        m /= double(n);
    }

    est.cov.assign(dim * dim, 0.0);
    double var_tau = 0.0;   // population moment
    double mean_y = 0.0;    // y_i = |dx_i - mean|^2 / dim
    for (const auto& s : samples) {
        var_tau += (s.delta_tau - mean_tau) * (s.delta_tau - mean_tau);
        for (std::size_t c = 0; c < dim; ++c) {
            const double dc = static_cast<double>(s.delta_x[c]) - mean_x[c];
            for (std::size_t d = c; d < dim; ++d) {
                const double dd = static_cast<double>(s.delta_x[d]) - mean_x[d];
                est.cov[c * dim + d] += dc * dd;
            }
            mean_y += dc * dc;
        }
    }
    var_tau /= double(n);
    mean_y /= double(n) * double(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t d = c; d < dim; ++d) {
            est.cov[c * dim + d] /= double(n - 1);
            est.cov[d * dim + c] = est.cov[c * dim + d];
        }
    }

    est.alpha_hat = mean_tau;
    est.se_alpha = std::sqrt(var_tau / double(n - 1));

    double trace = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        trace += est.cov[c * dim + c];
    }
    est.beta2_hat = trace / double(dim);
    est.degenerate = est.beta2_hat == 0.0;

    // second pass for the y moments used by the delta method
    double var_y = 0.0;
    double cov_ty = 0.0;
    for (const auto& s : samples) {
        double y = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double dc = static_cast<double>(s.delta_x[c]) - mean_x[c];
            y += dc * dc;
        }
        y /= double(dim);
        var_y += (y - mean_y) * (y - mean_y);
        cov_ty += (y - mean_y) * (s.delta_tau - mean_tau);
    }
    var_y /= double(n);
    cov_ty /= double(n);

    est.se_beta2 = std::sqrt(var_y / double(n));
    est.coeff = est.beta2_hat / est.alpha_hat;
    const double a2 = est.alpha_hat * est.alpha_hat;
    double var_coeff =
        (var_y + est.coeff * est.coeff * var_tau - 2.0 * est.coeff * cov_ty) /
        (double(n) * a2);
    est.se_coeff = std::sqrt(std::max(0.0, var_coeff));

    est.alpha_lo = est.alpha_hat - est.z * est.se_alpha;
    est.alpha_hi = est.alpha_hat + est.z * est.se_alpha;
    est.beta2_lo = est.beta2_hat - est.z * est.se_beta2;
    est.beta2_hi = est.beta2_hat + est.z * est.se_beta2;
    est.coeff_lo = est.coeff - est.z * est.se_coeff;
    est.coeff_hi = est.coeff + est.z * est.se_coeff;
    return est;
}

BoundReport check_bounds(const DiffusionEstimate& est,
                         const std::vector<RegenerationSample>& samples,
                         const ModelParams& params) {
    const std::size_t n = samples.size();
    BoundReport report;

    // (i) E(tau) <= exp(lambda p / mu) / (lambda p)
    {
        BoundCheck& c = report.alpha_bound;
        c.name = "alpha_vs_busy_cycle";
        c.lhs = est.alpha_hat;
        c.rhs = std::exp(params.lambda * params.p / params.mu) / (params.lambda * params.p);
        c.se = est.se_alpha;
        c.margin_se = (c.rhs - c.lhs) / c.se;
        c.ok = c.margin_se >= -3.0;
    }

    // (ii) E|X(tau_1)| <= lambda E(tau_1); per-cycle difference v = lambda*tau - |dx|
    {
        BoundCheck& c = report.mean_abs_bound;
        c.name = "mean_abs_dx_vs_lambda_alpha";
        std::vector<double> v(n);
        double mean_abs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double l1 = static_cast<double>(samples[i].l1());
            mean_abs += l1;
            v[i] = params.lambda * samples[i].delta_tau - l1;
        }
        mean_abs /= double(n);
        const auto mv = stats::mean_var(v);
        c.lhs = mean_abs;
        c.rhs = params.lambda * est.alpha_hat;
        c.se = mv.se_mean;
        c.margin_se = (c.se > 0.0) ? mv.mean / c.se
                                   : (mv.mean >= 0.0 ? std::numeric_limits<double>::infinity()
                                                     : -std::numeric_limits<double>::infinity());
        c.ok = c.margin_se >= -3.0;
    }

    // (iii) P(|X(tau_1)| >= 1) >= p mu / (lambda + mu)
    {
        BoundCheck& c = report.positivity_bound;
        c.name = "displacement_freq_vs_pA";
        std::size_t moved = 0;
        for (const auto& s : samples) {
            if (s.l1() >= 1) {
                ++moved;
            }
        }
        const double f = double(moved) / double(n);
        c.lhs = f;
        c.rhs = params.p * params.mu / (params.lambda + params.mu);
        c.se = std::sqrt(std::max(0.0, f * (1.0 - f)) / double(n));
        const double slack = c.lhs - c.rhs;
        c.margin_se = (c.se > 0.0) ? slack / c.se
                                   : (slack >= 0.0 ? std::numeric_limits<double>::infinity()
                                                   : -std::numeric_limits<double>::infinity());
        c.ok = c.margin_se >= -3.0;
    }

    report.all_ok =
        report.alpha_bound.ok && report.mean_abs_bound.ok && report.positivity_bound.ok;
    return report;
}

MeanZeroReport mean_increment_zero_test(const std::vector<RegenerationSample>& samples,
                                        double confidence) {
    const std::size_t n = samples.size();
    if (n < 2) {
        throw ConfigError("mean_increment_zero_test requires at least 2 samples");
    }
    const std::size_t dim = samples.front().delta_x.size();
    const double z = stats::z_for_confidence(confidence);

    MeanZeroReport rep;
    rep.confidence = confidence;
    rep.pass = true;
    std::vector<double> coord(n);
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            coord[i] = static_cast<double>(samples[i].delta_x[c]);
        }
        const auto mv = stats::mean_var(coord);
        rep.mean.push_back(mv.mean);
        rep.se.push_back(mv.se_mean);
        rep.lo.push_back(mv.mean - z * mv.se_mean);
        rep.hi.push_back(mv.mean + z * mv.se_mean);
        if (rep.lo.back() > 0.0 || rep.hi.back() < 0.0) {
            rep.pass = false;
        }
    }
    return rep;
}

IidDiagnostics iid_diagnostics(const std::vector<RegenerationSample>& samples) {
    const std::size_t n = samples.size();
    if (n < 100) {
        throw ConfigError("iid_diagnostics requires at least 100 samples");
    }
    const std::size_t dim = samples.front().delta_x.size();

    IidDiagnostics d;
    d.band = 4.0 / std::sqrt(double(n));

    std::vector<double> tau(n);
    for (std::size_t i = 0; i < n; ++i) {
        tau[i] = samples[i].delta_tau;
    }
    d.tau_autocorr = stats::autocorrelations(tau, 5);

    std::vector<double> coord(n);
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            coord[i] = static_cast<double>(samples[i].delta_x[c]);
        }
        d.dx_autocorr.push_back(stats::autocorrelations(coord, 5));
    }

    bool in_band = true;
    auto scan = [&](const std::vector<double>& acf) {
        for (double r : acf) {
            if (std::isnan(r)) {
                d.degenerate = true;
            } else if (std::abs(r) > d.band) {
                in_band = false;
            }
        }
    };
    scan(d.tau_autocorr);
    for (const auto& acf : d.dx_autocorr) {
        scan(acf);
    }

    const std::size_t half = n / 2;
    std::vector<double> first(tau.begin(), tau.begin() + half);
    std::vector<double> second(tau.begin() + half, tau.end());
    const auto ks = stats::ks_two_sample_test(std::move(first), std::move(second), 0.01);
    d.ks_half_statistic = ks.statistic;
    d.ks_half_critical = ks.critical;

    d.pass = !d.degenerate && in_band && ks.pass;
    return d;
}

std::vector<ZetaSample> collect_zeta(const ModelParams& params, std::uint64_t n,
                                     std::uint64_t seed, int workers) {
    params.validate();
    if (params.p != 1.0 || params.dim != 1) {
        throw ConfigError("zeta sampling is defined for p = 1 in dimension 1");
    }
    if (n < 1) {
        throw ConfigError("zeta sample count must be >= 1");
    }
    constexpr std::uint64_t kChunk = 65536;
    const std::uint64_t n_replicas = (n + kChunk - 1) / kChunk;
    std::vector<ZetaSample> out(n);

    parallel_for_tasks(n_replicas, workers, [&](std::size_t r) {
        const std::uint64_t begin = static_cast<std::uint64_t>(r) * kChunk;
        const std::uint64_t quota = std::min(kChunk, n - begin);
        Walker walker(params, make_stream(seed, r));
        for (std::uint64_t i = 0; i < quota; ++i) {
            walker.reset();
            // with p = 1 the first event is the first jump (sigma_1); the
            // second event is either another jump or the repair, i.e. zeta
            const Event& first = walker.step();
            if (first.kind != EventKind::JumpSuccess || !first.broke) {
                throw InvariantViolation("zeta sampling: first event must break a bond");
            }
            walker.step();
            out[begin + i] = {walker.state().clock, walker.state().position[0]};
        }
    });
    return out;
}

namespace {

void append_double(std::string& s, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    s.append(buf, ptr);
}

}  // namespace

void write_samples_csv(const std::vector<RegenerationSample>& samples, int dim,
                       std::ostream& out) {
    std::string line = "cycle_index,delta_tau";
    for (int c = 0; c < dim; ++c) {
        line += ",delta_x_" + std::to_string(c);
    }
    line += ",attempts,max_broken\n";
    out << line;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        line.clear();
        line += std::to_string(i);
        line += ',';
        append_double(line, samples[i].delta_tau);
        for (int c = 0; c < dim; ++c) {
            line += ',';
            line += std::to_string(samples[i].delta_x[static_cast<std::size_t>(c)]);
        }
        line += ',';
        line += std::to_string(samples[i].attempts);
        line += ',';
        line += std::to_string(samples[i].max_broken);
        line += '\n';
        out << line;
    }
}

}  // namespace collapse
