#include "collapse/queue.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <string>

#include "collapse/stats.hpp"

namespace collapse {

namespace {

// Substream tags shared by coupled_run and thinned_queue_events. Keeping the
// direction draws on their own stream is what makes the queue marginal
// reproducible without knowing anything about the walk.
constexpr std::uint64_t kAttemptStream = 1;
constexpr std::uint64_t kMarkStream = 2;
constexpr std::uint64_t kDirectionStream = 3;
constexpr std::uint64_t kServiceStream = 4;

using MinHeap = std::priority_queue<double, std::vector<double>, std::greater<>>;

}  // namespace

BusyCycleEstimate busy_cycle_mean(double arrival_rate, double service_rate,
                                  std::uint64_t n_cycles, std::uint64_t seed) {
    if (!(arrival_rate > 0.0) || !(service_rate > 0.0)) {
        throw ConfigError("queue rates must be > 0");
    }
    if (n_cycles < 1) {
        throw ConfigError("n_cycles must be >= 1");
    }
    Rng rng(derive_seed(seed, kAttemptStream));

    double sum = 0.0;
    double sum_sq = 0.0;
    MinHeap departures;
    for (std::uint64_t i = 0; i < n_cycles; ++i) {
        double t = rng.exponential(arrival_rate);  // idle period
        departures.push(t + rng.exponential(service_rate));
        double next_arrival = t + rng.exponential(arrival_rate);
        while (!departures.empty()) {
            if (next_arrival < departures.top()) {
                t = next_arrival;
                departures.push(t + rng.exponential(service_rate));
                next_arrival = t + rng.exponential(arrival_rate);
            } else {
                t = departures.top();
                departures.pop();
            }
        }
        sum += t;
        sum_sq += t * t;
    }
    BusyCycleEstimate est;
    est.n_cycles = n_cycles;
    est.mean = sum / double(n_cycles);
    const double var_pop = sum_sq / double(n_cycles) - est.mean * est.mean;
    est.se = (n_cycles > 1)
                 ? std::sqrt(std::max(0.0, var_pop) / double(n_cycles - 1))
                 : 0.0;
    est.theory = std::exp(arrival_rate / service_rate) / arrival_rate;
    return est;
}

QueueStats simulate_queue(double arrival_rate, double service_rate, std::uint64_t seed,
                          double horizon) {
    if (!(arrival_rate > 0.0) || !(service_rate > 0.0)) {
        throw ConfigError("queue rates must be > 0");
    }
    if (horizon < 0.0) {
        throw ConfigError("horizon must be >= 0");
    }
    Rng rng(derive_seed(seed, kAttemptStream));

    QueueStats st;
    st.horizon = horizon;

    MinHeap departures;
    double t = 0.0;
    double next_arrival = rng.exponential(arrival_rate);
    double integral = 0.0;
    double busy_time = 0.0;
    // per regeneration cycle (empty-to-empty) for the ratio-estimator SE
    std::vector<double> cycle_len;
    std::vector<double> cycle_area;
    double cycle_start = 0.0;
    double cycle_integral = 0.0;

    while (true) {
        const double next_dep =
            departures.empty() ? std::numeric_limits<double>::infinity() : departures.top();
        const double t_next = std::min(next_arrival, next_dep);
        const auto q = static_cast<double>(departures.size());
        if (t_next >= horizon) {
            integral += q * (horizon - t);
            cycle_integral += q * (horizon - t);
            if (q > 0.0) {
                busy_time += horizon - t;
            }
            t = horizon;
            break;
        }
        integral += q * (t_next - t);
        cycle_integral += q * (t_next - t);
        if (q > 0.0) {
            busy_time += t_next - t;
        }
        t = t_next;
        if (next_arrival < next_dep) {
            ++st.arrivals;
            departures.push(t + rng.exponential(service_rate));
            next_arrival = t + rng.exponential(arrival_rate);
        } else {
            ++st.departures;
            departures.pop();
            if (departures.empty()) {
                cycle_len.push_back(t - cycle_start);
                cycle_area.push_back(cycle_integral);
                cycle_start = t;
                cycle_integral = 0.0;
            }
        }
    }

    st.customers_at_end = static_cast<std::int64_t>(departures.size());
    st.time_average = (horizon > 0.0) ? integral / horizon : 0.0;
    st.busy_fraction = (horizon > 0.0) ? busy_time / horizon : 0.0;
    st.completed_cycles = cycle_len.size();
    const std::size_t n = cycle_len.size();
    if (n >= 2) {
        double xbar = 0.0;
        double ybar = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            xbar += cycle_len[i];
            ybar += cycle_area[i];
        }
        xbar /= double(n);
        ybar /= double(n);
        const double r = ybar / xbar;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = cycle_area[i] - r * cycle_len[i];
            s += d * d;
        }
        s /= double(n - 1);
        st.se_time_average = std::sqrt(s / double(n)) / xbar;
    }
    return st;
}

std::vector<QueueEventTime> thinned_queue_events(const ModelParams& params, std::uint64_t seed,
                                                 double horizon) {
    params.validate();
    Rng att(derive_seed(seed, kAttemptStream));
    Rng mark(derive_seed(seed, kMarkStream));
    Rng svc(derive_seed(seed, kServiceStream));

    std::vector<QueueEventTime> out;
    MinHeap departures;
    double t_attempt = att.exponential(params.lambda);
    while (true) {
        const double next_dep =
            departures.empty() ? std::numeric_limits<double>::infinity() : departures.top();
        if (t_attempt <= next_dep) {  // attempts win ties, as in coupled_run
            if (t_attempt > horizon) {
                break;
            }
            if (mark.bernoulli(params.p)) {
                out.push_back({t_attempt, true});
                departures.push(t_attempt + svc.exponential(params.mu));
            }
            t_attempt += att.exponential(params.lambda);
        } else {
            if (next_dep > horizon) {
                break;
            }
            out.push_back({next_dep, false});
            departures.pop();
        }
    }
    return out;
}

const char* coupled_kind_name(CoupledKind kind) {
    switch (kind) {
        case CoupledKind::Jump:
            return "jump";
        case CoupledKind::Blocked:
            return "blocked";
        case CoupledKind::Repair:
            return "repair";
        case CoupledKind::Departure:
            return "departure";
    }
    return "?";
}

CoupledRecord coupled_run(const ModelParams& params, std::uint64_t seed, double horizon,
                          bool record_events) {
    params.validate();
    if (params.p == 0.0) {
        throw ConfigError("coupled run requires p > 0");
    }
    if (horizon < 0.0) {
        throw ConfigError("horizon must be >= 0");
    }
    Rng att(derive_seed(seed, kAttemptStream));
    Rng mark(derive_seed(seed, kMarkStream));
    Rng dir(derive_seed(seed, kDirectionStream));
    Rng svc(derive_seed(seed, kServiceStream));

    const int dim = params.dim;
    Site position(static_cast<std::size_t>(dim), 0);
    struct BrokenBond {
        Bond bond;
        double repair_time;
    };
    std::vector<BrokenBond> broken;
    MinHeap unmatched;

    CoupledRecord rec;
    rec.horizon = horizon;

    auto bond_is_broken = [&](std::int32_t axis, int sign) {
        const std::int64_t shift = (sign < 0) ? 1 : 0;
        for (const BrokenBond& bb : broken) {
            if (bb.bond.axis != axis) {
                continue;
            }
            bool match = true;
            for (std::size_t i = 0; i < position.size(); ++i) {
                const std::int64_t want =
                    position[i] - (static_cast<std::int32_t>(i) == axis ? shift : 0);
                if (bb.bond.site[i] != want) {
                    match = false;
                    break;
                }
            }
            if (match) {
                return true;
            }
        }
        return false;
    };

    auto check_and_record = [&](double t, CoupledKind kind, bool marked) {
        const auto b = static_cast<std::int32_t>(broken.size());
        const auto q = static_cast<std::int32_t>(broken.size() + unmatched.size());
        const std::int32_t matched = b;
        if (b > q || matched != b) {
            ++rec.violations;
            throw InvariantViolation("coupling invariant b_t <= Q_t violated");
        }
        if (record_events) {
            rec.events.push_back({t, kind, marked, b, q, matched});
        }
    };

    std::vector<std::int32_t> intact;
    intact.reserve(static_cast<std::size_t>(2 * dim));
    double t_attempt = att.exponential(params.lambda);

    while (true) {
        double next_repair = std::numeric_limits<double>::infinity();
        std::size_t next_repair_idx = 0;
        for (std::size_t i = 0; i < broken.size(); ++i) {
            if (broken[i].repair_time < next_repair) {
                next_repair = broken[i].repair_time;
                next_repair_idx = i;
            }
        }
        const double next_dep =
            unmatched.empty() ? std::numeric_limits<double>::infinity() : unmatched.top();
        const double t_next = std::min({t_attempt, next_repair, next_dep});
        if (t_next > horizon) {
            break;
        }

        if (t_attempt <= t_next) {
            // attempt: one draw from the mark stream, and one service draw per
            // marked attempt, whether or not the walk is blocked
            ++rec.attempts;
            const bool marked = mark.bernoulli(params.p);
            double duration = 0.0;
            if (marked) {
                ++rec.marked_attempts;
                duration = svc.exponential(params.mu);
                rec.queue_events.push_back({t_attempt, true});
            }
            intact.clear();
            for (std::int32_t axis = 0; axis < dim; ++axis) {
                if (!bond_is_broken(axis, -1)) {
                    intact.push_back(axis * 2);
                }
                if (!bond_is_broken(axis, +1)) {
                    intact.push_back(axis * 2 + 1);
                }
            }
            if (intact.empty()) {
                if (marked) {
                    ++rec.blocked_marked;
                    unmatched.push(t_attempt + duration);
                }
                check_and_record(t_attempt, CoupledKind::Blocked, marked);
            } else {
                const std::int32_t code =
                    intact[static_cast<std::size_t>(dir.uniform_index(intact.size()))];
                const std::int32_t axis = code / 2;
                const int sign = (code % 2 == 1) ? +1 : -1;
                Bond bond;
                bond.axis = axis;
                bond.site = position;
                if (sign < 0) {
                    bond.site[static_cast<std::size_t>(axis)] -= 1;
                }
                position[static_cast<std::size_t>(axis)] += sign;
                if (marked) {
                    ++rec.breaks;
                    broken.push_back({std::move(bond), t_attempt + duration});
                }
                check_and_record(t_attempt, CoupledKind::Jump, marked);
            }
            t_attempt += att.exponential(params.lambda);
        } else if (next_repair <= next_dep) {
            rec.queue_events.push_back({next_repair, false});
            if (next_repair_idx + 1 != broken.size()) {
                broken[next_repair_idx] = std::move(broken.back());
            }
            broken.pop_back();
            check_and_record(next_repair, CoupledKind::Repair, false);
        } else {
            rec.queue_events.push_back({next_dep, false});
            unmatched.pop();
            check_and_record(next_dep, CoupledKind::Departure, false);
        }
    }

    rec.final_b = static_cast<std::int64_t>(broken.size());
    rec.final_q = static_cast<std::int64_t>(broken.size() + unmatched.size());
    return rec;
}

std::vector<double> coupled_cycle_durations(const CoupledRecord& record) {
    std::vector<double> out;
    double prev_tau = 0.0;
    std::int32_t prev_b = 0;
    for (const CoupledEvent& ev : record.events) {
        if (prev_b > 0 && ev.b == 0) {
            out.push_back(ev.time - prev_tau);
            prev_tau = ev.time;
        }
        prev_b = ev.b;
    }
    return out;
}

namespace {

void append_double(std::string& s, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    s.append(buf, ptr);
}

}  // namespace

void write_coupled_csv(const CoupledRecord& record, std::ostream& out) {
    out << "time,event,b,q,matched\n";
    std::string line;
    for (const CoupledEvent& ev : record.events) {
        line.clear();
        append_double(line, ev.time);
        line += ',';
        line += coupled_kind_name(ev.kind);
        line += ',';
        line += std::to_string(ev.b);
        line += ',';
        line += std::to_string(ev.q);
        line += ',';
        line += std::to_string(ev.matched);
        line += '\n';
        out << line;
    }
}

}  // namespace collapse
