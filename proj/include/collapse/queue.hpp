#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "collapse/process.hpp"

namespace collapse {

// M/M/inf: Poisson(arrival_rate) arrivals, each customer served after an
// independent Exp(service_rate); the broken-bond count is dominated pathwise
// by this queue with arrival rate lambda*p and service rate mu.

struct BusyCycleEstimate {
    double mean = 0.0;           // empty-to-empty cycle (idle + busy period)
    double se = 0.0;
    double theory = 0.0;         // exp(arrival/service) / arrival
    std::uint64_t n_cycles = 0;
};

BusyCycleEstimate busy_cycle_mean(double arrival_rate, double service_rate,
                                  std::uint64_t n_cycles, std::uint64_t seed);

struct QueueStats {
    double horizon = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
    double time_average = 0.0;     // of the customer count; stationary value a/mu
    double se_time_average = 0.0;  // regenerative (ratio-estimator) SE
    double busy_fraction = 0.0;    // fraction of time with customers > 0
    std::uint64_t completed_cycles = 0;
    std::int64_t customers_at_end = 0;
};

QueueStats simulate_queue(double arrival_rate, double service_rate, std::uint64_t seed,
                          double horizon);

struct QueueEventTime {
    double time = 0.0;
    bool arrival = false;

    friend bool operator==(const QueueEventTime&, const QueueEventTime&) = default;
};

// Queue marginal of the coupling scheme: arrivals are the break-marked
// attempts of a Poisson(lambda) stream (thinned to rate lambda*p), service
// drawn once per arrival. Consumes the same substreams as coupled_run, so the
// returned event times are bit-identical to that run's queue events.
std::vector<QueueEventTime> thinned_queue_events(const ModelParams& params, std::uint64_t seed,
                                                 double horizon);

enum class CoupledKind : std::uint8_t {
    Jump,       // walk attempt that traversed a bond (queue arrival when marked)
    Blocked,    // walk attempt with all incident bonds broken
    Repair,     // matched departure: bond repaired and its customer leaves
    Departure,  // unmatched customer leaves
};

const char* coupled_kind_name(CoupledKind kind);

struct CoupledEvent {
    double time = 0.0;
    CoupledKind kind = CoupledKind::Jump;
    bool marked = false;       // attempt carried a break mark (queue arrival)
    std::int32_t b = 0;        // broken bonds after the event
    std::int32_t q = 0;        // customers in system after the event
    std::int32_t matched = 0;  // customers matched to a broken bond
};

struct CoupledRecord {
    double horizon = 0.0;
    std::vector<CoupledEvent> events;        // empty when recording elided
    std::vector<QueueEventTime> queue_events;
    std::uint64_t violations = 0;            // b > q occurrences; always 0
    std::uint64_t attempts = 0;
    std::uint64_t marked_attempts = 0;
    std::uint64_t breaks = 0;
    std::uint64_t blocked_marked = 0;  // unmatched arrivals (the coupling slack)
    std::int64_t final_b = 0;
    std::int64_t final_q = 0;
};

// Walk and queue driven by shared randomness: one Poisson(lambda) attempt
// stream carries i.i.d. Bernoulli(p) break marks; every marked attempt is a
// queue arrival with a service duration drawn at arrival. A marked traversal
// breaks the traversed bond and shares that duration as the bond's repair
// clock (the customer is matched to the bond); a marked blocked attempt
// injects an unmatched customer. Checks b_t <= Q_t and matched == b_t at
// every event and throws InvariantViolation on any failure.
CoupledRecord coupled_run(const ModelParams& params, std::uint64_t seed, double horizon,
                          bool record_events = true);

// Durations between successive returns of b_t to zero (after at least one
// break), read off a recorded coupled run.
std::vector<double> coupled_cycle_durations(const CoupledRecord& record);

// CSV: time,event,b,q,matched
void write_coupled_csv(const CoupledRecord& record, std::ostream& out);

}  // namespace collapse
