#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "collapse/errors.hpp"
#include "collapse/rng.hpp"

namespace collapse {

// Model: a continuous-time nearest-neighbor walk on Z^dim attempting jumps at
// rate lambda. A traversed bond breaks with probability p and is impassable
// until repaired; each broken bond is repaired at rate mu independently.
// Initially no bonds are broken.
struct ModelParams {
    double lambda = 1.0;  // jump attempt rate
    double p = 1.0;       // break probability per traversal
    double mu = 1.0;      // per-bond repair rate
    int dim = 1;          // lattice dimension

    // Throws ConfigError naming the violated bound.
    void validate() const;
};

using Site = std::vector<std::int64_t>;

// Lattice edge between `site` and `site + e_axis`; `site` is the endpoint
// with the smaller coordinate along `axis`. In 1D this is the edge {i, i+1}
// named by i.
struct Bond {
    Site site;
    std::int32_t axis = 0;

    friend bool operator==(const Bond&, const Bond&) = default;
};

struct WalkerState {
    Site position;             // X(t)
    std::vector<Bond> broken;  // b_t = broken.size()
    double clock = 0.0;
    std::uint64_t attempts = 0;  // N(t): jump attempts, successful or blocked

    explicit WalkerState(int dim = 1) : position(static_cast<std::size_t>(dim), 0) {}
};

enum class EventKind : std::uint8_t { JumpSuccess, JumpBlocked, Repair };

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::JumpBlocked;
    std::int32_t axis = -1;  // jump axis (JumpSuccess) or repaired bond axis
    std::int8_t sign = 0;    // +1 / -1 for JumpSuccess
    bool broke = false;      // JumpSuccess: traversed bond broke
    Bond bond;               // traversed or repaired bond; unset for JumpBlocked
};

const char* event_kind_name(EventKind kind);

// lambda + mu * |broken|: superposition of the attempt clock and one repair
// clock per broken bond.
double total_event_rate(const WalkerState& state, const ModelParams& params);

// One walk evolving by competing exponential clocks. Exact by memorylessness:
// each event draws Exp(total rate), then picks attempt vs repair by rate
// share. An attempt traverses a uniformly chosen intact incident bond (blocked
// if none) and breaks it with probability p after the move.
//
// Draw order per event is fixed (holding time, category, direction index,
// break coin | repair index), so a (params, seed) pair replays bit-exactly.
//
// `mirror` negates every direction draw; the resulting trajectory is the
// lattice reflection of the unmirrored one with the same seed.
class Walker {
  public:
    Walker(const ModelParams& params, Rng rng, bool mirror = false);

    // Starts from an explicit state (e.g. a prepared broken-bond
    // configuration). The normal walk starts with no broken bonds.
    Walker(const ModelParams& params, Rng rng, WalkerState initial, bool mirror = false);

    const WalkerState& state() const { return state_; }
    const ModelParams& params() const { return params_; }
    double total_rate() const;
    std::uint64_t breaks_so_far() const { return breaks_; }
    std::size_t max_broken() const { return max_broken_; }

    // Holding time of the next event. Drawn once and cached; the following
    // step() consumes it.
    double peek_dt();

    // Advance one event; returns a reference valid until the next step().
    const Event& step();

    // Horizon stop: advance time without an event (drops any cached dt).
    void advance_clock_to(double t);

    // Back to the initial state (origin, no broken bonds, clock 0). The RNG
    // stream continues, so successive runs stay independent.
    void reset();

  private:
    bool bond_is_broken(std::int32_t axis, int sign) const;

    ModelParams params_;
    Rng rng_;
    WalkerState state_;
    bool mirror_;
    Event last_;
    double pending_dt_ = -1.0;
    std::uint64_t breaks_ = 0;
    std::size_t max_broken_ = 0;
    // scratch: intact incident directions, encoded axis*2 + (sign>0)
    std::vector<std::int32_t> intact_;
};

// Hard cap that keeps accumulated floating-point rounding of the clock below
// 1e-6 relative on any single trajectory.
inline constexpr std::uint64_t kTrajectoryEventCap = 1'000'000'000ULL;
// Per regeneration cycle; exceeding it is an error, never silent.
inline constexpr std::uint64_t kCycleEventCap = 10'000'000ULL;

struct StopCondition {
    enum class Kind : std::uint8_t { Horizon, EventCount, FirstRegeneration };
    Kind kind = Kind::Horizon;
    double horizon = 0.0;
    std::uint64_t max_events = kTrajectoryEventCap;

    static StopCondition until_time(double t, std::uint64_t cap = kTrajectoryEventCap);
    static StopCondition event_count(std::uint64_t n);
    // Run until the broken set first returns to empty after at least one break.
    static StopCondition first_regeneration(std::uint64_t cap = kCycleEventCap);
};

struct Trajectory {
    ModelParams params;
    std::uint64_t seed = 0;
    std::vector<Event> events;  // empty when recording was elided
    bool events_recorded = true;
    WalkerState final_state;

    Trajectory() : final_state(1) {}
};

// Repeated step application until `stop`. Throws TruncationError when the
// event cap is exhausted first (Horizon / FirstRegeneration modes).
Trajectory simulate(const ModelParams& params, std::uint64_t seed, const StopCondition& stop,
                    bool record_events = true);

// X(t) at each requested time, right-continuous: the position after the last
// event at or before t. Times must be nondecreasing and within
// [0, final clock]; requires a trajectory with recorded events.
std::vector<Site> sample_positions(const Trajectory& trajectory,
                                   const std::vector<double>& times);

// CSV export, one row per event:
// event_index,time,kind,dx0[,dx1,...],bond_site,bond_axis,broken_count,attempts
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace collapse
