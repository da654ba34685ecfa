#include "collapse/process.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace collapse {

void ModelParams::validate() const {
    std::ostringstream msg;
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        msg << "lambda must be > 0 (got " << lambda << ")";
        throw ConfigError(msg.str());
    }
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        msg << "mu must be > 0 (got " << mu << ")";
        throw ConfigError(msg.str());
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        msg << "p must satisfy 0 <= p <= 1 (got " << p << ")";
        throw ConfigError(msg.str());
    }
    if (dim < 1) {
        msg << "dim must be >= 1 (got " << dim << ")";
        throw ConfigError(msg.str());
    }
}

const char* event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::JumpSuccess:
            return "jump";
        case EventKind::JumpBlocked:
            return "blocked";
        case EventKind::Repair:
            return "repair";
    }
    return "?";
}

double total_event_rate(const WalkerState& state, const ModelParams& params) {
    return params.lambda + params.mu * static_cast<double>(state.broken.size());
}

Walker::Walker(const ModelParams& params, Rng rng, bool mirror)
    : params_(params), rng_(rng), state_(params.dim), mirror_(mirror) {
    params_.validate();
    intact_.reserve(static_cast<std::size_t>(2 * params_.dim));
    last_.bond.site.assign(static_cast<std::size_t>(params_.dim), 0);
}

Walker::Walker(const ModelParams& params, Rng rng, WalkerState initial, bool mirror)
    : Walker(params, rng, mirror) {
    if (initial.position.size() != static_cast<std::size_t>(params.dim)) {
        throw ConfigError("initial state dimension mismatch");
    }
    state_ = std::move(initial);
    max_broken_ = state_.broken.size();
}

double Walker::total_rate() const { return total_event_rate(state_, params_); }

double Walker::peek_dt() {
    if (pending_dt_ < 0.0) {
        pending_dt_ = rng_.exponential(total_rate());
    }
    return pending_dt_;
}

void Walker::advance_clock_to(double t) {
    pending_dt_ = -1.0;
    if (t > state_.clock) {
        state_.clock = t;
    }
}

void Walker::reset() {
    std::fill(state_.position.begin(), state_.position.end(), 0);
    state_.broken.clear();
    state_.clock = 0.0;
    state_.attempts = 0;
    breaks_ = 0;
    max_broken_ = 0;
    pending_dt_ = -1.0;
}

bool Walker::bond_is_broken(std::int32_t axis, int sign) const {
    const std::int64_t shift = (sign < 0) ? 1 : 0;
    for (const Bond& b : state_.broken) {
        if (b.axis != axis) {
            continue;
        }
        bool match = true;
        for (std::size_t i = 0; i < state_.position.size(); ++i) {
            const std::int64_t want =
                state_.position[i] - (static_cast<std::int32_t>(i) == axis ? shift : 0);
            if (b.site[i] != want) {
                match = false;
                break;
            }
        }
        if (match) {
            return true;
        }
    }
    return false;
}

const Event& Walker::step() {
    const double total = total_rate();
    const double dt = (pending_dt_ >= 0.0) ? pending_dt_ : rng_.exponential(total);
    pending_dt_ = -1.0;
    state_.clock += dt;
    last_.time = state_.clock;
    last_.axis = -1;
    last_.sign = 0;
    last_.broke = false;

    const double u_cat = rng_.uniform01();
    if (u_cat < params_.lambda / total) {
        // jump attempt
        ++state_.attempts;
        intact_.clear();
        for (std::int32_t axis = 0; axis < params_.dim; ++axis) {
            // canonical sign order (-,+); mirrored runs enumerate (+,-) so the
            // same index draw picks the reflected direction
            const int first = mirror_ ? +1 : -1;
            for (int k = 0; k < 2; ++k) {
                const int sign = (k == 0) ? first : -first;
                if (!bond_is_broken(axis, sign)) {
                    intact_.push_back(axis * 2 + (sign > 0 ? 1 : 0));
                }
            }
        }
        if (intact_.empty()) {
            last_.kind = EventKind::JumpBlocked;
            return last_;
        }
        const std::int32_t code =
            intact_[static_cast<std::size_t>(rng_.uniform_index(intact_.size()))];
        const std::int32_t axis = code / 2;
        const int sign = (code % 2 == 1) ? +1 : -1;

        // traversed bond in canonical form, relative to the pre-move position
        last_.bond.axis = axis;
        for (std::size_t i = 0; i < state_.position.size(); ++i) {
            last_.bond.site[i] = state_.position[i];
        }
        if (sign < 0) {
            last_.bond.site[static_cast<std::size_t>(axis)] -= 1;
        }

        state_.position[static_cast<std::size_t>(axis)] += sign;
        last_.kind = EventKind::JumpSuccess;
        last_.axis = axis;
        last_.sign = static_cast<std::int8_t>(sign);

        // break trial happens at traversal, after the move completes
        const double u_break = rng_.uniform01();
        if (u_break < params_.p) {
            last_.broke = true;
            state_.broken.push_back(last_.bond);
            ++breaks_;
            max_broken_ = std::max(max_broken_, state_.broken.size());
        }
        return last_;
    }

    // repair of a uniformly chosen broken bond
    const std::size_t idx =
        static_cast<std::size_t>(rng_.uniform_index(state_.broken.size()));
    last_.kind = EventKind::Repair;
    last_.axis = state_.broken[idx].axis;
    last_.bond = state_.broken[idx];
    if (idx + 1 != state_.broken.size()) {
        state_.broken[idx] = std::move(state_.broken.back());
    }
    state_.broken.pop_back();
    return last_;
}

StopCondition StopCondition::until_time(double t, std::uint64_t cap) {
    StopCondition s;
    s.kind = Kind::Horizon;
    s.horizon = t;
    s.max_events = cap;
    return s;
}

StopCondition StopCondition::event_count(std::uint64_t n) {
    StopCondition s;
    s.kind = Kind::EventCount;
    s.max_events = n;
    return s;
}

StopCondition StopCondition::first_regeneration(std::uint64_t cap) {
    StopCondition s;
    s.kind = Kind::FirstRegeneration;
    s.max_events = cap;
    return s;
}

Trajectory simulate(const ModelParams& params, std::uint64_t seed, const StopCondition& stop,
                    bool record_events) {
    params.validate();
    Walker walker(params, Rng(seed));
    Trajectory traj;
    traj.params = params;
    traj.seed = seed;
    traj.events_recorded = record_events;

    std::uint64_t n_events = 0;
    for (;;) {
        if (stop.kind == StopCondition::Kind::EventCount) {
            if (n_events >= stop.max_events) {
                break;
            }
        } else if (n_events >= stop.max_events) {
            throw TruncationError("event cap (" + std::to_string(stop.max_events) +
                                  ") exceeded before stop condition");
        }
        if (stop.kind == StopCondition::Kind::Horizon) {
            const double t_next = walker.state().clock + walker.peek_dt();
            if (t_next > stop.horizon) {
                walker.advance_clock_to(stop.horizon);
                break;
            }
        }
        const Event& ev = walker.step();
        ++n_events;
        if (record_events) {
            traj.events.push_back(ev);
        }
        if (stop.kind == StopCondition::Kind::FirstRegeneration && walker.breaks_so_far() > 0 &&
            walker.state().broken.empty()) {
            break;
        }
    }
    traj.final_state = walker.state();
    return traj;
}

std::vector<Site> sample_positions(const Trajectory& trajectory,
                                   const std::vector<double>& times) {
    if (!trajectory.events_recorded) {
        throw std::logic_error("sample_positions: trajectory events were elided");
    }
    std::vector<Site> out;
    out.reserve(times.size());
    Site pos(static_cast<std::size_t>(trajectory.params.dim), 0);
    std::size_t next_event = 0;
    double prev_time = 0.0;
    for (double t : times) {
        if (t < prev_time) {
            throw std::invalid_argument("sample_positions: times must be nondecreasing");
        }
        prev_time = t;
        if (t < 0.0 || t > trajectory.final_state.clock) {
            throw std::out_of_range("sample_positions: time outside [0, final clock]");
        }
        while (next_event < trajectory.events.size() &&
               trajectory.events[next_event].time <= t) {
            const Event& ev = trajectory.events[next_event];
            if (ev.kind == EventKind::JumpSuccess) {
                pos[static_cast<std::size_t>(ev.axis)] += ev.sign;
            }
            ++next_event;
        }
        out.push_back(pos);
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

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
    const int dim = trajectory.params.dim;
    std::string line = "event_index,time,kind";
    for (int i = 0; i < dim; ++i) {
        line += ",dx" + std::to_string(i);
    }
    line += ",bond_site,bond_axis,broken_count,attempts\n";
    out << line;

    std::size_t broken_count = 0;
    std::uint64_t attempts = 0;
    for (std::size_t idx = 0; idx < trajectory.events.size(); ++idx) {
        const Event& ev = trajectory.events[idx];
        line.clear();
        line += std::to_string(idx);
        line += ',';
        append_double(line, ev.time);
        line += ',';
        line += event_kind_name(ev.kind);
        if (ev.kind != EventKind::Repair) {
            ++attempts;
        }
        for (int i = 0; i < dim; ++i) {
            line += ',';
            const bool moved = ev.kind == EventKind::JumpSuccess && ev.axis == i;
            line += moved ? std::to_string(static_cast<int>(ev.sign)) : "0";
        }
        line += ',';
        if (ev.kind == EventKind::JumpBlocked) {
            line += ",";  // empty bond_site and bond_axis
        } else {
            for (std::size_t i = 0; i < ev.bond.site.size(); ++i) {
                if (i > 0) {
                    line += ';';
                }
                line += std::to_string(ev.bond.site[i]);
            }
            line += ',';
            line += std::to_string(ev.bond.axis);
        }
        if (ev.kind == EventKind::JumpSuccess && ev.broke) {
            ++broken_count;
        } else if (ev.kind == EventKind::Repair) {
            --broken_count;
        }
        line += ',';
        line += std::to_string(broken_count);
        line += ',';
        line += std::to_string(attempts);
        line += '\n';
        out << line;
    }
}

}  // namespace collapse
