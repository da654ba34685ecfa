#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "collapse/process.hpp"

using namespace collapse;

namespace {

Bond bond_1d(std::int64_t site) {
    Bond b;
    b.site = {site};
    b.axis = 0;
    return b;
}

WalkerState state_1d_with_broken(std::initializer_list<std::int64_t> sites) {
    WalkerState st(1);
    for (auto s : sites) {
        st.broken.push_back(bond_1d(s));
    }
    return st;
}

}  // namespace

TEST_CASE("total_event_rate is lambda + mu * broken") {
    ModelParams params;
    params.lambda = 1.0;
    params.mu = 2.0;
    WalkerState st(1);
    CHECK(total_event_rate(st, params) == doctest::Approx(1.0));
    st = state_1d_with_broken({0, 3, -5});
    CHECK(total_event_rate(st, params) == doctest::Approx(7.0));
    params.lambda = 0.5;
    params.mu = 0.25;
    st = state_1d_with_broken({2});
    CHECK(total_event_rate(st, params) == doctest::Approx(0.75));
}

TEST_CASE("parameter validation names the violated bound") {
    ModelParams params;
    params.p = 1.5;
    CHECK_THROWS_WITH_AS(params.validate(), "p must satisfy 0 <= p <= 1 (got 1.5)",
                         ConfigError);
    params = ModelParams{};
    params.lambda = 0.0;
    CHECK_THROWS_AS(params.validate(), ConfigError);
    params = ModelParams{};
    params.mu = -1.0;
    CHECK_THROWS_AS(params.validate(), ConfigError);
    params = ModelParams{};
    params.dim = 0;
    CHECK_THROWS_AS(params.validate(), ConfigError);
}

TEST_CASE("attempt with both incident bonds broken is blocked") {
    ModelParams params;
    params.lambda = 1.0;
    params.p = 0.5;
    params.mu = 1e-12;  // repairs essentially never fire
    Walker walker(params, Rng(99), state_1d_with_broken({-1, 0}));
    const Event& ev = walker.step();
    CHECK(ev.kind == EventKind::JumpBlocked);
    CHECK(walker.state().position[0] == 0);
    CHECK(walker.state().attempts == 1);
    CHECK(walker.state().broken.size() == 2);
}

TEST_CASE("attempt with one broken bond is forced over the other") {
    ModelParams params;
    params.lambda = 1.0;
    params.p = 0.0;
    params.mu = 1e-12;
    for (std::uint64_t seed = 0; seed < 32; ++seed) {
        Walker walker(params, Rng(seed), state_1d_with_broken({-1}));  // left bond broken
        const Event& ev = walker.step();
        REQUIRE(ev.kind == EventKind::JumpSuccess);
        CHECK(ev.sign == +1);
        CHECK(walker.state().position[0] == 1);
    }
}

TEST_CASE("p=1 first attempt moves one step and breaks the traversed bond") {
    ModelParams params;
    params.lambda = 1.0;
    params.p = 1.0;
    params.mu = 10.0;
    int plus = 0;
    const int n = 400;
    for (int seed = 0; seed < n; ++seed) {
        Walker walker(params, Rng(static_cast<std::uint64_t>(seed)));
        const Event& ev = walker.step();
        REQUIRE(ev.kind == EventKind::JumpSuccess);
        REQUIRE(ev.broke);
        const auto x = walker.state().position[0];
        REQUIRE(std::abs(x) == 1);
        REQUIRE(walker.state().broken.size() == 1);
        // canonical form: the traversed edge named by its smaller endpoint
        CHECK(walker.state().broken[0].site[0] == (x > 0 ? 0 : -1));
        if (x > 0) {
            ++plus;
        }
    }
    // fair direction coin: binomial(400, 1/2), 5 sigma band
    CHECK(std::abs(plus - n / 2) < 5.0 * std::sqrt(n / 4.0));
}

TEST_CASE("horizon 0 gives an empty trajectory") {
    ModelParams params;
    const auto traj = simulate(params, 1, StopCondition::until_time(0.0));
    CHECK(traj.events.empty());
    CHECK(traj.final_state.clock == doctest::Approx(0.0));
    CHECK(traj.final_state.position[0] == 0);
}

TEST_CASE("p=0 trajectories never break or repair") {
    ModelParams params;
    params.p = 0.0;
    const auto traj = simulate(params, 7, StopCondition::until_time(50.0));
    CHECK(!traj.events.empty());
    for (const auto& ev : traj.events) {
        CHECK(ev.kind == EventKind::JumpSuccess);
        CHECK(!ev.broke);
    }
    CHECK(traj.final_state.broken.empty());
}

TEST_CASE("replay determinism: same params and seed, same event list") {
    ModelParams params;
    params.lambda = 1.0;
    params.p = 1.0;
    params.mu = 10.0;
    const auto a = simulate(params, 20240601, StopCondition::until_time(1000.0));
    const auto b = simulate(params, 20240601, StopCondition::until_time(1000.0));
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].time == b.events[i].time);
        CHECK(a.events[i].kind == b.events[i].kind);
        CHECK(a.events[i].sign == b.events[i].sign);
        CHECK(a.events[i].broke == b.events[i].broke);
    }
    CHECK(a.final_state.position == b.final_state.position);
}

TEST_CASE("sample_positions is right-continuous and matches the event log") {
    ModelParams params;
    params.lambda = 1.0;
    params.p = 0.5;
    params.mu = 1.0;
    const auto traj = simulate(params, 3, StopCondition::until_time(10.0));

    CHECK(sample_positions(traj, {0.0})[0][0] == 0);

    // exactly at a jump event: the post-jump position counts
    for (const auto& ev : traj.events) {
        if (ev.kind == EventKind::JumpSuccess) {
            const auto at = sample_positions(traj, {ev.time});
            std::int64_t expect = 0;
            for (const auto& e2 : traj.events) {
                if (e2.time <= ev.time && e2.kind == EventKind::JumpSuccess) {
                    expect += e2.sign;
                }
            }
            CHECK(at[0][0] == expect);
            break;
        }
    }

    // dense grid against an independent reconstruction of the path
    std::vector<double> grid;
    for (double t = 0.0; t <= 10.0; t += 0.1) {
        grid.push_back(t);
    }
    const auto sampled = sample_positions(traj, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::int64_t pos = 0;
        for (const auto& ev : traj.events) {
            if (ev.time <= grid[i] && ev.kind == EventKind::JumpSuccess) {
                pos += ev.sign;
            }
        }
        CHECK(sampled[i][0] == pos);
    }

    CHECK_THROWS_AS(sample_positions(traj, {11.0}), std::out_of_range);
}

TEST_CASE("event-log invariants hold along simulated paths") {
    for (int dim : {1, 2}) {
        ModelParams params;
        params.lambda = 1.0;
        params.p = 0.7;
        params.mu = 2.0;
        params.dim = dim;
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            const auto traj = simulate(params, seed, StopCondition::event_count(2000));
            // independent replay of the broken set from the event log
            std::set<std::pair<std::vector<std::int64_t>, std::int32_t>> broken;
            std::uint64_t attempts = 0;
            std::int64_t l1 = 0;
            double prev_time = 0.0;
            for (const auto& ev : traj.events) {
                REQUIRE(ev.time > prev_time);  // strictly increasing event times
                prev_time = ev.time;
                const std::size_t before = broken.size();
                if (ev.kind == EventKind::Repair) {
                    auto key = std::make_pair(ev.bond.site, ev.bond.axis);
                    REQUIRE(broken.count(key) == 1);  // repaired bond was broken
                    broken.erase(key);
                } else {
                    ++attempts;
                    if (ev.kind == EventKind::JumpSuccess) {
                        auto key = std::make_pair(ev.bond.site, ev.bond.axis);
                        REQUIRE(broken.count(key) == 0);  // never traverse a broken bond
                        l1 += 1;
                        if (ev.broke) {
                            broken.insert(key);
                        }
                    }
                }
                const std::size_t after = broken.size();
                REQUIRE(std::abs(static_cast<std::int64_t>(after) -
                                 static_cast<std::int64_t>(before)) <= 1);
            }
            // |X(t)| <= N(t) at the end (holds at every prefix since each jump
            // adds one attempt and at most one unit of displacement)
            std::int64_t final_l1 = 0;
            for (auto c : traj.final_state.position) {
                final_l1 += std::abs(c);
            }
            CHECK(final_l1 <= static_cast<std::int64_t>(traj.final_state.attempts));
            CHECK(traj.final_state.attempts == attempts);
        }
    }
}

TEST_CASE("holding times at fixed broken count have mean 1/(lambda + k mu)") {
    ModelParams params;
    params.lambda = 1.0;
    params.p = 0.5;
    params.mu = 2.0;
    const int k = 3;
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        // broken bonds far from the walker so only the total rate matters
        Walker walker(params, make_stream(555, static_cast<std::uint64_t>(i)),
                      state_1d_with_broken({100, 200, 300}));
        sum += walker.peek_dt();
    }
    const double mean = sum / n;
    const double expect = 1.0 / (params.lambda + k * params.mu);
    const double se = expect / std::sqrt(double(n));  // exponential: sd == mean
    CHECK(std::abs(mean - expect) < 4.0 * se);
}

TEST_CASE("event cap fires as a truncation error") {
    ModelParams params;
    CHECK_THROWS_AS(simulate(params, 1, StopCondition::until_time(1e9, 100)),
                    TruncationError);
    // event-count stop is not an error
    const auto traj = simulate(params, 1, StopCondition::event_count(100));
    CHECK(traj.events.size() == 100);
}

TEST_CASE("trajectory csv has the documented header and one row per event") {
    ModelParams params;
    params.p = 0.5;
    const auto traj = simulate(params, 2, StopCondition::event_count(50));
    std::ostringstream out;
    write_trajectory_csv(traj, out);
    const std::string text = out.str();
    CHECK(text.rfind("event_index,time,kind,dx0,bond_site,bond_axis,broken_count,attempts\n",
                     0) == 0);
    std::size_t lines = 0;
    for (char c : text) {
        if (c == '\n') {
            ++lines;
        }
    }
    CHECK(lines == 51);
}
