#include "collapse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "collapse/stats.hpp"

namespace collapse {

ZetaForms zeta_closed_forms(double lambda, double mu) {
    if (!(lambda > 0.0) || !(mu > 0.0)) {
        throw ConfigError("zeta closed forms require lambda > 0 and mu > 0");
    }
    ZetaForms f;
    f.e_zeta_minus_sigma = 1.0 / (lambda + mu);
    f.e_zeta = 1.0 / lambda + 1.0 / (lambda + mu);
    f.e_x_zeta_sq = (mu + 4.0 * lambda) / (lambda + mu);
    f.gap = 2.0 * lambda / (lambda + mu);
    return f;
}

namespace {

// Chain state: walker displacement plus the sorted offsets of broken bonds
// (offset o names the edge {o, o+1} relative to the cycle's start site).
// An empty offset set means the pre-first-break phase; absorption (empty set
// after a break) terminates a path and is never stored.
struct OracleState {
    std::int32_t disp = 0;
    std::vector<std::int32_t> offsets;

    friend bool operator==(const OracleState&, const OracleState&) = default;
};

struct OracleStateHash {
    std::size_t operator()(const OracleState& s) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(
                                                      static_cast<std::uint32_t>(s.disp));
        for (std::int32_t o : s.offsets) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(o)) +
                 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

using Level = std::unordered_map<OracleState, double, OracleStateHash>;

bool contains(const std::vector<std::int32_t>& offsets, std::int32_t o) {
    return std::binary_search(offsets.begin(), offsets.end(), o);
}

std::vector<std::int32_t> with_offset(const std::vector<std::int32_t>& offsets,
                                      std::int32_t o) {
    std::vector<std::int32_t> out;
    out.reserve(offsets.size() + 1);
    auto it = std::lower_bound(offsets.begin(), offsets.end(), o);
    out.insert(out.end(), offsets.begin(), it);
    out.push_back(o);
    out.insert(out.end(), it, offsets.end());
    return out;
}

std::vector<std::int32_t> without_index(const std::vector<std::int32_t>& offsets,
                                        std::size_t idx) {
    std::vector<std::int32_t> out;
    out.reserve(offsets.size() - 1);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (i != idx) {
            out.push_back(offsets[i]);
        }
    }
    return out;
}

}  // namespace

CycleEnumeration enumerate_cycle(const ModelParams& params, int depth, double mass_tol,
                                 double prune_threshold) {
    params.validate();
    if (params.dim != 1) {
        throw ConfigError("cycle enumeration is restricted to dim = 1");
    }
    if (params.p == 0.0) {
        throw ConfigError("cycle enumeration requires p > 0");
    }
    if (depth < 2) {
        throw ConfigError("enumeration depth must be >= 2");
    }
    const double lambda = params.lambda;
    const double mu = params.mu;
    const double p = params.p;

    CycleEnumeration result;
    std::vector<double> alpha_contribs;  // one per level
    std::vector<double> x2_contribs;     // one per level (absorption slices)
    std::vector<double> mass_contribs;   // absorbed mass per level

    Level current;
    current.emplace(OracleState{}, 1.0);

    int level = 0;
    double frontier_mass = 1.0;
    for (; level < depth && !current.empty(); ++level) {
        if (frontier_mass < mass_tol) {
            break;
        }
        double alpha_level = 0.0;
        double x2_level = 0.0;
        double absorbed_level = 0.0;
        Level next;
        next.reserve(current.size() * 2);

        for (const auto& [state, mass] : current) {
            const auto k = static_cast<double>(state.offsets.size());
            const double total_rate = lambda + mu * k;
            alpha_level += mass / total_rate;

            const double w_attempt = lambda / total_rate;
            const bool left_intact = !contains(state.offsets, state.disp - 1);
            const bool right_intact = !contains(state.offsets, state.disp);
            if (!left_intact && !right_intact) {
                next[state] += mass * w_attempt;  // blocked attempt, self branch
            } else {
                const double per_dir =
                    (left_intact && right_intact) ? w_attempt * 0.5 : w_attempt;
                for (int sign : {-1, +1}) {
                    if ((sign < 0 && !left_intact) || (sign > 0 && !right_intact)) {
                        continue;
                    }
                    OracleState moved;
                    moved.disp = state.disp + sign;
                    const std::int32_t traversed =
                        (sign > 0) ? state.disp : state.disp - 1;
                    if (p < 1.0) {
                        moved.offsets = state.offsets;
                        next[moved] += mass * per_dir * (1.0 - p);
                    }
                    if (p > 0.0) {
                        moved.offsets = with_offset(state.offsets, traversed);
                        next[std::move(moved)] += mass * per_dir * p;
                    }
                }
            }

            const double w_repair = (k > 0.0) ? mu / total_rate : 0.0;
            for (std::size_t i = 0; i < state.offsets.size(); ++i) {
                const double m = mass * w_repair;
                if (state.offsets.size() == 1) {
                    // repair empties the broken set: absorption
                    absorbed_level += m;
                    x2_level += m * double(state.disp) * double(state.disp);
                } else {
                    OracleState repaired;
                    repaired.disp = state.disp;
                    repaired.offsets = without_index(state.offsets, i);
                    next[std::move(repaired)] += m;
                }
            }
        }

        alpha_contribs.push_back(alpha_level);
        x2_contribs.push_back(x2_level);
        mass_contribs.push_back(absorbed_level);
        result.states_expanded += current.size();

        if (prune_threshold > 0.0) {
            for (auto it = next.begin(); it != next.end();) {
                if (it->second < prune_threshold) {
                    result.pruned_mass += it->second;
                    it = next.erase(it);
                } else {
                    ++it;
                }
            }
        }

        frontier_mass = 0.0;
        for (const auto& [state, mass] : next) {
            frontier_mass += mass;
        }
        current = std::move(next);
    }

    result.alpha.absorbed_value = stats::sorted_sum(alpha_contribs);
    result.alpha.absorbed_mass = stats::sorted_sum(mass_contribs);
    result.alpha.residual_mass = frontier_mass + result.pruned_mass;
    result.alpha.depth = level;

    result.x2.absorbed_value = stats::sorted_sum(std::move(x2_contribs));
    result.x2.absorbed_mass = result.alpha.absorbed_mass;
    result.x2.residual_mass = result.alpha.residual_mass;
    result.x2.depth = level;
    return result;
}

}  // namespace collapse
