#pragma once

#include <cstdint>
#include <vector>

#include "collapse/process.hpp"

namespace collapse {

// Closed forms for p = 1: zeta is the first time after the first jump at
// which the particle jumps again or the broken bond is repaired.
struct ZetaForms {
    double e_zeta_minus_sigma = 0.0;  // 1 / (lambda + mu)
    double e_zeta = 0.0;              // 1/lambda + 1/(lambda + mu)
    double e_x_zeta_sq = 0.0;         // (mu + 4 lambda) / (lambda + mu)
    double gap = 0.0;                 // e_x_zeta_sq - lambda * e_zeta = 2 lambda/(lambda+mu)
};

ZetaForms zeta_closed_forms(double lambda, double mu);

// Exact lower contribution plus the probability mass not yet absorbed.
// absorbed_value is nondecreasing and residual_mass nonincreasing in depth.
struct Enclosure {
    double absorbed_value = 0.0;
    double absorbed_mass = 0.0;
    double residual_mass = 1.0;
    int depth = 0;
};

struct CycleEnumeration {
    Enclosure alpha;  // E(tau_1): holding-time mass accumulated while alive
    Enclosure x2;     // E(X(tau_1)^2): displacement^2 weighted by absorbed paths
    std::size_t states_expanded = 0;
    double pruned_mass = 0.0;  // mass dropped below prune_threshold (counted residual)
};

// Exhaustive expansion of one regeneration cycle's embedded jump chain as a
// level-per-event weighted DAG over (displacement, broken offsets) states,
// merged by memoization. From a state with k broken bonds and total rate
// R = lambda + k mu, the branches are a jump attempt (weight lambda/R, split
// over intact directions and the break coin) and each single-bond repair
// (weight mu/R). Every visited state adds mass/R to the E(tau_1) accumulator;
// a repair that empties the broken set absorbs the path and adds
// mass * displacement^2 to the E(X^2) accumulator.
//
// 1D only. Expansion stops at `depth` events or once the unabsorbed mass
// falls below mass_tol. States whose mass drops below prune_threshold are
// dropped into pruned_mass (still counted as residual, never absorbed).
CycleEnumeration enumerate_cycle(const ModelParams& params, int depth, double mass_tol,
                                 double prune_threshold = 0.0);

}  // namespace collapse
