#pragma once

#include <cstdint>

#include "gbrv/model.hpp"

namespace gbrv {

// Seeded generator of random ensembles that satisfy the large-spread
// condition for the requested attacker by construction: per feature,
// thresholds live in per-tree clusters spaced more than 2 * budget apart
// (p >= 1 and infinity), or features are partitioned across trees (p = 0).
// Leaf scores land on a dyadic grid so score sums are exact in doubles.
//
// When `grid > 0`, thresholds and generated instances snap to multiples of
// `grid`; with a budget placed between grid multiples this keeps the scaled
// Lp knapsack weights integral (exact solver mode).
struct RandomModelSpec {
    int trees = 4;
    int max_depth = 3;
    int dimensionality = 6;
    NormOrder norm{NormOrder::kInf};
    double budget = 0.1;
    double grid = 0.0;
    double leaf_probability = 0.3;  // chance an inner slot becomes a leaf early
    std::uint64_t seed = 1;
};

Ensemble random_large_spread_ensemble(const RandomModelSpec& spec);

// Instance with coordinates placed near the model's thresholds (within a few
// budgets) so reachable-leaf sets are non-trivial. Snaps to the grid when the
// spec uses one.
std::vector<double> random_instance(const RandomModelSpec& spec, const Ensemble& model,
                                    std::uint64_t salt);

}  // namespace gbrv
