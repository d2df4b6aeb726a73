#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gbrv/model.hpp"
#include "gbrv/verifier.hpp"

namespace gbrv {

struct OracleOptions {
    std::size_t max_tuples = 1'000'000;  // enumeration budget, throws when hit
    double timeout_ms = 0.0;             // 0 disables; overruns report Unknown
};

struct OracleOutcome {
    Verdict verdict = Verdict::Unknown;
    std::optional<std::vector<double>> witness;  // successful perturbation
    std::size_t tuples_visited = 0;
};

// Ground-truth robustness by exhaustive enumeration of one-leaf-per-tree
// tuples over hyper-rectangle intersections. Works for arbitrary ensembles,
// large-spread or not. Prunes empty intersections and over-budget prefixes;
// throws ResourceError when the enumeration budget is exceeded.
OracleOutcome oracle_verify(const Ensemble& model, std::span<const double> x, Label y,
                            const AttackerSpec& attacker, const OracleOptions& options = {});

// Subset-sum instance: positive integers and a positive target.
struct SspInstance {
    std::vector<std::int64_t> values;
    std::int64_t target = 0;

    std::size_t size() const { return values.size(); }
    double zeta() const { return 1.0 / static_cast<double>(values.size() + 1); }
    void validate() const;  // throws InputError
};

// A verification problem whose robustness verdict encodes the subset-sum
// answer: the model is NOT robust on `instance` iff some subset of the
// values sums exactly to the target.
struct Gadget {
    Ensemble model;
    Instance instance;
    AttackerSpec attacker;
    Label label = -1;
};

// Stump-per-value gadget for finite p >= 1. For p == 1 each stump splits
// feature i at value s_i with attack gain s_i, budget and decision threshold
// equal to the target. For p > 1 thresholds and budget move to the 1/p power
// so that p-th-power attack costs stay aligned with the integer values, and
// the instance coordinate shrinks enough to keep the rounding slack below
// the integer separation.
Gadget ssp_gadget(const SspInstance& instance, int p);

// Right-chain gadget for the L0 attacker: value s_i becomes a chain of s_i
// fresh features; reaching its scoring leaf costs exactly s_i coordinates.
Gadget ssp_gadget_l0(const SspInstance& instance, std::size_t feature_cap = 100'000);

// 2^m enumeration; true iff some subset sums exactly to the target.
bool ssp_solve_bruteforce(const SspInstance& instance);

}  // namespace gbrv
