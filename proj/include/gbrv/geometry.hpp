#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gbrv/model.hpp"

namespace gbrv {

// Axis-aligned box with half-open sides (lo_i, hi_i]. Unbounded sides use
// +-infinity. Empty iff lo_i >= hi_i in some dimension.
struct HyperRectangle {
    std::vector<double> lo;
    std::vector<double> hi;

    static HyperRectangle unbounded(int d);
    bool empty() const;
    bool contains(std::span<const double> x) const;
};

// Every node of `tree` paired with the box of points that can traverse it.
struct AnnotatedTree {
    std::vector<HyperRectangle> boxes;  // indexed like tree.nodes
};

AnnotatedTree annotate(const Tree& tree, int dimensionality);

// Minimal signed movement of x into the half-open interval (lo, hi].
// Zero when x is already inside; entering from the left lands the coordinate
// on the smallest representable value strictly above lo.
double interval_delta(double x, double lo, double hi);

// Minimal perturbation pushing x into H, one component per dimension.
// Throws InputError when H is empty.
std::vector<double> leaf_distance(std::span<const double> x, const HyperRectangle& box);

struct FeatureDelta {
    int feature = -1;
    double delta = 0.0;
};

struct ReachableLeaf {
    int leaf = -1;       // node index within the tree
    double score = 0.0;
    double cost = 0.0;       // ||delta||_p
    double cost_pow = 0.0;   // sum |delta_i|^p for finite p; nonzero count for
                             // L0; equals `cost` for L-infinity
    std::vector<FeatureDelta> delta;  // nonzero components, sorted by feature
};

// Leaves of `tree` whose minimal perturbation fits the attacker budget,
// in increasing leaf-index order. Dead leaves (empty boxes) are skipped.
// Costs accumulate along the traversal; no per-leaf box is materialized.
std::vector<ReachableLeaf> reachable_leaves(const Tree& tree, std::span<const double> x,
                                            const AttackerSpec& attacker);

struct SpreadWitness {
    int tree_a = -1;
    int tree_b = -1;
    int feature = -1;
    double threshold_a = 0.0;
    double threshold_b = 0.0;
};

struct SpreadReport {
    double psi = 0.0;  // +infinity when no comparable cross-tree pair exists
    std::optional<SpreadWitness> witness;
    NormOrder norm;
    double budget = 0.0;
    bool large_spread = false;  // psi > 2 * budget
};

// Minimum |v - v'| over thresholds on the same feature in two different
// trees. For p = 0 the gap degenerates to an indicator: psi is 1 when some
// feature is split in two different trees and +infinity otherwise.
SpreadReport p_spread(const Ensemble& model, NormOrder norm);

bool check_large_spread(const Ensemble& model, const AttackerSpec& attacker);

// Throws SpreadError naming the witnessing threshold pair when the model is
// not large-spread for the attacker.
void require_large_spread(const Ensemble& model, const AttackerSpec& attacker);

// Norm helpers shared by solver/oracle so feasibility comparisons agree
// bit-for-bit across routes. For finite p, feasibility is evaluated in the
// p-th-power domain: sum |delta|^p <= budget^p.
double norm_pow(std::span<const double> delta, NormOrder norm);
double norm_value(std::span<const double> delta, NormOrder norm);
double budget_pow(const AttackerSpec& attacker);

}  // namespace gbrv
