#include "gbrv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gbrv/errors.hpp"

namespace gbrv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

HyperRectangle HyperRectangle::unbounded(int d) {
    HyperRectangle box;
    box.lo.assign(d, -kInf);
    box.hi.assign(d, kInf);
    return box;
}

bool HyperRectangle::empty() const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) return true;
    return false;
}

bool HyperRectangle::contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(x[i] > lo[i] && x[i] <= hi[i])) return false;
    return true;
}

AnnotatedTree annotate(const Tree& tree, int dimensionality) {
    AnnotatedTree out;
    out.boxes.assign(tree.nodes.size(), HyperRectangle{});
    out.boxes[0] = HyperRectangle::unbounded(dimensionality);
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int idx = stack.back();
        stack.pop_back();
        const Node& node = tree.nodes[idx];
        if (node.is_leaf()) continue;
        const HyperRectangle& box = out.boxes[idx];
        HyperRectangle left = box;
        left.hi[node.feature] = std::min(left.hi[node.feature], node.threshold);
        HyperRectangle right = box;
        right.lo[node.feature] = std::max(right.lo[node.feature], node.threshold);
        out.boxes[node.left] = std::move(left);
        out.boxes[node.right] = std::move(right);
        stack.push_back(node.left);
        stack.push_back(node.right);
    }
    return out;
}

double interval_delta(double x, double lo, double hi) {
    if (x > lo && x <= hi) return 0.0;
    if (x <= lo) {
        // Enter from the left; the attacked coordinate must land strictly
        // above lo, i.e. on nextafter(lo, +inf) once rounding is accounted for.
        double d = std::nextafter(lo, kInf) - x;
        for (int guard = 0; x + d <= lo && guard < 100; ++guard)
            d = std::nextafter(d, kInf);
        return d;
    }
    // x > hi: the upper bound itself belongs to the interval.
    double d = hi - x;
    for (int guard = 0; x + d > hi && guard < 100; ++guard)
        d = std::nextafter(d, -kInf);
    return d;
}

std::vector<double> leaf_distance(std::span<const double> x, const HyperRectangle& box) {
    if (box.empty()) throw InputError("leaf_distance: empty hyper-rectangle");
    std::vector<double> delta(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        delta[i] = interval_delta(x[i], box.lo[i], box.hi[i]);
    return delta;
}

double norm_pow(std::span<const double> delta, NormOrder norm) {
    if (norm.is_inf()) {
        double m = 0.0;
        for (double d : delta) m = std::max(m, std::fabs(d));
        return m;
    }
    if (norm.is_zero()) {
        double count = 0.0;
        for (double d : delta) count += (d != 0.0);
        return count;
    }
    double sum = 0.0;
    for (double d : delta) sum += pow_int(d, norm.p);
    return sum;
}

double norm_value(std::span<const double> delta, NormOrder norm) {
    double pw = norm_pow(delta, norm);
    if (norm.is_inf() || norm.is_zero() || norm.p == 1) return pw;
    return std::pow(pw, 1.0 / norm.p);
}

double budget_pow(const AttackerSpec& attacker) {
    if (attacker.norm.is_finite()) return pow_int(attacker.budget, attacker.norm.p);
    return attacker.budget;
}

namespace {

// DFS state for reachable_leaves. Bounds and per-feature contributions are
// mutated in place with undo on return; the cost aggregate travels by value.
struct ReachWalker {
    const Tree& tree;
    std::span<const double> x;
    const AttackerSpec& attacker;
    double budget_cap;  // budget_pow, slackened for finite p pruning
    std::vector<double> lo, hi;
    std::vector<double> contrib;     // current delta per feature
    std::vector<int> path_features;  // features tightened along the path
    std::vector<ReachableLeaf> out;

    ReachWalker(const Tree& t, std::span<const double> xx, const AttackerSpec& a)
        : tree(t), x(xx), attacker(a) {
        budget_cap = budget_pow(a);
        if (a.norm.is_finite()) budget_cap *= 1.0 + 1e-9;
        lo.assign(x.size(), -kInf);
        hi.assign(x.size(), kInf);
        contrib.assign(x.size(), 0.0);
    }

    double update_aggregate(double agg, double old_d, double new_d) const {
        if (attacker.norm.is_inf()) return std::max(agg, std::fabs(new_d));
        if (attacker.norm.is_zero()) return agg - (old_d != 0.0) + (new_d != 0.0);
        return agg - pow_int(old_d, attacker.norm.p) + pow_int(new_d, attacker.norm.p);
    }

    void visit(int idx, double agg) {
        const Node& node = tree.nodes[idx];
        if (node.is_leaf()) {
            emit(idx, node.score);
            return;
        }
        int f = node.feature;
        // Left: clip the upper bound to the threshold.
        if (lo[f] < std::min(hi[f], node.threshold)) {
            double saved_hi = hi[f], saved_contrib = contrib[f];
            hi[f] = std::min(hi[f], node.threshold);
            double d = interval_delta(x[f], lo[f], hi[f]);
            double next_agg = update_aggregate(agg, saved_contrib, d);
            contrib[f] = d;
            path_features.push_back(f);
            if (!(next_agg > budget_cap)) visit(node.left, next_agg);
            path_features.pop_back();
            hi[f] = saved_hi;
            contrib[f] = saved_contrib;
        }
        // Right: raise the lower bound to the threshold.
        if (std::max(lo[f], node.threshold) < hi[f]) {
            double saved_lo = lo[f], saved_contrib = contrib[f];
            lo[f] = std::max(lo[f], node.threshold);
            double d = interval_delta(x[f], lo[f], hi[f]);
            double next_agg = update_aggregate(agg, saved_contrib, d);
            contrib[f] = d;
            path_features.push_back(f);
            if (!(next_agg > budget_cap)) visit(node.right, next_agg);
            path_features.pop_back();
            lo[f] = saved_lo;
            contrib[f] = saved_contrib;
        }
    }

    void emit(int leaf_idx, double score) {
        ReachableLeaf leaf;
        leaf.leaf = leaf_idx;
        leaf.score = score;
        std::vector<int> feats(path_features);
        std::sort(feats.begin(), feats.end());
        feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
        for (int f : feats)
            if (contrib[f] != 0.0) leaf.delta.push_back({f, contrib[f]});
        // Recompute the cost from the sparse delta in feature order so the
        // stored value is identical to an independent per-leaf evaluation.
        if (attacker.norm.is_inf()) {
            double m = 0.0;
            for (const FeatureDelta& fd : leaf.delta) m = std::max(m, std::fabs(fd.delta));
            leaf.cost_pow = m;
            leaf.cost = m;
        } else if (attacker.norm.is_zero()) {
            leaf.cost_pow = static_cast<double>(leaf.delta.size());
            leaf.cost = leaf.cost_pow;
        } else {
            double sum = 0.0;
            for (const FeatureDelta& fd : leaf.delta) sum += pow_int(fd.delta, attacker.norm.p);
            leaf.cost_pow = sum;
            leaf.cost = attacker.norm.p == 1 ? sum : std::pow(sum, 1.0 / attacker.norm.p);
        }
        if (leaf.cost_pow <= budget_pow(attacker)) out.push_back(std::move(leaf));
    }
};

}  // namespace

std::vector<ReachableLeaf> reachable_leaves(const Tree& tree, std::span<const double> x,
                                            const AttackerSpec& attacker) {
    ReachWalker walker(tree, x, attacker);
    walker.visit(0, 0.0);
    return walker.out;
}

SpreadReport p_spread(const Ensemble& model, NormOrder norm) {
    struct Entry {
        double threshold;
        int tree;
    };
    // Per-feature threshold lists across all trees.
    std::vector<std::vector<Entry>> per_feature(model.dimensionality);
    for (std::size_t t = 0; t < model.trees.size(); ++t)
        for (const Node& node : model.trees[t].nodes)
            if (!node.is_leaf())
                per_feature[node.feature].push_back({node.threshold, static_cast<int>(t)});

    SpreadReport report;
    report.norm = norm;
    report.psi = kInf;
    for (int f = 0; f < model.dimensionality; ++f) {
        auto& entries = per_feature[f];
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return a.threshold < b.threshold || (a.threshold == b.threshold && a.tree < b.tree);
        });
        for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
            // The minimum cross-tree gap is always realized by a sorted-
            // adjacent pair from different trees.
            const Entry& a = entries[i];
            const Entry& b = entries[i + 1];
            if (a.tree == b.tree) continue;
            double gap = b.threshold - a.threshold;
            double value = norm.is_zero() ? 1.0 : gap;
            if (value < report.psi) {
                report.psi = value;
                report.witness =
                    SpreadWitness{a.tree, b.tree, f, a.threshold, b.threshold};
            }
        }
    }
    return report;
}

bool check_large_spread(const Ensemble& model, const AttackerSpec& attacker) {
    SpreadReport report = p_spread(model, attacker.norm);
    return report.psi > 2.0 * attacker.budget;
}

void require_large_spread(const Ensemble& model, const AttackerSpec& attacker) {
    SpreadReport report = p_spread(model, attacker.norm);
    report.budget = attacker.budget;
    report.large_spread = report.psi > 2.0 * attacker.budget;
    if (report.large_spread) return;
    std::string msg = "model is not large-spread for L" + attacker.norm.str() +
                      " budget " + std::to_string(attacker.budget) + ": psi = " +
                      std::to_string(report.psi);
    if (report.witness) {
        const SpreadWitness& w = *report.witness;
        msg += " (feature " + std::to_string(w.feature) + ", trees " +
               std::to_string(w.tree_a) + "/" + std::to_string(w.tree_b) +
               ", thresholds " + std::to_string(w.threshold_a) + "/" +
               std::to_string(w.threshold_b) + ")";
    }
    throw SpreadError(msg);
}

}  // namespace gbrv
