#include "gbrv/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "gbrv/errors.hpp"
#include "gbrv/geometry.hpp"

namespace gbrv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One leaf of one tree with its box reduced to the constrained dimensions.
struct SparseLeaf {
    double score = 0.0;
    std::vector<int> features;
    std::vector<double> lo;
    std::vector<double> hi;
};

struct TimeoutSignal {};

struct TupleWalker {
    const Ensemble& model;
    std::span<const double> x;
    const AttackerSpec& attacker;
    const OracleOptions& options;
    std::vector<std::vector<SparseLeaf>> leaves;  // per tree

    std::vector<double> lo, hi, contrib;
    double budget_exact;
    double budget_slack;
    std::size_t visited = 0;
    std::chrono::steady_clock::time_point deadline_start;
    std::optional<std::vector<double>> witness;

    TupleWalker(const Ensemble& m, std::span<const double> xx, const AttackerSpec& a,
                const OracleOptions& opt)
        : model(m), x(xx), attacker(a), options(opt) {
        budget_exact = budget_pow(a);
        budget_slack = attacker.norm.is_finite() ? budget_exact * (1.0 + 1e-9) : budget_exact;
        lo.assign(x.size(), -kInf);
        hi.assign(x.size(), kInf);
        contrib.assign(x.size(), 0.0);
        deadline_start = std::chrono::steady_clock::now();
        for (const Tree& tree : m.trees) {
            AnnotatedTree annotated = annotate(tree, m.dimensionality);
            std::vector<SparseLeaf> tree_leaves;
            for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                if (!tree.nodes[i].is_leaf()) continue;
                const HyperRectangle& box = annotated.boxes[i];
                if (box.empty()) continue;
                SparseLeaf leaf;
                leaf.score = tree.nodes[i].score;
                for (int f = 0; f < m.dimensionality; ++f)
                    if (box.lo[f] != -kInf || box.hi[f] != kInf) {
                        leaf.features.push_back(f);
                        leaf.lo.push_back(box.lo[f]);
                        leaf.hi.push_back(box.hi[f]);
                    }
                tree_leaves.push_back(std::move(leaf));
            }
            leaves.push_back(std::move(tree_leaves));
        }
    }

    double update_aggregate(double agg, double old_d, double new_d) const {
        if (attacker.norm.is_inf()) return std::max(agg, std::fabs(new_d));
        if (attacker.norm.is_zero()) return agg - (old_d != 0.0) + (new_d != 0.0);
        return agg - pow_int(old_d, attacker.norm.p) + pow_int(new_d, attacker.norm.p);
    }

    void tick() {
        if (++visited > options.max_tuples)
            throw ResourceError("oracle tuple cap of " + std::to_string(options.max_tuples) +
                                " exceeded");
        if (options.timeout_ms > 0.0 && (visited & 1023u) == 0) {
            double elapsed = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - deadline_start)
                                 .count();
            if (elapsed > options.timeout_ms) throw TimeoutSignal{};
        }
    }

    struct Undo {
        int feature;
        double lo, hi, contrib;
    };
    std::vector<Undo> undo_stack;

    // Returns true once a successful attack has been found.
    bool descend(std::size_t tree_index, double agg, double score_sum) {
        if (tree_index == leaves.size()) return finish(score_sum);
        for (const SparseLeaf& leaf : leaves[tree_index]) {
            tick();
            // Intersect the running box with this leaf's constraints,
            // keeping enough undo state to restore on backtrack.
            const std::size_t mark = undo_stack.size();
            bool empty = false;
            double next_agg = agg;
            for (std::size_t j = 0; j < leaf.features.size(); ++j) {
                int f = leaf.features[j];
                undo_stack.push_back({f, lo[f], hi[f], contrib[f]});
                lo[f] = std::max(lo[f], leaf.lo[j]);
                hi[f] = std::min(hi[f], leaf.hi[j]);
                if (!(lo[f] < hi[f])) {
                    empty = true;
                    break;
                }
                double d = interval_delta(x[f], lo[f], hi[f]);
                next_agg = update_aggregate(next_agg, contrib[f], d);
                contrib[f] = d;
            }
            bool found = false;
            if (!empty && !(next_agg > budget_slack))
                found = descend(tree_index + 1, next_agg, score_sum + leaf.score);
            while (undo_stack.size() > mark) {
                const Undo& u = undo_stack.back();
                lo[u.feature] = u.lo;
                hi[u.feature] = u.hi;
                contrib[u.feature] = u.contrib;
                undo_stack.pop_back();
            }
            if (found) return true;
        }
        return false;
    }

    bool finish(double score_sum) {
        Label flipped = apply_link(model.link, model.base_score + score_sum) >= model.tau
                            ? +1
                            : -1;
        // Only tuples that change the (correct) prediction matter.
        if (flipped == attacker_label) return false;
        std::vector<double> delta(x.size(), 0.0);
        for (std::size_t f = 0; f < x.size(); ++f) delta[f] = contrib[f];
        if (norm_pow(delta, attacker.norm) > budget_exact) return false;
        std::vector<double> attacked(x.begin(), x.end());
        for (std::size_t f = 0; f < x.size(); ++f) attacked[f] += delta[f];
        // End-to-end confirmation through the real predictor.
        if (classify(model, attacked) == attacker_label) return false;
        witness = std::move(delta);
        return true;
    }

    Label attacker_label = 0;
};

}  // namespace

OracleOutcome oracle_verify(const Ensemble& model, std::span<const double> x, Label y,
                            const AttackerSpec& attacker, const OracleOptions& options) {
    attacker.validate();
    OracleOutcome outcome;
    if (classify(model, x) != y) {
        outcome.verdict = Verdict::Misclassified;
        outcome.witness = std::vector<double>(x.size(), 0.0);
        return outcome;
    }
    TupleWalker walker(model, x, attacker, options);
    walker.attacker_label = y;
    try {
        bool attacked = walker.descend(0, 0.0, 0.0);
        outcome.verdict = attacked ? Verdict::NotRobust : Verdict::Robust;
        outcome.witness = std::move(walker.witness);
    } catch (const TimeoutSignal&) {
        outcome.verdict = Verdict::Unknown;
    }
    outcome.tuples_visited = walker.visited;
    return outcome;
}

void SspInstance::validate() const {
    for (std::int64_t v : values)
        if (v < 1) throw InputError("subset-sum values must be positive integers");
    if (target < 1) throw InputError("subset-sum target must be a positive integer");
}

Gadget ssp_gadget(const SspInstance& instance, int p) {
    instance.validate();
    if (p < 1) throw InputError("ssp_gadget requires finite p >= 1");
    if (instance.values.empty()) throw InputError("ssp_gadget requires at least one value");
    const std::size_t m = instance.size();

    double zeta = instance.zeta();
    if (p > 1) {
        std::int64_t max_value = *std::max_element(instance.values.begin(), instance.values.end());
        zeta = 1.0 / (static_cast<double>(m + 1) * 2.0 * p * static_cast<double>(max_value));
    }

    Gadget gadget;
    gadget.model.dimensionality = static_cast<int>(m);
    gadget.model.link = Link::Identity;
    gadget.model.tau = static_cast<double>(instance.target);
    for (std::size_t i = 0; i < m; ++i) {
        double s = static_cast<double>(instance.values[i]);
        double threshold = p == 1 ? s : std::pow(s, 1.0 / p);
        Tree stump;
        stump.nodes.resize(3);
        stump.nodes[0] = Node{static_cast<int>(i), threshold, 1, 2, 0.0};
        stump.nodes[1] = Node{-1, 0.0, -1, -1, 0.0};
        stump.nodes[2] = Node{-1, 0.0, -1, -1, s};
        gadget.model.trees.push_back(std::move(stump));
    }
    gadget.model.validate();
    gadget.instance.values.assign(m, zeta);
    double g = static_cast<double>(instance.target);
    gadget.attacker = AttackerSpec{NormOrder{p}, p == 1 ? g : std::pow(g, 1.0 / p), 6};
    gadget.label = -1;
    return gadget;
}

Gadget ssp_gadget_l0(const SspInstance& instance, std::size_t feature_cap) {
    instance.validate();
    if (instance.values.empty()) throw InputError("ssp_gadget_l0 requires at least one value");
    std::size_t total_features = 0;
    for (std::int64_t v : instance.values) total_features += static_cast<std::size_t>(v);
    if (total_features > feature_cap)
        throw ResourceError("L0 gadget needs " + std::to_string(total_features) +
                            " features, above the cap of " + std::to_string(feature_cap));

    Gadget gadget;
    gadget.model.dimensionality = static_cast<int>(total_features);
    gadget.model.link = Link::Identity;
    gadget.model.tau = static_cast<double>(instance.target);
    int next_feature = 0;
    for (std::int64_t value : instance.values) {
        // Right chain over `value` fresh features; only the terminal leaf
        // scores, so attacking the tree costs exactly `value` coordinates.
        Tree chain;
        int depth = static_cast<int>(value);
        chain.nodes.reserve(2 * depth + 1);
        for (int level = 0; level < depth; ++level) {
            int base = 2 * level;
            chain.nodes.push_back(Node{next_feature++, 1.0, base + 1, base + 2, 0.0});
            chain.nodes.push_back(Node{-1, 0.0, -1, -1, 0.0});
        }
        chain.nodes.push_back(Node{-1, 0.0, -1, -1, static_cast<double>(value)});
        gadget.model.trees.push_back(std::move(chain));
    }
    gadget.model.validate();
    gadget.instance.values.assign(total_features, instance.zeta());
    gadget.attacker = AttackerSpec{NormOrder{0}, static_cast<double>(instance.target), 6};
    gadget.label = -1;
    return gadget;
}

bool ssp_solve_bruteforce(const SspInstance& instance) {
    instance.validate();
    if (instance.size() > 20)
        throw ResourceError("brute-force subset sum limited to 20 values");
    const std::size_t m = instance.size();
    for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
        std::int64_t sum = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (1ull << i)) sum += instance.values[i];
        if (sum == instance.target) return true;
    }
    return false;
}

}  // namespace gbrv
