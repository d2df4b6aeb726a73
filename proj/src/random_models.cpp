#include "gbrv/random_models.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gbrv/errors.hpp"
#include "gbrv/rng.hpp"

namespace gbrv {

namespace {

double snap(double value, double grid) {
    return grid > 0.0 ? grid * std::round(value / grid) : value;
}

double dyadic_score(Rng& rng) {
    // Multiples of 2^-16 in [-1, 1]; sums of thousands of them stay exact.
    return static_cast<double>(rng.range(-65536, 65536)) * 0x1.0p-16;
}

// Per-feature threshold allocator. Clusters advance by `spacing` and belong
// to a single tree, so thresholds from different trees are always more than
// 2 * budget apart while a tree may reuse nearby values freely.
struct ThresholdPool {
    double spacing = 0.0;
    double window = 0.0;
    double grid = 0.0;

    struct FeatureState {
        double frontier = 0.0;
        int cluster_tree = -1;
        double cluster_base = 0.0;
        bool started = false;
    };
    std::vector<FeatureState> features;

    double draw(int feature, int tree, Rng& rng) {
        FeatureState& fs = features[feature];
        bool reuse = fs.started && fs.cluster_tree == tree && rng.chance(0.5);
        if (!reuse) {
            double base = fs.started ? fs.frontier + spacing : rng.uniform(0.0, spacing);
            if (grid > 0.0) base = grid * std::ceil(base / grid);
            fs.cluster_base = base;
            fs.frontier = base + window;
            fs.cluster_tree = tree;
            fs.started = true;
        }
        if (grid > 0.0) {
            int steps = std::max(1, static_cast<int>(window / grid));
            return fs.cluster_base + grid * static_cast<double>(rng.range(0, steps - 1));
        }
        return fs.cluster_base + rng.uniform(0.0, window);
    }
};

struct TreeBuilder {
    const RandomModelSpec& spec;
    ThresholdPool& pool;
    Rng& rng;
    int tree_index;
    const std::vector<int>& allowed_features;  // for p = 0 partitioning
    Tree tree;

    int build(int depth) {
        int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        bool leaf = depth >= spec.max_depth || (depth > 0 && rng.chance(spec.leaf_probability));
        if (leaf) {
            tree.nodes[idx].score = dyadic_score(rng);
            return idx;
        }
        int feature = allowed_features[rng.below(allowed_features.size())];
        double threshold = pool.draw(feature, tree_index, rng);
        int left = build(depth + 1);
        int right = build(depth + 1);
        tree.nodes[idx].feature = feature;
        tree.nodes[idx].threshold = threshold;
        tree.nodes[idx].left = left;
        tree.nodes[idx].right = right;
        return idx;
    }
};

}  // namespace

Ensemble random_large_spread_ensemble(const RandomModelSpec& spec) {
    if (spec.trees < 1 || spec.dimensionality < 1 || spec.max_depth < 1)
        throw InputError("random model spec needs trees, depth, dimensionality >= 1");
    if (spec.norm.is_zero() && spec.trees > spec.dimensionality)
        throw InputError("p = 0 models need at least one feature per tree");

    Rng rng(spec.seed);
    ThresholdPool pool;
    pool.grid = spec.grid;
    // Cross-cluster separation must exceed 2k even after the in-cluster
    // window; grid snapping only rounds bases up, preserving the margin.
    double margin = std::max(2.0 * spec.budget, spec.grid > 0 ? 4.0 * spec.grid : 0.5);
    pool.window = margin;
    pool.spacing = 2.0 * spec.budget + 2.0 * margin;
    pool.features.resize(spec.dimensionality);

    // Feature pools: everything for p >= 1, a partition for p = 0.
    std::vector<int> all_features(spec.dimensionality);
    for (int f = 0; f < spec.dimensionality; ++f) all_features[f] = f;
    std::vector<std::vector<int>> per_tree(spec.trees);
    if (spec.norm.is_zero()) {
        std::vector<int> shuffled = all_features;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        for (std::size_t i = 0; i < shuffled.size(); ++i)
            per_tree[i % spec.trees].push_back(shuffled[i]);
    } else {
        for (auto& pool_f : per_tree) pool_f = all_features;
    }

    Ensemble model;
    model.dimensionality = spec.dimensionality;
    model.link = Link::Identity;
    model.tau = 0.0;
    for (int t = 0; t < spec.trees; ++t) {
        TreeBuilder builder{spec, pool, rng, t, per_tree[t], Tree{}};
        builder.build(0);
        model.trees.push_back(std::move(builder.tree));
    }
    model.validate();
    return model;
}

std::vector<double> random_instance(const RandomModelSpec& spec, const Ensemble& model,
                                    std::uint64_t salt) {
    Rng rng(spec.seed * 0x9e3779b97f4a7c15ULL + salt * 2654435761ULL + 17);
    // Collect the model's thresholds per feature.
    std::vector<std::vector<double>> thresholds(model.dimensionality);
    for (const Tree& tree : model.trees)
        for (const Node& node : tree.nodes)
            if (!node.is_leaf()) thresholds[node.feature].push_back(node.threshold);

    double scale = spec.norm.is_finite() || spec.norm.is_inf()
                       ? std::max(spec.budget, spec.grid > 0 ? spec.grid : 1e-3)
                       : 1.0;
    std::vector<double> x(model.dimensionality);
    for (int f = 0; f < model.dimensionality; ++f) {
        double value;
        if (!thresholds[f].empty() && rng.chance(0.8)) {
            double anchor = thresholds[f][rng.below(thresholds[f].size())];
            value = anchor + rng.uniform(-2.5, 2.5) * scale;
        } else {
            value = rng.uniform(-1.0, 1.0) * 4.0 * scale;
        }
        x[f] = snap(value, spec.grid);
    }
    return x;
}

}  // namespace gbrv
