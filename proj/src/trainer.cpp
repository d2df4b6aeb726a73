#include "gbrv/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>

#include "gbrv/errors.hpp"

namespace gbrv {

void TrainConfig::validate() const {
    if (max_trees < 1) throw InputError("max_trees must be >= 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
        throw InputError("learning_rate must be in (0, 1]");
    if (max_leaves < 2) throw InputError("max_leaves must be >= 2");
    if (min_samples_per_leaf < 1) throw InputError("min_samples_per_leaf must be >= 1");
    if (early_stopping_rounds < 1) throw InputError("early_stopping_rounds must be >= 1");
    if (!(lambda_reg >= 0.0)) throw InputError("lambda_reg must be >= 0");
    spread.validate();
}

bool Blacklist::forbidden(int feature, double candidate) const {
    auto it = used_.find(feature);
    if (it == used_.end()) return false;
    if (norm_.is_zero()) return true;
    const std::set<double>& thresholds = it->second;
    auto above = thresholds.lower_bound(candidate);
    if (above != thresholds.end() && *above - candidate <= gap_) return true;
    if (above != thresholds.begin() && candidate - *std::prev(above) <= gap_) return true;
    return false;
}

void Blacklist::add(int feature, double threshold) { used_[feature].insert(threshold); }

std::vector<double> candidate_thresholds(std::span<const double> sorted_values) {
    std::vector<double> out;
    for (std::size_t i = 1; i < sorted_values.size(); ++i) {
        double a = sorted_values[i - 1];
        double b = sorted_values[i];
        if (a == b) continue;
        double mid = a + (b - a) / 2.0;
        if (a < mid && mid < b) out.push_back(mid);
    }
    return out;
}

std::vector<double> filter_candidates(const Blacklist& blacklist, int feature,
                                      std::span<const double> candidates) {
    std::vector<double> out;
    for (double v : candidates)
        if (!blacklist.forbidden(feature, v)) out.push_back(v);
    return out;
}

const char* stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::MaxTrees: return "max_trees";
        case StopReason::EarlyStopping: return "early_stopping";
        case StopReason::BlacklistExhausted: return "blacklist_exhausted";
        case StopReason::NoUsefulSplit: return "no_useful_split";
    }
    return "?";
}

namespace {

constexpr double kMinGain = 1e-12;

double softplus(double t) {
    // log(1 + exp(t)) without overflow.
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    double e = std::exp(t);
    return e / (1.0 + e);
}

}  // namespace

double logistic_loss(Label y, double margin) { return softplus(-y * margin); }

double logistic_gradient(Label y, double margin) { return -y * sigmoid(-y * margin); }

double logistic_hessian(Label y, double margin) {
    double p = sigmoid(-y * margin);
    return p * (1.0 - p);
}

namespace {

struct SplitPlan {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;

    bool valid() const { return feature >= 0; }
};

// A leaf pending growth: its samples sorted per feature, gradient sums, and
// the slot in the under-construction tree it would replace.
struct NodeState {
    std::vector<std::vector<int>> order;
    double sum_g = 0.0;
    double sum_h = 0.0;
    int grow_index = -1;
    SplitPlan plan;
};

struct GrowNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Booster {
    const LabeledDataset& train;
    const TrainConfig& cfg;
    std::vector<double> g, h;

    Booster(const LabeledDataset& data, const TrainConfig& config)
        : train(data), cfg(config), g(data.size()), h(data.size()) {}

    double leaf_value(double sum_g, double sum_h) const {
        return -sum_g / (sum_h + cfg.lambda_reg);
    }

    double half_objective(double sum_g, double sum_h) const {
        return sum_g * sum_g / (sum_h + cfg.lambda_reg);
    }

    // Best allowed split of `node`, scanning every feature column in sorted
    // order. Flags report whether any structural candidate existed and
    // whether any survived the blacklist.
    SplitPlan best_split(const NodeState& node, const Blacklist& blacklist,
                         bool& saw_candidate, bool& saw_allowed) const {
        SplitPlan best;
        const double parent = half_objective(node.sum_g, node.sum_h);
        const int min_leaf = cfg.min_samples_per_leaf;
        const int d = train.dimensionality;
        const int n = static_cast<int>(node.order[0].size());
        for (int f = 0; f < d; ++f) {
            const std::vector<int>& order = node.order[f];
            double gl = 0.0, hl = 0.0;
            for (int pos = 0; pos + 1 < n; ++pos) {
                int row = order[pos];
                gl += g[row];
                hl += h[row];
                double a = train.features[static_cast<std::size_t>(row) * d + f];
                double b = train.features[static_cast<std::size_t>(order[pos + 1]) * d + f];
                if (a == b) continue;
                double mid = a + (b - a) / 2.0;
                if (!(a < mid && mid < b)) continue;
                if (pos + 1 < min_leaf || n - pos - 1 < min_leaf) continue;
                saw_candidate = true;
                if (blacklist.forbidden(f, mid)) continue;
                saw_allowed = true;
                double gr = node.sum_g - gl;
                double hr = node.sum_h - hl;
                double gain = half_objective(gl, hl) + half_objective(gr, hr) - parent;
                if (gain > kMinGain && gain > best.gain) {
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = mid;
                }
            }
        }
        return best;
    }

    NodeState make_child(const NodeState& parent, int split_feature, double threshold,
                         bool left_side) const {
        NodeState child;
        const int d = train.dimensionality;
        child.order.resize(d);
        for (int f = 0; f < d; ++f) {
            child.order[f].reserve(parent.order[f].size() / 2 + 1);
            for (int row : parent.order[f]) {
                double v = train.features[static_cast<std::size_t>(row) * d + split_feature];
                if ((v <= threshold) == left_side) child.order[f].push_back(row);
            }
        }
        for (int row : child.order[0]) {
            child.sum_g += g[row];
            child.sum_h += h[row];
        }
        return child;
    }
};

Tree emit_preorder(const std::vector<GrowNode>& grow, int root) {
    Tree tree;
    struct Frame {
        int grow_index;
        int parent_slot;  // index in tree.nodes to patch, -1 for root
        bool is_left;
    };
    std::vector<Frame> frames{{root, -1, false}};
    while (!frames.empty()) {
        Frame frame = frames.back();
        frames.pop_back();
        int idx = static_cast<int>(tree.nodes.size());
        const GrowNode& src = grow[frame.grow_index];
        Node node;
        if (src.left < 0) {
            node.score = src.value;
        } else {
            node.feature = src.feature;
            node.threshold = src.threshold;
        }
        tree.nodes.push_back(node);
        if (frame.parent_slot >= 0) {
            if (frame.is_left)
                tree.nodes[frame.parent_slot].left = idx;
            else
                tree.nodes[frame.parent_slot].right = idx;
        }
        if (src.left >= 0) {
            // Push right first so the left subtree is emitted immediately
            // after its parent (preorder).
            frames.push_back({src.right, idx, false});
            frames.push_back({src.left, idx, true});
        }
    }
    return tree;
}

}  // namespace

TrainResult fit(const LabeledDataset& train, const LabeledDataset& valid,
                const TrainConfig& config) {
    config.validate();
    if (train.empty()) throw InputError("training set is empty");
    bool has_pos = false, has_neg = false;
    for (Label y : train.labels) (y == +1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw InputError("training set must contain both classes");

    const std::size_t n = train.size();
    const int d = train.dimensionality;
    Booster booster(train, config);
    Blacklist blacklist(config.spread);

    std::vector<double> margin(n, 0.0);
    std::vector<double> valid_margin(valid.size(), 0.0);

    // Root sample orderings, sorted once per feature and reused every round.
    std::vector<std::vector<int>> root_order(d);
    for (int f = 0; f < d; ++f) {
        root_order[f].resize(n);
        std::iota(root_order[f].begin(), root_order[f].end(), 0);
        std::stable_sort(root_order[f].begin(), root_order[f].end(), [&](int a, int b) {
            return train.features[static_cast<std::size_t>(a) * d + f] <
                   train.features[static_cast<std::size_t>(b) * d + f];
        });
    }

    TrainResult result;
    result.stop_reason = StopReason::MaxTrees;
    double best_accuracy = -1.0;
    const bool use_early_stopping = !valid.empty();

    for (int round = 0; round < config.max_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            booster.g[i] = logistic_gradient(train.labels[i], margin[i]);
            booster.h[i] = logistic_hessian(train.labels[i], margin[i]);
        }

        // Leaf-wise growth.
        std::deque<NodeState> states;
        std::vector<GrowNode> grow;
        states.emplace_back();
        states[0].order = root_order;
        for (std::size_t i = 0; i < n; ++i) {
            states[0].sum_g += booster.g[i];
            states[0].sum_h += booster.h[i];
        }
        states[0].grow_index = 0;
        grow.push_back(GrowNode{});

        bool saw_candidate = false, saw_allowed = false;
        states[0].plan = booster.best_split(states[0], blacklist, saw_candidate, saw_allowed);
        if (!states[0].plan.valid()) {
            result.stop_reason = saw_candidate && !saw_allowed ? StopReason::BlacklistExhausted
                                                               : StopReason::NoUsefulSplit;
            break;
        }

        // Max-heap over pending splits; ties resolved by creation order.
        auto heap_less = [&](std::size_t a, std::size_t b) {
            if (states[a].plan.gain != states[b].plan.gain)
                return states[a].plan.gain < states[b].plan.gain;
            return a > b;
        };
        std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(heap_less)> heap(
            heap_less);
        heap.push(0);
        int leaves = 1;

        while (leaves < config.max_leaves && !heap.empty()) {
            std::size_t id = heap.top();
            heap.pop();
            NodeState& node = states[id];
            const SplitPlan plan = node.plan;

            NodeState left = booster.make_child(node, plan.feature, plan.threshold, true);
            NodeState right = booster.make_child(node, plan.feature, plan.threshold, false);
            node.order.clear();
            node.order.shrink_to_fit();

            const int parent_index = node.grow_index;
            left.grow_index = static_cast<int>(grow.size());
            grow.push_back(GrowNode{});
            right.grow_index = static_cast<int>(grow.size());
            grow.push_back(GrowNode{});
            grow[parent_index].feature = plan.feature;
            grow[parent_index].threshold = plan.threshold;
            grow[parent_index].left = left.grow_index;
            grow[parent_index].right = right.grow_index;

            bool ignore_a = false, ignore_b = false;
            left.plan = booster.best_split(left, blacklist, ignore_a, ignore_b);
            right.plan = booster.best_split(right, blacklist, ignore_a, ignore_b);

            states.push_back(std::move(left));
            if (states.back().plan.valid()) heap.push(states.size() - 1);
            states.push_back(std::move(right));
            if (states.back().plan.valid()) heap.push(states.size() - 1);
            ++leaves;
        }

        // Assign leaf values and push margins forward.
        for (NodeState& state : states) {
            if (grow[state.grow_index].left >= 0) continue;  // was split
            double value = booster.leaf_value(state.sum_g, state.sum_h) * config.learning_rate;
            grow[state.grow_index].value = value;
            for (int row : state.order[0]) margin[row] += value;
        }

        Tree tree = emit_preorder(grow, 0);
        for (const Node& node : tree.nodes)
            if (!node.is_leaf()) blacklist.add(node.feature, node.threshold);
        result.model.trees.push_back(std::move(tree));

        const Tree& finished = result.model.trees.back();
        for (std::size_t i = 0; i < valid.size(); ++i)
            valid_margin[i] += tree_predict(finished, valid.row(i));

        RoundLog log;
        log.round = round;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) loss += logistic_loss(train.labels[i], margin[i]);
        log.train_loss = loss / static_cast<double>(n);
        if (use_early_stopping) {
            std::size_t correct = 0;
            for (std::size_t i = 0; i < valid.size(); ++i) {
                Label predicted = valid_margin[i] >= 0.0 ? +1 : -1;
                correct += predicted == valid.labels[i];
            }
            log.valid_accuracy = static_cast<double>(correct) / static_cast<double>(valid.size());
            if (log.valid_accuracy > best_accuracy) {
                best_accuracy = log.valid_accuracy;
                result.best_round = round;
            }
        } else {
            log.valid_accuracy = std::numeric_limits<double>::quiet_NaN();
            result.best_round = round;
        }
        result.log.push_back(log);

        if (use_early_stopping && round - result.best_round >= config.early_stopping_rounds) {
            result.stop_reason = StopReason::EarlyStopping;
            break;
        }
    }

    if (result.model.trees.empty())
        throw InputError("training produced no trees (no allowed split at the root)");

    // Truncate to the best validation round.
    if (use_early_stopping &&
        static_cast<int>(result.model.trees.size()) > result.best_round + 1)
        result.model.trees.resize(result.best_round + 1);

    result.model.dimensionality = d;
    result.model.base_score = 0.0;
    if (config.identity_output) {
        result.model.link = Link::Identity;
        result.model.tau = 0.0;
    } else {
        result.model.link = Link::Logistic;
        result.model.tau = 0.5;
    }
    result.model.validate();
    return result;
}

}  // namespace gbrv
