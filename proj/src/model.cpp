#include "gbrv/model.hpp"

#include <cmath>
#include <limits>

#include "gbrv/errors.hpp"

namespace gbrv {

double apply_link(Link link, double raw) {
    switch (link) {
        case Link::Identity:
            return raw;
        case Link::Logistic:
            // Stable sigmoid, monotone on all of R.
            if (raw >= 0.0) {
                return 1.0 / (1.0 + std::exp(-raw));
            }
            double e = std::exp(raw);
            return e / (1.0 + e);
    }
    return raw;
}

const char* link_name(Link link) {
    return link == Link::Identity ? "identity" : "logistic";
}

Link parse_link(const std::string& name) {
    if (name == "identity") return Link::Identity;
    if (name == "logistic") return Link::Logistic;
    throw InputError("unknown link '" + name + "' (expected identity|logistic)");
}

int Tree::leaf_count() const {
    int n = 0;
    for (const Node& node : nodes) n += node.is_leaf();
    return n;
}

int Tree::depth() const {
    if (nodes.empty()) return 0;
    // Iterative depth over the flat layout.
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        const Node& node = nodes[idx];
        if (node.is_leaf()) {
            best = std::max(best, d);
        } else {
            stack.push_back({node.left, d + 1});
            stack.push_back({node.right, d + 1});
        }
    }
    return best;
}

std::size_t Ensemble::node_count() const {
    std::size_t n = 0;
    for (const Tree& t : trees) n += t.nodes.size();
    return n;
}

namespace {

void validate_tree(const Tree& tree, int tree_index, int dimensionality) {
    const auto fail = [&](const std::string& what) {
        throw InputError("tree " + std::to_string(tree_index) + ": " + what);
    };
    if (tree.nodes.empty()) fail("empty tree");
    std::vector<char> seen(tree.nodes.size(), 0);
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int idx = stack.back();
        stack.pop_back();
        if (idx < 0 || idx >= static_cast<int>(tree.nodes.size()))
            fail("child index out of range");
        if (seen[idx]) fail("node visited twice (not a tree)");
        seen[idx] = 1;
        const Node& node = tree.nodes[idx];
        if (node.is_leaf()) {
            if (!std::isfinite(node.score)) fail("non-finite leaf score");
            continue;
        }
        if (node.feature >= dimensionality)
            fail("feature index " + std::to_string(node.feature) +
                 " >= dimensionality " + std::to_string(dimensionality));
        if (!std::isfinite(node.threshold)) fail("non-finite threshold");
        stack.push_back(node.left);
        stack.push_back(node.right);
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
        if (!seen[i]) fail("unreachable node " + std::to_string(i));
}

}  // namespace

void Ensemble::validate() const {
    if (trees.empty()) throw InputError("ensemble has no trees");
    if (dimensionality <= 0) throw InputError("dimensionality must be positive");
    if (!std::isfinite(tau)) throw InputError("non-finite tau");
    if (!std::isfinite(base_score)) throw InputError("non-finite base score");
    for (std::size_t i = 0; i < trees.size(); ++i)
        validate_tree(trees[i], static_cast<int>(i), dimensionality);
}

int tree_predict_leaf(const Tree& tree, std::span<const double> x) {
    int idx = 0;
    while (true) {
        const Node& node = tree.nodes[idx];
        if (node.is_leaf()) return idx;
        if (static_cast<std::size_t>(node.feature) >= x.size())
            throw InputError("instance dimensionality " + std::to_string(x.size()) +
                             " too small for feature " + std::to_string(node.feature));
        idx = x[node.feature] <= node.threshold ? node.left : node.right;
    }
}

double tree_predict(const Tree& tree, std::span<const double> x) {
    return tree.nodes[tree_predict_leaf(tree, x)].score;
}

double raw_predict(const Ensemble& model, std::span<const double> x) {
    double sum = model.base_score;
    for (const Tree& tree : model.trees) sum += tree_predict(tree, x);
    return sum;
}

Label classify(const Ensemble& model, std::span<const double> x) {
    return apply_link(model.link, raw_predict(model, x)) >= model.tau ? +1 : -1;
}

std::string NormOrder::str() const {
    return is_inf() ? "inf" : std::to_string(p);
}

NormOrder NormOrder::parse(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF") return NormOrder{kInf};
    try {
        std::size_t pos = 0;
        int value = std::stoi(text, &pos);
        if (pos == text.size() && value >= 0) return NormOrder{value};
    } catch (const std::exception&) {
    }
    throw InputError("invalid norm '" + text + "' (expected inf or integer >= 0)");
}

void AttackerSpec::validate() const {
    if (!(budget >= 0.0) || !std::isfinite(budget))
        throw InputError("attacker budget must be finite and >= 0");
    if (norm.is_zero() && budget != std::floor(budget))
        throw InputError("L0 budget must be an integer");
    if (norm.p < NormOrder::kInf)
        throw InputError("invalid norm order");
    if (ell < 0 || ell > 18)
        throw InputError("precision ell must be in [0, 18]");
}

double pow_int(double x, int p) {
    x = std::fabs(x);
    double result = 1.0;
    while (p > 0) {
        if (p & 1) result *= x;
        x *= x;
        p >>= 1;
    }
    return result;
}

}  // namespace gbrv
