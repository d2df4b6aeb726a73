#include "gbrv/model_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gbrv/errors.hpp"

namespace gbrv {

using nlohmann::json;

namespace {

json node_to_json(const Tree& tree, int idx) {
    const Node& node = tree.nodes[idx];
    if (node.is_leaf()) return json{{"score", node.score}};
    return json{{"feature", node.feature},
                {"threshold", node.threshold},
                {"left", node_to_json(tree, node.left)},
                {"right", node_to_json(tree, node.right)}};
}

int node_from_json(const json& j, Tree& tree) {
    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("score")) {
        tree.nodes[idx].score = j.at("score").get<double>();
        return idx;
    }
    if (!j.contains("feature") || !j.contains("threshold") || !j.contains("left") ||
        !j.contains("right"))
        throw InputError("model node needs either {score} or {feature, threshold, left, right}");
    tree.nodes[idx].feature = j.at("feature").get<int>();
    tree.nodes[idx].threshold = j.at("threshold").get<double>();
    if (tree.nodes[idx].feature < 0) throw InputError("negative feature index in model file");
    int left = node_from_json(j.at("left"), tree);
    int right = node_from_json(j.at("right"), tree);
    tree.nodes[idx].left = left;
    tree.nodes[idx].right = right;
    return idx;
}

}  // namespace

std::string model_to_json(const Ensemble& model) {
    json trees = json::array();
    for (const Tree& tree : model.trees) trees.push_back(node_to_json(tree, 0));
    json j{{"dimensionality", model.dimensionality},
           {"link", link_name(model.link)},
           {"tau", model.tau},
           {"base_score", model.base_score},
           {"trees", std::move(trees)}};
    return j.dump(2) + "\n";
}

Ensemble model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    Ensemble model;
    try {
        model.dimensionality = j.at("dimensionality").get<int>();
        model.link = parse_link(j.at("link").get<std::string>());
        model.tau = j.at("tau").get<double>();
        model.base_score = j.value("base_score", 0.0);
        for (const json& tree_json : j.at("trees")) {
            Tree tree;
            node_from_json(tree_json, tree);
            model.trees.push_back(std::move(tree));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    }
    model.validate();
    return model;
}

Ensemble load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

void save_model(const Ensemble& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write model file " + path);
    out << model_to_json(model);
    if (!out) throw InputError("failed writing model file " + path);
}

namespace {

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    double v;
    while (ss >> v) out.push_back(v);
    return out;
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    int v;
    while (ss >> v) out.push_back(v);
    return out;
}

struct LightGbmTree {
    int num_leaves = 0;
    std::vector<int> split_feature;
    std::vector<double> threshold;
    std::vector<int> left_child;
    std::vector<int> right_child;
    std::vector<double> leaf_value;
};

// LightGBM encodes children as internal-node indices when >= 0 and as
// ~leaf_index when negative.
int build_lightgbm_node(const LightGbmTree& src, int code, Tree& out, int depth) {
    if (depth > 512) throw InputError("lightgbm tree too deep (cycle?)");
    int idx = static_cast<int>(out.nodes.size());
    out.nodes.emplace_back();
    if (code < 0) {
        int leaf = -code - 1;
        if (leaf >= static_cast<int>(src.leaf_value.size()))
            throw InputError("lightgbm leaf index out of range");
        out.nodes[idx].score = src.leaf_value[leaf];
        return idx;
    }
    if (code >= static_cast<int>(src.split_feature.size()))
        throw InputError("lightgbm node index out of range");
    out.nodes[idx].feature = src.split_feature[code];
    out.nodes[idx].threshold = src.threshold[code];
    int left = build_lightgbm_node(src, src.left_child[code], out, depth + 1);
    int right = build_lightgbm_node(src, src.right_child[code], out, depth + 1);
    out.nodes[idx].left = left;
    out.nodes[idx].right = right;
    return idx;
}

}  // namespace

Ensemble load_lightgbm(const std::string& path, std::optional<Link> link_override,
                       std::optional<double> tau_override) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file " + path);

    Ensemble model;
    model.link = link_override.value_or(Link::Logistic);
    model.tau = tau_override.value_or(model.link == Link::Logistic ? 0.5 : 0.0);

    int max_feature_idx = -1;
    std::string line;
    LightGbmTree current;
    bool in_tree = false;

    auto flush_tree = [&]() {
        if (!in_tree) return;
        Tree tree;
        if (current.num_leaves <= 1 || current.split_feature.empty()) {
            double value = current.leaf_value.empty() ? 0.0 : current.leaf_value[0];
            tree.nodes.push_back(Node{-1, 0.0, -1, -1, value});
        } else {
            build_lightgbm_node(current, 0, tree, 0);
        }
        model.trees.push_back(std::move(tree));
        current = LightGbmTree{};
        in_tree = false;
    };

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("Tree=", 0) == 0) {
            flush_tree();
            in_tree = true;
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line == "end of trees") flush_tree();
            continue;
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "max_feature_idx") {
            max_feature_idx = std::stoi(value);
        } else if (in_tree && key == "num_leaves") {
            current.num_leaves = std::stoi(value);
        } else if (in_tree && key == "split_feature") {
            current.split_feature = parse_ints(value);
        } else if (in_tree && key == "threshold") {
            current.threshold = parse_doubles(value);
        } else if (in_tree && key == "left_child") {
            current.left_child = parse_ints(value);
        } else if (in_tree && key == "right_child") {
            current.right_child = parse_ints(value);
        } else if (in_tree && key == "leaf_value") {
            current.leaf_value = parse_doubles(value);
        }
    }
    flush_tree();

    if (model.trees.empty()) throw InputError(path + ": no Tree sections found");
    int max_used = -1;
    for (const Tree& tree : model.trees)
        for (const Node& node : tree.nodes)
            if (!node.is_leaf()) max_used = std::max(max_used, node.feature);
    model.dimensionality = std::max(max_feature_idx, max_used) + 1;
    if (model.dimensionality <= 0) model.dimensionality = 1;
    model.validate();
    return model;
}

}  // namespace gbrv
