#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gbrv {

// Binary labels are plain ints restricted to {+1, -1}.
using Label = int;

enum class Link { Identity, Logistic };

double apply_link(Link link, double raw);
const char* link_name(Link link);
Link parse_link(const std::string& name);

// One node of a regression tree. Trees are stored flat, root at index 0,
// children addressed by index. Leaves have feature == -1 and carry a score;
// internal nodes route x left when x[feature] <= threshold, right otherwise.
struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double score = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<Node> nodes;  // preorder, so leaf indices increase left-to-right

    int leaf_count() const;
    int depth() const;
};

struct Ensemble {
    std::vector<Tree> trees;
    Link link = Link::Identity;
    double tau = 0.0;
    int dimensionality = 0;
    double base_score = 0.0;  // constant added to the raw tree-score sum

    std::size_t node_count() const;

    // Structural checks: at least one tree, feature indices within
    // [0, dimensionality), finite thresholds/scores/tau, well-formed child
    // links. Throws InputError on violation.
    void validate() const;
};

struct Instance {
    std::vector<double> values;
    long index = -1;

    std::span<const double> view() const { return values; }
};

// Norm order: p == kInf means L-infinity, p == 0 means L0, p >= 1 is Lp.
struct NormOrder {
    static constexpr int kInf = -1;
    int p = kInf;

    bool is_inf() const { return p == kInf; }
    bool is_zero() const { return p == 0; }
    bool is_finite() const { return p >= 1; }

    std::string str() const;
    static NormOrder parse(const std::string& text);

    friend bool operator==(NormOrder a, NormOrder b) { return a.p == b.p; }
};

// Attacker with perturbation budget `budget` measured in the given norm.
// `ell` is the decimal precision used by the finite-p solver scaling and is
// ignored for p in {0, inf}.
struct AttackerSpec {
    NormOrder norm;
    double budget = 0.0;
    int ell = 6;

    void validate() const;  // throws InputError
};

// Index of the leaf reached by the standard <=/> traversal.
int tree_predict_leaf(const Tree& tree, std::span<const double> x);

double tree_predict(const Tree& tree, std::span<const double> x);

// Sum of per-tree scores plus the ensemble base score.
double raw_predict(const Ensemble& model, std::span<const double> x);

// +1 iff link(raw_predict(x)) >= tau, else -1.
Label classify(const Ensemble& model, std::span<const double> x);

// |x|^p by repeated squaring; exact for integral results that fit a double.
double pow_int(double x, int p);

}  // namespace gbrv
