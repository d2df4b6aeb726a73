#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gbrv/geometry.hpp"
#include "gbrv/model.hpp"

namespace gbrv {

// Raw-score advantage of forcing x from its original leaf into `leaf`.
double adversarial_gain(const Tree& tree, std::span<const double> x, Label y, int leaf);

enum class SolveMode { Exact, Conservative };

const char* solve_mode_name(SolveMode mode);

// Decimal scaling used to turn fractional Lp weights into DP integers:
// value = x * 10^ell, snapped to the nearest integer when within a relative
// 1e-9 quantization tolerance (absorbs the epsilon carried by interval
// entry distances). `integral` reports whether the snapped value is a whole
// number.
struct EtaResult {
    double value = 0.0;
    bool integral = false;
};

EtaResult eta(double x, int ell);

// Positive-gain attack candidate for one tree. `weight` is the integer DP
// cost (L0 count, or the scaled Lp power-sum).
struct GainItem {
    int tree = -1;
    int leaf = -1;
    double gain = 0.0;
    std::int64_t weight = 0;
    double cost_pow = 0.0;
    std::vector<FeatureDelta> delta;
};

// Knapsack table; row i holds the best total gain using the first i trees.
struct DpTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> cells;

    double at(std::size_t i, std::size_t q) const { return cells[i * cols + q]; }
};

struct SelectedLeaf {
    int tree = -1;
    int leaf = -1;
    double gain = 0.0;
    double cost_pow = 0.0;
    std::vector<FeatureDelta> delta;
};

struct SolverResult {
    double gamma = 0.0;
    SolveMode mode = SolveMode::Exact;
    std::vector<SelectedLeaf> selection;  // filled when requested
    std::optional<DpTable> table;         // filled when requested (DP norms)
};

struct SolveOptions {
    bool want_selection = false;
    bool keep_table = false;
    std::size_t max_cells = 100'000'000;  // DP table guard
};

// Optimal total adversarial gain for the attacker, assuming the model is
// large-spread for it. L-infinity uses the per-tree greedy; L0 and finite Lp
// run the one-leaf-per-tree knapsack DP. Finite-p weights that are not
// integral at the attacker's precision fall back to the conservative
// floor/ceil rounding (never misses an attack, may over-report).
SolverResult solve_attack(const Ensemble& model, std::span<const double> x, Label y,
                          const AttackerSpec& attacker, const SolveOptions& options = {});

}  // namespace gbrv
