#include "gbrv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "gbrv/errors.hpp"
#include "gbrv/kernels.hpp"

namespace gbrv {

const char* solve_mode_name(SolveMode mode) {
    return mode == SolveMode::Exact ? "exact" : "conservative";
}

double adversarial_gain(const Tree& tree, std::span<const double> x, Label y, int leaf) {
    double original = tree_predict(tree, x);
    double target = tree.nodes[leaf].score;
    return y == +1 ? original - target : target - original;
}

EtaResult eta(double x, int ell) {
    static constexpr double kPow10[] = {1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,
                                        1e7,  1e8,  1e9,  1e10, 1e11, 1e12, 1e13,
                                        1e14, 1e15, 1e16, 1e17, 1e18};
    if (ell < 0 || ell > 18) throw InputError("precision ell must be in [0, 18]");
    double scaled = x * kPow10[ell];
    double nearest = std::round(scaled);
    if (std::fabs(scaled - nearest) <= 1e-9 * std::max(1.0, std::fabs(scaled)))
        return {nearest, true};
    return {scaled, scaled == std::floor(scaled)};
}

namespace {

struct TreeCandidates {
    double original_score = 0.0;
    std::vector<GainItem> items;  // positive gain only, increasing leaf index
};

// Reachable leaves with positive adversarial gain, one bucket per tree.
// The implicit no-attack option (gain 0, cost 0) is never materialized.
std::vector<TreeCandidates> collect_candidates(const Ensemble& model,
                                               std::span<const double> x, Label y,
                                               const AttackerSpec& attacker) {
    std::vector<TreeCandidates> out(model.trees.size());
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const Tree& tree = model.trees[t];
        out[t].original_score = tree_predict(tree, x);
        for (ReachableLeaf& leaf : reachable_leaves(tree, x, attacker)) {
            double gain = y == +1 ? out[t].original_score - leaf.score
                                  : leaf.score - out[t].original_score;
            if (gain <= 0.0) continue;
            GainItem item;
            item.tree = static_cast<int>(t);
            item.leaf = leaf.leaf;
            item.gain = gain;
            item.cost_pow = leaf.cost_pow;
            item.delta = std::move(leaf.delta);
            out[t].items.push_back(std::move(item));
        }
    }
    return out;
}

SolverResult solve_linf(std::vector<TreeCandidates>& candidates, const SolveOptions& options) {
    SolverResult result;
    for (TreeCandidates& tc : candidates) {
        const GainItem* best = nullptr;
        for (const GainItem& item : tc.items)
            if (!best || item.gain > best->gain) best = &item;  // first wins ties
        if (!best) continue;
        result.gamma += best->gain;
        if (options.want_selection)
            result.selection.push_back(
                {best->tree, best->leaf, best->gain, best->cost_pow, best->delta});
    }
    return result;
}

struct WeightedProblem {
    std::int64_t capacity = 0;
    SolveMode mode = SolveMode::Exact;
};

WeightedProblem assign_weights(std::vector<TreeCandidates>& candidates,
                               const AttackerSpec& attacker) {
    WeightedProblem problem;
    if (attacker.norm.is_zero()) {
        problem.capacity = static_cast<std::int64_t>(attacker.budget);
        for (TreeCandidates& tc : candidates)
            for (GainItem& item : tc.items)
                item.weight = static_cast<std::int64_t>(item.cost_pow);
        return problem;
    }
    EtaResult cap = eta(budget_pow(attacker), attacker.ell);
    bool exact = cap.integral;
    std::vector<EtaResult> scaled;
    for (TreeCandidates& tc : candidates)
        for (GainItem& item : tc.items) {
            EtaResult e = eta(item.cost_pow, attacker.ell);
            exact = exact && e.integral;
            scaled.push_back(e);
        }
    problem.mode = exact ? SolveMode::Exact : SolveMode::Conservative;
    double cap_value = exact ? cap.value : std::ceil(cap.value);
    if (cap_value > 9e15)
        throw ResourceError("scaled Lp capacity overflows the DP table; lower --precision-ell");
    problem.capacity = static_cast<std::int64_t>(cap_value);
    std::size_t next = 0;
    for (TreeCandidates& tc : candidates)
        for (GainItem& item : tc.items) {
            double w = exact ? scaled[next].value : std::floor(scaled[next].value);
            item.weight = static_cast<std::int64_t>(w);
            ++next;
        }
    return problem;
}

SolverResult solve_dp(std::vector<TreeCandidates>& candidates, const AttackerSpec& attacker,
                      const SolveOptions& options) {
    SolverResult result;
    WeightedProblem problem = assign_weights(candidates, attacker);
    result.mode = problem.mode;

    const std::size_t m = candidates.size();
    const std::size_t cols = static_cast<std::size_t>(problem.capacity) + 1;
    if ((m + 1) * cols > options.max_cells)
        throw ResourceError("DP table of " + std::to_string((m + 1) * cols) +
                            " cells exceeds the configured maximum (" +
                            std::to_string(options.max_cells) +
                            "); lower --precision-ell or the budget");

    const bool full_table = options.want_selection || options.keep_table;
    DpTable table;
    std::vector<double> rolling_prev, rolling_cur;
    double* prev = nullptr;
    double* cur = nullptr;
    if (full_table) {
        table.rows = m + 1;
        table.cols = cols;
        table.cells.assign(table.rows * cols, 0.0);
    } else {
        rolling_prev.assign(cols, 0.0);
        rolling_cur.assign(cols, 0.0);
        prev = rolling_prev.data();
        cur = rolling_cur.data();
    }

    for (std::size_t i = 1; i <= m; ++i) {
        if (full_table) {
            prev = table.cells.data() + (i - 1) * cols;
            cur = table.cells.data() + i * cols;
        } else if (i > 1) {
            std::swap(prev, cur);
        }
        std::memcpy(cur, prev, cols * sizeof(double));
        for (const GainItem& item : candidates[i - 1].items) {
            if (item.weight < 0) continue;
            std::size_t w = static_cast<std::size_t>(item.weight);
            kernels::relax_shift_max(cur, prev, cols, w, item.gain);
        }
    }
    result.gamma = cur ? cur[cols - 1] : 0.0;

    if (options.want_selection && result.gamma > 0.0) {
        std::size_t q = cols - 1;
        for (std::size_t i = m; i >= 1; --i) {
            if (table.at(i, q) == table.at(i - 1, q)) continue;  // no attack on tree i-1
            for (const GainItem& item : candidates[i - 1].items) {
                std::size_t w = static_cast<std::size_t>(item.weight);
                if (w > q) continue;
                if (table.at(i - 1, q - w) + item.gain == table.at(i, q)) {
                    result.selection.push_back(
                        {item.tree, item.leaf, item.gain, item.cost_pow, item.delta});
                    q -= w;
                    break;
                }
            }
        }
        std::reverse(result.selection.begin(), result.selection.end());
    }
    if (options.keep_table) result.table = std::move(table);
    return result;
}

}  // namespace

SolverResult solve_attack(const Ensemble& model, std::span<const double> x, Label y,
                          const AttackerSpec& attacker, const SolveOptions& options) {
    attacker.validate();
    std::vector<TreeCandidates> candidates = collect_candidates(model, x, y, attacker);
    if (attacker.norm.is_inf()) return solve_linf(candidates, options);
    return solve_dp(candidates, attacker, options);
}

}  // namespace gbrv
