#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gbrv/dataset.hpp"
#include "gbrv/model.hpp"

namespace gbrv {

struct TrainConfig {
    int max_trees = 500;
    double learning_rate = 0.1;
    int max_leaves = 32;
    int min_samples_per_leaf = 20;
    int early_stopping_rounds = 50;
    double lambda_reg = 1.0;
    // Spread constraint enforced during construction; budget 0 only forbids
    // exact threshold reuse across trees.
    AttackerSpec spread{NormOrder{NormOrder::kInf}, 0.0, 6};
    std::uint64_t seed = 0;  // reserved; the current algorithm is deterministic
    bool identity_output = false;  // emit identity link / tau 0 instead of
                                   // logistic / tau 0.5

    void validate() const;
};

// Thresholds already committed by finished trees, per feature. A candidate
// v' is forbidden when some used v on the same feature has |v - v'| <= 2k
// (p >= 1 and infinity); for p = 0 a used feature is forbidden outright.
class Blacklist {
  public:
    explicit Blacklist(const AttackerSpec& spread)
        : norm_(spread.norm), gap_(2.0 * spread.budget) {}

    bool forbidden(int feature, double candidate) const;
    void add(int feature, double threshold);
    bool feature_used(int feature) const { return used_.count(feature) != 0; }

  private:
    NormOrder norm_;
    double gap_;
    std::map<int, std::set<double>> used_;
};

// Midpoints between consecutive distinct values of a sorted column.
std::vector<double> candidate_thresholds(std::span<const double> sorted_values);

std::vector<double> filter_candidates(const Blacklist& blacklist, int feature,
                                      std::span<const double> candidates);

// Logistic loss on +-1 labels and its first two derivatives in the raw
// margin; these drive the per-round Newton statistics.
double logistic_loss(Label y, double margin);
double logistic_gradient(Label y, double margin);
double logistic_hessian(Label y, double margin);

enum class StopReason { MaxTrees, EarlyStopping, BlacklistExhausted, NoUsefulSplit };

const char* stop_reason_name(StopReason reason);

struct RoundLog {
    int round = 0;
    double train_loss = 0.0;
    double valid_accuracy = 0.0;  // NaN when no validation set
};

struct TrainResult {
    Ensemble model;
    std::vector<RoundLog> log;
    StopReason stop_reason = StopReason::MaxTrees;
    int best_round = -1;  // 0-based index of the best validation round
};

// Gradient boosting with logistic loss on +-1 labels. Trees grow leaf-wise
// (best-first) up to max_leaves, choosing splits only among
// blacklist-allowed thresholds; each finished tree commits its thresholds to
// the blacklist, so the emitted ensemble is large-spread by construction.
// An empty validation set disables early stopping.
TrainResult fit(const LabeledDataset& train, const LabeledDataset& valid,
                const TrainConfig& config);

}  // namespace gbrv
