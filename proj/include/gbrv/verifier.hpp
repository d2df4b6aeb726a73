#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gbrv/model.hpp"
#include "gbrv/solver.hpp"

namespace gbrv {

struct LabeledDataset;

enum class Verdict { Robust, NotRobust, Misclassified, Unknown, Error };

const char* verdict_name(Verdict v);

struct VerificationReport {
    long index = -1;
    Label label = 0;
    Label predicted = 0;
    Verdict verdict = Verdict::Error;
    std::optional<double> gamma;
    SolveMode mode = SolveMode::Exact;
    std::optional<std::vector<double>> delta_opt;  // BV witness, within budget
    double elapsed_ms = 0.0;
    std::string error;

    bool robust() const { return verdict == Verdict::Robust; }
};

enum class Engine { Ev, Bv, Oracle };

const char* engine_name(Engine e);
Engine parse_engine(const std::string& name);

// Efficient verification: gain-thresholding on the raw score. Assumes the
// model is large-spread for the attacker unless `precheck` is set.
VerificationReport verify_ev(const Ensemble& model, const Instance& instance, Label y,
                             const AttackerSpec& attacker, bool precheck = true);

// Basic verification: constructs the optimal perturbation and re-classifies.
VerificationReport verify_bv(const Ensemble& model, const Instance& instance, Label y,
                             const AttackerSpec& attacker, bool precheck = true);

struct DatasetRobustness {
    std::size_t robust = 0;
    std::size_t not_robust = 0;
    std::size_t misclassified = 0;
    std::size_t unknown = 0;
    std::size_t errors = 0;

    std::size_t total() const { return robust + not_robust + misclassified + unknown + errors; }
    // Fraction of verifiable instances proven robust; input errors are
    // excluded from the denominator.
    double measure() const {
        std::size_t n = total() - errors;
        return n == 0 ? 0.0 : static_cast<double>(robust) / static_cast<double>(n);
    }
};

struct VerifyRunOptions {
    Engine engine = Engine::Ev;
    int workers = 1;
    double timeout_ms = 0.0;          // per instance, oracle engine only
    std::size_t max_tuples = 1'000'000;  // oracle engine only
    std::size_t max_cells = 100'000'000;
    // Called once per instance as results are produced (any thread, serialized).
    std::function<void(const VerificationReport&)> sink;
};

// Verifies every instance of the dataset against the attacker. The
// large-spread precondition is checked once up front (skipped for the oracle
// engine, which handles arbitrary ensembles).
DatasetRobustness verify_dataset(const Ensemble& model, const LabeledDataset& data,
                                 const AttackerSpec& attacker,
                                 const VerifyRunOptions& options = {});

}  // namespace gbrv
