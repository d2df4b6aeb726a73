#include "gbrv/verifier.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "gbrv/dataset.hpp"
#include "gbrv/errors.hpp"
#include "gbrv/geometry.hpp"
#include "gbrv/oracle.hpp"

namespace gbrv {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Robust: return "robust";
        case Verdict::NotRobust: return "not_robust";
        case Verdict::Misclassified: return "misclassified";
        case Verdict::Unknown: return "unknown";
        case Verdict::Error: return "error";
    }
    return "?";
}

const char* engine_name(Engine e) {
    switch (e) {
        case Engine::Ev: return "ev";
        case Engine::Bv: return "bv";
        case Engine::Oracle: return "oracle";
    }
    return "?";
}

Engine parse_engine(const std::string& name) {
    if (name == "ev") return Engine::Ev;
    if (name == "bv") return Engine::Bv;
    if (name == "oracle") return Engine::Oracle;
    throw InputError("unknown engine '" + name + "' (expected ev|bv|oracle)");
}

VerificationReport verify_ev(const Ensemble& model, const Instance& instance, Label y,
                             const AttackerSpec& attacker, bool precheck) {
    if (precheck) require_large_spread(model, attacker);
    auto start = Clock::now();
    VerificationReport report;
    report.index = instance.index;
    report.label = y;
    report.predicted = classify(model, instance.view());
    if (report.predicted != y) {
        report.verdict = Verdict::Misclassified;
        report.elapsed_ms = ms_since(start);
        return report;
    }
    SolverResult solved = solve_attack(model, instance.view(), y, attacker);
    report.gamma = solved.gamma;
    report.mode = solved.mode;
    double s = raw_predict(model, instance.view());
    bool robust = y == +1 ? apply_link(model.link, s - solved.gamma) >= model.tau
                          : apply_link(model.link, s + solved.gamma) < model.tau;
    report.verdict = robust ? Verdict::Robust : Verdict::NotRobust;
    report.elapsed_ms = ms_since(start);
    return report;
}

VerificationReport verify_bv(const Ensemble& model, const Instance& instance, Label y,
                             const AttackerSpec& attacker, bool precheck) {
    if (precheck) require_large_spread(model, attacker);
    auto start = Clock::now();
    VerificationReport report;
    report.index = instance.index;
    report.label = y;
    report.predicted = classify(model, instance.view());
    if (report.predicted != y) {
        report.verdict = Verdict::Misclassified;
        report.elapsed_ms = ms_since(start);
        return report;
    }
    SolveOptions options;
    options.want_selection = true;
    SolverResult solved = solve_attack(model, instance.view(), y, attacker, options);
    report.gamma = solved.gamma;
    report.mode = solved.mode;

    // Assemble the optimal perturbation from the selected per-tree distances;
    // features never collide across trees in a large-spread ensemble.
    std::vector<double> delta(instance.values.size(), 0.0);
    for (const SelectedLeaf& chosen : solved.selection)
        for (const FeatureDelta& fd : chosen.delta) delta[fd.feature] += fd.delta;

    std::vector<double> attacked = instance.values;
    for (std::size_t i = 0; i < attacked.size(); ++i) attacked[i] += delta[i];
    bool robust = classify(model, attacked) == y;
    report.verdict = robust ? Verdict::Robust : Verdict::NotRobust;
    // Only surface the witness when it truly fits the attacker budget; a
    // conservative solution can select an over-budget combination.
    if (norm_pow(delta, attacker.norm) <= budget_pow(attacker))
        report.delta_opt = std::move(delta);
    report.elapsed_ms = ms_since(start);
    return report;
}

namespace {

VerificationReport verify_with_oracle(const Ensemble& model, const Instance& instance, Label y,
                                      const AttackerSpec& attacker,
                                      const VerifyRunOptions& options) {
    auto start = Clock::now();
    VerificationReport report;
    report.index = instance.index;
    report.label = y;
    report.predicted = classify(model, instance.view());
    OracleOptions oracle_options;
    oracle_options.max_tuples = options.max_tuples;
    oracle_options.timeout_ms = options.timeout_ms;
    try {
        OracleOutcome outcome = oracle_verify(model, instance.view(), y, attacker, oracle_options);
        report.verdict = outcome.verdict;
        if (outcome.witness) report.delta_opt = std::move(outcome.witness);
    } catch (const ResourceError& e) {
        report.verdict = Verdict::Unknown;
        report.error = e.what();
    }
    report.elapsed_ms = ms_since(start);
    return report;
}

}  // namespace

DatasetRobustness verify_dataset(const Ensemble& model, const LabeledDataset& data,
                                 const AttackerSpec& attacker,
                                 const VerifyRunOptions& options) {
    attacker.validate();
    if (options.engine != Engine::Oracle) require_large_spread(model, attacker);

    const std::size_t n = data.size();
    std::vector<VerificationReport> reports(n);
    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            Instance instance;
            instance.index = static_cast<long>(i);
            auto row = data.row(i);
            instance.values.assign(row.begin(), row.end());
            VerificationReport report;
            if (data.dimensionality != model.dimensionality) {
                report.index = static_cast<long>(i);
                report.label = data.labels[i];
                report.verdict = Verdict::Error;
                report.error = "instance dimensionality " +
                               std::to_string(data.dimensionality) + " != model " +
                               std::to_string(model.dimensionality);
            } else {
                switch (options.engine) {
                    case Engine::Ev:
                        report = verify_ev(model, instance, data.labels[i], attacker, false);
                        break;
                    case Engine::Bv:
                        report = verify_bv(model, instance, data.labels[i], attacker, false);
                        break;
                    case Engine::Oracle:
                        report = verify_with_oracle(model, instance, data.labels[i], attacker,
                                                    options);
                        break;
                }
            }
            if (options.sink) {
                std::lock_guard<std::mutex> lock(sink_mutex);
                options.sink(report);
            }
            reports[i] = std::move(report);
        }
    };

    int workers = std::max(1, options.workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    DatasetRobustness totals;
    for (const VerificationReport& report : reports) {
        switch (report.verdict) {
            case Verdict::Robust: ++totals.robust; break;
            case Verdict::NotRobust: ++totals.not_robust; break;
            case Verdict::Misclassified: ++totals.misclassified; break;
            case Verdict::Unknown: ++totals.unknown; break;
            case Verdict::Error: ++totals.errors; break;
        }
    }
    return totals;
}

}  // namespace gbrv
