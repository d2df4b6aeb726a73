#pragma once

#include <optional>
#include <string>

#include "gbrv/model.hpp"

namespace gbrv {

// Native model format: a JSON object {dimensionality, link, tau, base_score,
// trees} with recursive node records {feature, threshold, left, right} for
// internal nodes and {score} for leaves. Serialization is deterministic, so
// save -> load -> save round-trips byte-identically.
std::string model_to_json(const Ensemble& model);
Ensemble model_from_json(const std::string& text);

Ensemble load_model(const std::string& path);
void save_model(const Ensemble& model, const std::string& path);

// Loader for the LightGBM plain-text model dump (the `tree` sections with
// split_feature / threshold / left_child / right_child / leaf_value arrays).
// Defaults to the logistic link with tau = 0.5 unless overridden.
Ensemble load_lightgbm(const std::string& path, std::optional<Link> link_override = {},
                       std::optional<double> tau_override = {});

}  // namespace gbrv
