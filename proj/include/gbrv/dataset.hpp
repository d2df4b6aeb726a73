#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gbrv/model.hpp"

namespace gbrv {

struct LabeledDataset {
    int dimensionality = 0;
    std::vector<double> features;  // row-major, size() * dimensionality
    std::vector<Label> labels;     // in {+1, -1}

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * dimensionality,
                static_cast<std::size_t>(dimensionality)};
    }

    void push_row(std::span<const double> values, Label label);
};

enum class DatasetFormat { Auto, Csv, Libsvm };

DatasetFormat parse_dataset_format(const std::string& name);

// Loads a delimited-text-with-header file or a sparse index:value file.
// Auto picks libsvm for .libsvm/.svm extensions and CSV otherwise.
// `label_column` is a header name or a 0-based column index (CSV only).
// Raw labels in {0,1} map to {-1,+1}; {-1,+1} pass through; anything else
// is an input error.
LabeledDataset load_dataset(const std::string& path, DatasetFormat format = DatasetFormat::Auto,
                            const std::string& label_column = "label");

void save_csv(const LabeledDataset& data, const std::string& path);

struct SplitResult {
    LabeledDataset train;
    LabeledDataset valid;
    LabeledDataset test;
};

// Stratified shuffle split by label; fractions define train and validation
// shares, the remainder is the test set.
SplitResult stratified_split(const LabeledDataset& data, double train_frac, double valid_frac,
                             std::uint64_t seed);

// Two spherical Gaussians at +-offset per coordinate, labels balanced.
LabeledDataset make_two_gaussians(std::size_t n, int dimensionality, double offset,
                                  double sigma, std::uint64_t seed);

}  // namespace gbrv
