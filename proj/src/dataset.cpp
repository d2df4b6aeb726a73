#include "gbrv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gbrv/errors.hpp"
#include "gbrv/rng.hpp"

namespace gbrv {

double Rng::normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

void LabeledDataset::push_row(std::span<const double> values, Label label) {
    if (dimensionality == 0) dimensionality = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != dimensionality)
        throw InputError("inconsistent row width");
    features.insert(features.end(), values.begin(), values.end());
    labels.push_back(label);
}

DatasetFormat parse_dataset_format(const std::string& name) {
    if (name == "auto") return DatasetFormat::Auto;
    if (name == "csv") return DatasetFormat::Csv;
    if (name == "libsvm") return DatasetFormat::Libsvm;
    throw InputError("unknown dataset format '" + name + "' (expected auto|csv|libsvm)");
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_number(const std::string& token, const std::string& path, std::size_t line_no) {
    char* end = nullptr;
    double value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || !std::isfinite(value))
        throw InputError(path + ":" + std::to_string(line_no) + ": bad numeric value '" +
                         token + "'");
    return value;
}

// Maps raw label values onto {+1,-1}: native +-1 pass through, {0,1} maps
// 0 -> -1 and 1 -> +1. Anything else is rejected.
std::vector<Label> map_labels(const std::vector<double>& raw, const std::string& path) {
    bool zero_one = true;
    bool plus_minus = true;
    for (double v : raw) {
        zero_one = zero_one && (v == 0.0 || v == 1.0);
        plus_minus = plus_minus && (v == -1.0 || v == 1.0);
    }
    std::vector<Label> labels(raw.size());
    if (plus_minus) {
        for (std::size_t i = 0; i < raw.size(); ++i) labels[i] = raw[i] > 0 ? +1 : -1;
    } else if (zero_one) {
        for (std::size_t i = 0; i < raw.size(); ++i) labels[i] = raw[i] == 1.0 ? +1 : -1;
    } else {
        throw InputError(path + ": labels must be within {0,1} or {-1,+1}");
    }
    return labels;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

LabeledDataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset file " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_csv_line(line);

    int label_index = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_index = static_cast<int>(i);
    if (label_index < 0) {
        try {
            std::size_t pos = 0;
            int idx = std::stoi(label_column, &pos);
            if (pos == label_column.size() && idx >= 0 && idx < static_cast<int>(header.size()))
                label_index = idx;
        } catch (const std::exception&) {
        }
    }
    if (label_index < 0)
        throw InputError(path + ": label column '" + label_column + "' not found in header");

    LabeledDataset data;
    data.dimensionality = static_cast<int>(header.size()) - 1;
    std::vector<double> raw_labels;
    std::size_t line_no = 1;
    std::vector<double> row(data.dimensionality);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw InputError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        int out = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            double value = parse_number(fields[i], path, line_no);
            if (static_cast<int>(i) == label_index)
                raw_labels.push_back(value);
            else
                row[out++] = value;
        }
        data.features.insert(data.features.end(), row.begin(), row.end());
    }
    data.labels = map_labels(raw_labels, path);
    if (data.labels.empty()) throw InputError(path + ": no data rows");
    return data;
}

LabeledDataset load_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset file " + path);
    std::string line;
    std::vector<double> raw_labels;
    std::vector<std::vector<std::pair<int, double>>> rows;
    int max_feature = -1;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string token;
        if (!(ss >> token))
            continue;
        raw_labels.push_back(parse_number(token, path, line_no));
        std::vector<std::pair<int, double>> row;
        while (ss >> token) {
            std::size_t colon = token.find(':');
            if (colon == std::string::npos)
                throw InputError(path + ":" + std::to_string(line_no) +
                                 ": expected index:value, got '" + token + "'");
            int index = 0;
            try {
                index = std::stoi(token.substr(0, colon));
            } catch (const std::exception&) {
                throw InputError(path + ":" + std::to_string(line_no) + ": bad feature index in '" +
                                 token + "'");
            }
            if (index < 1)
                throw InputError(path + ":" + std::to_string(line_no) +
                                 ": libsvm feature indices are 1-based");
            double value = parse_number(token.substr(colon + 1), path, line_no);
            row.emplace_back(index - 1, value);
            max_feature = std::max(max_feature, index - 1);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path + ": no data rows");

    LabeledDataset data;
    data.dimensionality = max_feature + 1;
    data.features.assign(rows.size() * data.dimensionality, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (auto [f, v] : rows[i]) data.features[i * data.dimensionality + f] = v;
    data.labels = map_labels(raw_labels, path);
    return data;
}

}  // namespace

LabeledDataset load_dataset(const std::string& path, DatasetFormat format,
                            const std::string& label_column) {
    if (format == DatasetFormat::Auto)
        format = (ends_with(path, ".libsvm") || ends_with(path, ".svm")) ? DatasetFormat::Libsvm
                                                                         : DatasetFormat::Csv;
    return format == DatasetFormat::Csv ? load_csv(path, label_column) : load_libsvm(path);
}

void save_csv(const LabeledDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write dataset file " + path);
    out << "label";
    for (int f = 0; f < data.dimensionality; ++f) out << ",f" << f;
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.labels[i];
        auto row = data.row(i);
        for (double v : row) out << "," << v;
        out << "\n";
    }
    if (!out) throw InputError("failed writing dataset file " + path);
}

SplitResult stratified_split(const LabeledDataset& data, double train_frac, double valid_frac,
                             std::uint64_t seed) {
    if (train_frac < 0 || valid_frac < 0 || train_frac + valid_frac > 1.0)
        throw InputError("split fractions must be non-negative and sum to at most 1");
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < data.size(); ++i)
        (data.labels[i] == +1 ? positives : negatives).push_back(i);

    Rng rng(seed);
    auto shuffle = [&rng](std::vector<std::size_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.below(i)]);
    };
    shuffle(positives);
    shuffle(negatives);

    SplitResult out;
    out.train.dimensionality = out.valid.dimensionality = out.test.dimensionality =
        data.dimensionality;
    auto distribute = [&](const std::vector<std::size_t>& idx) {
        std::size_t n_train = static_cast<std::size_t>(std::round(train_frac * idx.size()));
        std::size_t n_valid = static_cast<std::size_t>(std::round(valid_frac * idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            LabeledDataset& target =
                i < n_train ? out.train : (i < n_train + n_valid ? out.valid : out.test);
            target.push_row(data.row(idx[i]), data.labels[idx[i]]);
        }
    };
    distribute(positives);
    distribute(negatives);
    return out;
}

LabeledDataset make_two_gaussians(std::size_t n, int dimensionality, double offset, double sigma,
                                  std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset data;
    data.dimensionality = dimensionality;
    std::vector<double> row(dimensionality);
    for (std::size_t i = 0; i < n; ++i) {
        Label y = (i % 2 == 0) ? +1 : -1;
        for (int f = 0; f < dimensionality; ++f)
            row[f] = y * offset + sigma * rng.normal();
        data.push_row(row, y);
    }
    return data;
}

}  // namespace gbrv
