#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "gbrv/dataset.hpp"
#include "gbrv/errors.hpp"
#include "gbrv/model_io.hpp"
#include "testutil.hpp"

using namespace gbrv;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("gbrv_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }

    void write(const std::string& text) {
        std::ofstream out(path);
        out << text;
    }
};

}  // namespace

TEST_CASE("model JSON round trip is byte-identical") {
    Ensemble model = testutil::make_ensemble(
        {testutil::example_tree(), testutil::stump(1, 0.1234567890123, -0.25, 1.75)}, 2,
        Link::Logistic, 0.5);
    model.base_score = 0.125;

    std::string once = model_to_json(model);
    Ensemble reloaded = model_from_json(once);
    std::string twice = model_to_json(reloaded);
    CHECK(once == twice);
    CHECK(reloaded.dimensionality == 2);
    CHECK(reloaded.link == Link::Logistic);
    CHECK(reloaded.base_score == 0.125);
    CHECK(raw_predict(reloaded, std::vector<double>{8.0, 6.0}) ==
          raw_predict(model, std::vector<double>{8.0, 6.0}));
}

TEST_CASE("model JSON rejects malformed input") {
    CHECK_THROWS_AS(model_from_json("not json"), InputError);
    CHECK_THROWS_AS(model_from_json("{}"), InputError);
    CHECK_THROWS_AS(model_from_json(R"({"dimensionality":1,"link":"identity","tau":0,
        "trees":[{"feature":0,"threshold":1}]})"),
                    InputError);
    CHECK_THROWS_AS(model_from_json(R"({"dimensionality":1,"link":"weird","tau":0,
        "trees":[{"score":1}]})"),
                    InputError);
}

TEST_CASE("base score feeds the raw prediction") {
    Ensemble model = testutil::two_stumps();
    model.base_score = 0.75;
    CHECK(raw_predict(model, std::vector<double>{4.0, 4.0}) == 0.75);
    Ensemble reloaded = model_from_json(model_to_json(model));
    CHECK(raw_predict(reloaded, std::vector<double>{4.0, 4.0}) == 0.75);
}

TEST_CASE("lightgbm text dump loader") {
    TempFile file("lgbm.txt");
    file.write(
        "tree\n"
        "version=v3\n"
        "num_class=1\n"
        "max_feature_idx=1\n"
        "objective=binary sigmoid:1\n"
        "\n"
        "Tree=0\n"
        "num_leaves=3\n"
        "split_feature=0 1\n"
        "threshold=10.0 5.0\n"
        "left_child=1 -1\n"
        "right_child=-3 -2\n"
        "leaf_value=0.2 0.8 0.3\n"
        "\n"
        "Tree=1\n"
        "num_leaves=1\n"
        "leaf_value=0.125\n"
        "\n"
        "end of trees\n");

    Ensemble model = load_lightgbm(file.path);
    CHECK(model.dimensionality == 2);
    CHECK(model.link == Link::Logistic);
    CHECK(model.tau == 0.5);
    REQUIRE(model.trees.size() == 2);
    // Tree 0: root on f0 at 10; left child splits f1 at 5 into 0.2/0.8;
    // right child is leaf 2 (value 0.3).
    CHECK(tree_predict(model.trees[0], std::vector<double>{8.0, 4.0}) == 0.2);
    CHECK(tree_predict(model.trees[0], std::vector<double>{8.0, 6.0}) == 0.8);
    CHECK(tree_predict(model.trees[0], std::vector<double>{12.0, 0.0}) == 0.3);
    CHECK(tree_predict(model.trees[1], std::vector<double>{0.0, 0.0}) == 0.125);

    Ensemble overridden = load_lightgbm(file.path, Link::Identity, 0.0);
    CHECK(overridden.link == Link::Identity);
    CHECK(overridden.tau == 0.0);
}

TEST_CASE("csv loader with header, label mapping and errors") {
    TempFile file("data.csv");
    file.write(
        "label,f0,f1\n"
        "1,0.5,1.5\n"
        "0,-0.5,2.5\n"
        "1,1.25,-3.5\n");
    LabeledDataset data = load_dataset(file.path);
    CHECK(data.size() == 3);
    CHECK(data.dimensionality == 2);
    CHECK(data.labels == std::vector<Label>{+1, -1, +1});
    CHECK(data.row(1)[0] == -0.5);

    // Label column by position.
    LabeledDataset by_index = load_dataset(file.path, DatasetFormat::Csv, "0");
    CHECK(by_index.labels == data.labels);

    TempFile bad_labels("bad.csv");
    bad_labels.write("label,f0\n2,1.0\n3,2.0\n");
    CHECK_THROWS_AS(load_dataset(bad_labels.path), InputError);

    TempFile ragged("ragged.csv");
    ragged.write("label,f0,f1\n1,2.0\n");
    CHECK_THROWS_AS(load_dataset(ragged.path), InputError);

    CHECK_THROWS_AS(load_dataset("does_not_exist.csv"), InputError);
}

TEST_CASE("csv writer round trip") {
    LabeledDataset data = make_two_gaussians(20, 3, 0.5, 1.0, 3);
    TempFile file("roundtrip.csv");
    save_csv(data, file.path);
    LabeledDataset reloaded = load_dataset(file.path);
    CHECK(reloaded.size() == data.size());
    CHECK(reloaded.labels == data.labels);
    for (std::size_t i = 0; i < data.size(); ++i)
        for (int f = 0; f < 3; ++f) CHECK(reloaded.row(i)[f] == data.row(i)[f]);
}

TEST_CASE("libsvm loader") {
    TempFile file("data.libsvm");
    file.write(
        "+1 1:0.5 3:2.0\n"
        "-1 2:1.5\n"
        "+1 1:-1.0 2:0.25 3:0.125\n");
    LabeledDataset data = load_dataset(file.path);
    CHECK(data.size() == 3);
    CHECK(data.dimensionality == 3);
    CHECK(data.labels == std::vector<Label>{+1, -1, +1});
    CHECK(data.row(0)[0] == 0.5);
    CHECK(data.row(0)[1] == 0.0);  // sparse default
    CHECK(data.row(0)[2] == 2.0);
    CHECK(data.row(1)[1] == 1.5);

    TempFile zero_index("zero.libsvm");
    zero_index.write("+1 0:1.0\n");
    CHECK_THROWS_AS(load_dataset(zero_index.path), InputError);
}

TEST_CASE("stratified split keeps class balance and is exhaustive") {
    LabeledDataset data = make_two_gaussians(1000, 2, 0.5, 1.0, 11);
    SplitResult split = stratified_split(data, 0.55, 0.15, 99);
    CHECK(split.train.size() + split.valid.size() + split.test.size() == data.size());
    CHECK(split.train.size() == 550);
    CHECK(split.valid.size() == 150);

    auto positives = [](const LabeledDataset& d) {
        std::size_t n = 0;
        for (Label y : d.labels) n += y == +1;
        return n;
    };
    CHECK(positives(split.train) == 275);
    CHECK(positives(split.test) == 150);

    // Deterministic given the seed.
    SplitResult again = stratified_split(data, 0.55, 0.15, 99);
    CHECK(again.train.labels == split.train.labels);
    CHECK(again.train.features == split.train.features);

    CHECK_THROWS_AS(stratified_split(data, 0.9, 0.2, 1), InputError);
}
