#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "gbrv/errors.hpp"
#include "gbrv/geometry.hpp"
#include "gbrv/random_models.hpp"
#include "gbrv/rng.hpp"
#include "testutil.hpp"

using namespace gbrv;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("annotation boxes for the example tree") {
    Tree tree = testutil::example_tree();
    AnnotatedTree annotated = annotate(tree, 2);

    const HyperRectangle& root = annotated.boxes[0];
    CHECK(root.lo == std::vector<double>{-kInf, -kInf});
    CHECK(root.hi == std::vector<double>{kInf, kInf});

    const HyperRectangle& leaf1 = annotated.boxes[2];  // score 0.2
    CHECK(leaf1.lo == std::vector<double>{-kInf, -kInf});
    CHECK(leaf1.hi == std::vector<double>{10.0, 5.0});

    const HyperRectangle& leaf4 = annotated.boxes[6];  // score 0.6
    CHECK(leaf4.lo == std::vector<double>{10.0, 8.0});
    CHECK(leaf4.hi == std::vector<double>{kInf, kInf});

    Tree leaf_only;
    leaf_only.nodes.push_back(Node{-1, 0.0, -1, -1, 0.5});
    AnnotatedTree single = annotate(leaf_only, 3);
    CHECK(single.boxes[0].lo == std::vector<double>{-kInf, -kInf, -kInf});
}

TEST_CASE("leaf_distance worked examples") {
    std::vector<double> x{9.1, 0.1};

    HyperRectangle leaf2{{-kInf, 5.0}, {10.0, 8.0}};
    std::vector<double> d2 = leaf_distance(x, leaf2);
    CHECK(d2[0] == 0.0);
    CHECK(d2[1] == doctest::Approx(4.9).epsilon(1e-12));
    CHECK(d2[1] > 4.9);  // strictly enters the half-open interval

    HyperRectangle leaf3{{10.0, -kInf}, {kInf, 8.0}};
    std::vector<double> d3 = leaf_distance(x, leaf3);
    CHECK(d3[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(d3[0] > 0.9);
    CHECK(d3[1] == 0.0);

    HyperRectangle inside{{9.0, 0.0}, {10.0, 1.0}};
    std::vector<double> d_inside = leaf_distance(x, inside);
    CHECK(d_inside == std::vector<double>{0.0, 0.0});

    HyperRectangle empty{{1.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(leaf_distance(x, empty), InputError);
}

TEST_CASE("interval entry lands strictly inside the box") {
    Rng rng(5);
    for (int it = 0; it < 2000; ++it) {
        double lo = rng.uniform(-100.0, 100.0);
        double hi = lo + rng.uniform(1e-9, 50.0);
        double x = rng.uniform(-200.0, 200.0);
        double d = interval_delta(x, lo, hi);
        double landed = x + d;
        CHECK(landed > lo);
        CHECK(landed <= hi);
        if (x > lo && x <= hi) CHECK(d == 0.0);
    }
}

TEST_CASE("leaf_distance is minimal against random sampled points") {
    Rng rng(9);
    for (int box_case = 0; box_case < 20; ++box_case) {
        int d = rng.range(2, 4);
        HyperRectangle box;
        std::vector<double> x(d);
        for (int f = 0; f < d; ++f) {
            double lo = rng.uniform(-5.0, 5.0);
            box.lo.push_back(lo);
            box.hi.push_back(lo + rng.uniform(0.2, 2.0));
            x[f] = rng.uniform(-8.0, 8.0);
        }
        std::vector<double> delta = leaf_distance(x, box);
        for (NormOrder norm : {NormOrder{NormOrder::kInf}, NormOrder{1}, NormOrder{2}}) {
            double reference = norm_pow(delta, norm);
            for (int sample = 0; sample < 10000; ++sample) {
                std::vector<double> z(d);
                std::vector<double> move(d);
                for (int f = 0; f < d; ++f) {
                    z[f] = rng.uniform(std::nextafter(box.lo[f], 1e300), box.hi[f]);
                    move[f] = z[f] - x[f];
                }
                CHECK(norm_pow(move, norm) >= reference - 1e-12);
            }
        }
    }
}

TEST_CASE("exactly one leaf box contains any point and matches traversal") {
    Rng rng(13);
    for (int it = 0; it < 50; ++it) {
        RandomModelSpec spec;
        spec.trees = 1;
        spec.max_depth = rng.range(1, 6);
        spec.dimensionality = rng.range(2, 6);
        spec.budget = 0.25;
        spec.seed = 1000 + it;
        Ensemble model = random_large_spread_ensemble(spec);
        const Tree& tree = model.trees[0];
        AnnotatedTree annotated = annotate(tree, spec.dimensionality);
        for (int probe = 0; probe < 20; ++probe) {
            std::vector<double> x = random_instance(spec, model, probe);
            int containing = -1;
            int count = 0;
            for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                if (!tree.nodes[i].is_leaf()) continue;
                if (annotated.boxes[i].empty()) continue;
                if (annotated.boxes[i].contains(x)) {
                    containing = static_cast<int>(i);
                    ++count;
                }
            }
            CHECK(count == 1);
            CHECK(containing == tree_predict_leaf(tree, x));
        }
    }
}

TEST_CASE("reachable leaves: worked examples") {
    Tree tree = testutil::example_tree();
    std::vector<double> x{9.1, 0.1};

    SUBCASE("L-inf, budget 1: original leaf plus the 0.9-away leaf") {
        auto leaves = reachable_leaves(tree, x, {NormOrder{NormOrder::kInf}, 1.0, 6});
        REQUIRE(leaves.size() == 2);
        CHECK(leaves[0].score == 0.2);
        CHECK(leaves[0].cost == 0.0);
        CHECK(leaves[1].score == 0.3);
        CHECK(leaves[1].cost == doctest::Approx(0.9).epsilon(1e-12));
    }
    SUBCASE("budget 0 reaches only the original leaf") {
        auto leaves = reachable_leaves(tree, x, {NormOrder{NormOrder::kInf}, 0.0, 6});
        REQUIRE(leaves.size() == 1);
        CHECK(leaves[0].score == 0.2);
        CHECK(leaves[0].delta.empty());
    }
    SUBCASE("L0 with budget 2 reaches all four leaves") {
        auto leaves = reachable_leaves(tree, x, {NormOrder{0}, 2.0, 6});
        CHECK(leaves.size() == 4);
    }
}

TEST_CASE("reachable leaves skip dead branches") {
    // Root splits f0 at 5; its left child splits f0 at 7, whose right branch
    // (5, 7] intersected with (7, inf) is empty.
    Tree tree;
    tree.nodes.resize(5);
    tree.nodes[0] = Node{0, 5.0, 1, 4, 0.0};
    tree.nodes[1] = Node{0, 7.0, 2, 3, 0.0};
    tree.nodes[2] = Node{-1, 0.0, -1, -1, 1.0};
    tree.nodes[3] = Node{-1, 0.0, -1, -1, 2.0};  // dead leaf
    tree.nodes[4] = Node{-1, 0.0, -1, -1, 3.0};
    auto leaves =
        reachable_leaves(tree, std::vector<double>{4.0}, {NormOrder{NormOrder::kInf}, 100.0, 6});
    CHECK(leaves.size() == 2);
    for (const ReachableLeaf& leaf : leaves) CHECK(leaf.score != 2.0);
}

TEST_CASE("reachable_leaves matches the naive box method on random trees") {
    Rng rng(21);
    for (int it = 0; it < 120; ++it) {
        RandomModelSpec spec;
        spec.trees = 1;
        spec.max_depth = rng.range(1, 6);
        spec.dimensionality = rng.range(2, 8);
        spec.budget = rng.uniform(0.05, 0.8);
        spec.seed = 3000 + it;
        int norm_pick = rng.range(0, 3);
        spec.norm = norm_pick == 0 ? NormOrder{NormOrder::kInf} : NormOrder{norm_pick - 1};
        if (spec.norm.is_zero()) spec.budget = rng.range(0, 3);
        Ensemble model = random_large_spread_ensemble(spec);
        AttackerSpec attacker{spec.norm, spec.budget, 6};
        for (int probe = 0; probe < 5; ++probe) {
            std::vector<double> x = random_instance(spec, model, probe);
            auto fast = reachable_leaves(model.trees[0], x, attacker);
            auto naive = testutil::naive_reachable_leaves(model.trees[0], x, attacker);
            REQUIRE(fast.size() == naive.size());
            for (std::size_t i = 0; i < fast.size(); ++i) {
                CHECK(fast[i].leaf == naive[i].leaf);
                CHECK(fast[i].cost_pow == naive[i].cost_pow);
                REQUIRE(fast[i].delta.size() == naive[i].delta.size());
                for (std::size_t j = 0; j < fast[i].delta.size(); ++j) {
                    CHECK(fast[i].delta[j].feature == naive[i].delta[j].feature);
                    CHECK(fast[i].delta[j].delta == naive[i].delta[j].delta);
                }
            }
        }
    }
}

TEST_CASE("reachable set grows with the budget") {
    Rng rng(33);
    for (int it = 0; it < 60; ++it) {
        RandomModelSpec spec;
        spec.trees = 1;
        spec.max_depth = 4;
        spec.dimensionality = 4;
        spec.budget = 1.0;
        spec.seed = 4000 + it;
        Ensemble model = random_large_spread_ensemble(spec);
        std::vector<double> x = random_instance(spec, model, it);
        double k1 = rng.uniform(0.0, 0.5);
        double k2 = k1 + rng.uniform(0.0, 0.5);
        auto small = reachable_leaves(model.trees[0], x, {NormOrder{NormOrder::kInf}, k1, 6});
        auto large = reachable_leaves(model.trees[0], x, {NormOrder{NormOrder::kInf}, k2, 6});
        for (const ReachableLeaf& leaf : small) {
            bool present = false;
            for (const ReachableLeaf& other : large) present = present || other.leaf == leaf.leaf;
            CHECK(present);
        }
    }
}

TEST_CASE("p-spread worked examples") {
    SUBCASE("two stumps on one feature") {
        Ensemble model = testutil::make_ensemble(
            {testutil::stump(0, 5.0, 0.0, 1.0), testutil::stump(0, 5.3, 0.0, 1.0)}, 1);
        SpreadReport report = p_spread(model, NormOrder{1});
        CHECK(report.psi == doctest::Approx(0.3));
        REQUIRE(report.witness.has_value());
        CHECK(report.witness->feature == 0);
        CHECK(check_large_spread(model, {NormOrder{1}, 0.1, 6}));
        CHECK_FALSE(check_large_spread(model, {NormOrder{1}, 0.15, 6}));
    }
    SUBCASE("single tree has infinite spread") {
        Ensemble model = testutil::make_ensemble({testutil::example_tree()}, 2);
        CHECK(p_spread(model, NormOrder{2}).psi == kInf);
        CHECK(check_large_spread(model, {NormOrder{2}, 1e12, 6}));
    }
    SUBCASE("disjoint features have infinite spread") {
        Ensemble model = testutil::two_stumps();
        CHECK(p_spread(model, NormOrder{1}).psi == kInf);
    }
    SUBCASE("identical cross-tree thresholds give zero spread") {
        Ensemble model = testutil::make_ensemble(
            {testutil::stump(0, 5.0, 0.0, 1.0), testutil::stump(0, 5.0, 0.0, 2.0)}, 1);
        SpreadReport report = p_spread(model, NormOrder{1});
        CHECK(report.psi == 0.0);
        CHECK_FALSE(check_large_spread(model, {NormOrder{1}, 0.1, 6}));
    }
    SUBCASE("p = 0 forbids any shared feature") {
        Ensemble shared = testutil::make_ensemble(
            {testutil::stump(0, 1.0, 0.0, 1.0), testutil::stump(0, 100.0, 0.0, 1.0)}, 1);
        CHECK(p_spread(shared, NormOrder{0}).psi == 1.0);
        CHECK_FALSE(check_large_spread(shared, {NormOrder{0}, 1.0, 6}));
        CHECK(check_large_spread(testutil::two_stumps(), {NormOrder{0}, 5.0, 6}));
    }
}

TEST_CASE("require_large_spread names the witnessing pair") {
    Ensemble model = testutil::make_ensemble(
        {testutil::stump(2, 5.0, 0.0, 1.0), testutil::stump(2, 5.1, 0.0, 1.0)}, 4);
    try {
        require_large_spread(model, {NormOrder{NormOrder::kInf}, 0.2, 6});
        FAIL("expected SpreadError");
    } catch (const SpreadError& e) {
        std::string message = e.what();
        CHECK(message.find("feature 2") != std::string::npos);
    }
}

TEST_CASE("generated models satisfy their spread constraint") {
    for (int it = 0; it < 40; ++it) {
        RandomModelSpec spec;
        spec.trees = 2 + it % 5;
        spec.max_depth = 1 + it % 3;
        spec.dimensionality = 4 + it % 5;
        spec.budget = 0.05 + 0.01 * it;
        spec.norm = it % 4 == 0 ? NormOrder{NormOrder::kInf} : NormOrder{it % 4 - 1};
        if (spec.norm.is_zero()) spec.budget = 1 + it % 3;
        spec.seed = 7000 + it;
        Ensemble model = random_large_spread_ensemble(spec);
        CHECK(check_large_spread(model, {spec.norm, spec.budget, 6}));
    }
}
