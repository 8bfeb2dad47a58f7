#include "ltmtex/error.hpp"
#include "ltmtex/forest.hpp"
#include "ltmtex/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace ltmtex {
namespace {

// Feature 0 below 10 for class 0 and above 20 for class 1; the rest is noise.
std::vector<Sample> separable(std::size_t n, std::uint64_t seed, std::size_t noise_dims = 3) {
    Rng rng(seed);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        s.label = static_cast<int>(i % 2);
        s.features.push_back(s.label == 0 ? uniform_real(rng, 0, 10) : uniform_real(rng, 20, 30));
        for (std::size_t d = 0; d < noise_dims; ++d) s.features.push_back(uniform_real(rng, 0, 30));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Sample> gaussian_blobs(int classes, int per_class, int dims, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> out;
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < per_class; ++i) {
            Sample s;
            s.label = c;
            for (int d = 0; d < dims; ++d) s.features.push_back((d % classes == c ? 4.0 : 0.0) + standard_normal(rng));
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::string serialize(const ForestModel& m) {
    std::ostringstream out;
    save_model(m, out);
    return out.str();
}

TEST(Train, SeparableDataFitsPerfectly) {
    const auto data = separable(20, 1, 0);
    ForestParams params;
    const auto model = train(data, params);
    EXPECT_EQ(model.trees.size(), 10u);
    EXPECT_EQ(model.class_labels, (std::vector<int>{0, 1}));
    for (const auto& s : data) EXPECT_EQ(predict(model, s.features), s.label);
}

TEST(Train, DeterministicForSeedAndIndependentOfThreads) {
    const auto data = gaussian_blobs(3, 30, 8, 5);
    ForestParams params;
    params.seed = 1234;
    const auto a = train(data, params);
    const auto b = train(data, params);
    params.threads = 4;
    const auto c = train(data, params);
    EXPECT_EQ(serialize(a), serialize(b));
    EXPECT_EQ(serialize(a), serialize(c));

    Rng rng(9);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x(8);
        for (auto& v : x) v = uniform_real(rng, -3, 7);
        EXPECT_EQ(predict(a, x), predict(b, x));
    }

    params.seed = 1235;
    params.threads = 1;
    EXPECT_NE(serialize(train(data, params)), serialize(a));
}

TEST(Train, NodeInvariants) {
    const auto data = gaussian_blobs(4, 25, 16, 3);
    ForestParams params;
    params.n_trees = 5;
    const auto model = train(data, params);
    for (const auto& tree : model.trees) {
        std::uint64_t root = 0;
        for (auto c : tree.nodes[0].counts) root += c;
        EXPECT_EQ(root, data.size());
        for (const auto& node : tree.nodes) {
            ASSERT_EQ(node.counts.size(), 4u);
            if (node.is_leaf()) continue;
            EXPECT_LT(node.feature, 16);
            EXPECT_GE(node.gini_decrease, 0.0);
            const auto& l = tree.nodes[node.left].counts;
            const auto& r = tree.nodes[node.right].counts;
            for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(node.counts[c], l[c] + r[c]);
        }
    }
    std::size_t correct = 0;
    for (const auto& s : data) correct += predict(model, s.features) == s.label;
    EXPECT_GE(static_cast<double>(correct) / data.size(), 0.95);
}

TEST(Train, MaxDepthLimitsGrowth) {
    const auto data = gaussian_blobs(4, 25, 16, 3);
    ForestParams params;
    params.max_depth = 1;
    const auto model = train(data, params);
    for (const auto& tree : model.trees) EXPECT_LE(tree.nodes.size(), 3u);
}

TEST(Train, RejectsDegenerateInput) {
    ForestParams params;
    EXPECT_THROW(train({}, params), ValidationError);
    EXPECT_THROW(train({{{1.0}, 0}}, params), ValidationError);
    EXPECT_THROW(train({{{1.0}, 0}, {{2.0}, 0}}, params), ValidationError);
    EXPECT_THROW(train({{{1.0}, 0}, {{2.0, 3.0}, 1}}, params), ValidationError);
    EXPECT_THROW(train({{{}, 0}, {{}, 1}}, params), ValidationError);
    EXPECT_THROW(train({{{std::nan("")}, 0}, {{1.0}, 1}}, params), ValidationError);

    const auto data = separable(10, 1);
    params.n_trees = 0;
    EXPECT_THROW(train(data, params), ValidationError);
    params = {};
    params.min_samples_split = 1;
    EXPECT_THROW(train(data, params), ValidationError);
}

TEST(Predict, SingleTreePureLeaf) {
    ForestModel m;
    m.class_labels = {2, 5};
    m.feature_count = 1;
    DecisionTree t;
    t.nodes.resize(3);
    t.nodes[0] = {0, 0.5, 1, 2, 0.5, {3, 3}};
    t.nodes[1].counts = {3, 0};
    t.nodes[2].counts = {0, 3};
    m.trees = {t};
    EXPECT_EQ(predict(m, {0.0}), 2);
    EXPECT_EQ(predict(m, {1.0}), 5);
}

TEST(Predict, VoteTieGoesToLowestLabel) {
    ForestModel m;
    m.class_labels = {3, 7};
    m.feature_count = 1;
    DecisionTree a, b;
    a.nodes.resize(3);
    a.nodes[0] = {0, 0.5, 1, 2, 0.5, {2, 2}};
    a.nodes[1].counts = {2, 0};
    a.nodes[2].counts = {0, 2};
    b = a;
    std::swap(b.nodes[1].counts, b.nodes[2].counts);
    m.trees = {a, b};
    EXPECT_EQ(predict(m, {0.0}), 3);
    EXPECT_EQ(predict(m, {1.0}), 3);
    m.trees = {b, a};
    EXPECT_EQ(predict(m, {1.0}), 3);
    m.trees = {a, a};
    EXPECT_EQ(predict(m, {1.0}), 7);
}

TEST(Predict, DimensionMismatch) {
    const auto model = train(separable(20, 1), {});
    EXPECT_THROW(predict(model, {1.0}), ValidationError);
    EXPECT_THROW(predict(model, std::vector<double>(5, 0.0)), ValidationError);
}

TEST(CrossValidate, SeparableDataIsPerfect) {
    const auto report = cross_validate(separable(40, 2), {}, 10);
    ASSERT_EQ(report.fold_accuracies.size(), 10u);
    EXPECT_EQ(report.mean, 1.0);
    EXPECT_EQ(report.std, 0.0);
    EXPECT_EQ(report.confusion, (std::vector<std::vector<std::uint64_t>>{{20, 0}, {0, 20}}));
}

TEST(CrossValidate, PermutedLabelsStayNearChance) {
    auto data = gaussian_blobs(4, 50, 16, 11);
    std::vector<int> labels;
    for (const auto& s : data) labels.push_back(s.label);
    Rng rng(77);
    shuffle(std::span<int>(labels), rng);
    for (std::size_t i = 0; i < data.size(); ++i) data[i].label = labels[i];

    const auto report = cross_validate(data, {}, 10);
    const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(data.size()));
    EXPECT_NEAR(report.mean, 0.25, 3 * sigma);
}

TEST(CrossValidate, ReportIsReproducible) {
    const auto data = gaussian_blobs(3, 20, 6, 8);
    ForestParams params;
    params.seed = 99;
    const auto a = cross_validate(data, params, 5);
    params.threads = 3;
    const auto b = cross_validate(data, params, 5);
    EXPECT_EQ(a, b);
    EXPECT_EQ(report_csv(a), report_csv(b));

    double sum = 0;
    for (double f : a.fold_accuracies) sum += f;
    EXPECT_DOUBLE_EQ(a.mean, sum / 5);
    for (std::size_t c = 0; c < 3; ++c) {
        std::uint64_t row = 0;
        for (auto v : a.confusion[c]) row += v;
        EXPECT_EQ(row, 20u);
    }
}

TEST(CrossValidate, FoldsPartitionTheSamples) {
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Sample> data;
        const int n = 10 + static_cast<int>(uniform_index(rng, 90));
        for (int i = 0; i < n; ++i) data.push_back({{0.0}, static_cast<int>(uniform_index(rng, 5))});
        const int folds = 2 + static_cast<int>(uniform_index(rng, 9));
        const auto fold_of = assign_folds(data, folds, trial);
        std::vector<int> sizes(folds, 0);
        for (int f : fold_of) {
            ASSERT_GE(f, 0);
            ASSERT_LT(f, folds);
            ++sizes[f];
        }
        const auto [lo, hi] = std::ranges::minmax(sizes);
        EXPECT_LE(hi - lo, 1);

        // Stratified: per class, fold counts also differ by at most one.
        std::map<int, std::vector<int>> per_class;
        for (std::size_t i = 0; i < data.size(); ++i) {
            auto& v = per_class[data[i].label];
            v.resize(folds, 0);
            ++v[fold_of[i]];
        }
        for (const auto& [label, counts] : per_class) {
            const auto [a, b] = std::ranges::minmax(counts);
            EXPECT_LE(b - a, 1);
        }
    }
}

TEST(CrossValidate, Errors) {
    const auto data = separable(6, 1);
    EXPECT_THROW(cross_validate(data, {}, 7), ValidationError);
    EXPECT_THROW(cross_validate(data, {}, 1), ValidationError);
    EXPECT_NO_THROW(cross_validate(data, {}, 6));
}

TEST(EvaluateSplit, Basics) {
    const auto data = separable(30, 4);
    const auto report = evaluate_split(data, data, {});
    EXPECT_EQ(report.fold_accuracies, std::vector<double>{1.0});
    EXPECT_EQ(report.mean, 1.0);
    EXPECT_EQ(report.std, 0.0);
    EXPECT_THROW(evaluate_split(data, {}, {}), ValidationError);

    const auto train_set = gaussian_blobs(4, 20, 12, 1);
    const auto test_set = gaussian_blobs(4, 20, 12, 2);
    EXPECT_GE(evaluate_split(train_set, test_set, {}).mean, 0.9);
}

TEST(Model, SaveLoadRoundTrip) {
    const auto data = gaussian_blobs(3, 20, 9, 4);
    ForestParams params;
    params.max_depth = 6;
    params.seed = 0xfeedface12345678ULL;
    const auto model = train(data, params);
    const std::string text = serialize(model);
    EXPECT_EQ(text.rfind("ltmtex-forest 1\n", 0), 0u);

    std::istringstream in(text);
    const auto loaded = load_model(in);
    EXPECT_EQ(serialize(loaded), text);
    EXPECT_EQ(loaded.params.seed, params.seed);
    EXPECT_EQ(loaded.params.max_depth, params.max_depth);
    for (const auto& s : data) EXPECT_EQ(predict(loaded, s.features), predict(model, s.features));
}

TEST(Model, RejectsMalformedFiles) {
    const std::string text = serialize(train(separable(20, 1), {}));
    auto load = [](const std::string& t) {
        std::istringstream in(t);
        return load_model(in);
    };
    EXPECT_THROW(load(""), ValidationError);
    EXPECT_THROW(load("something-else 1\n"), ValidationError);
    EXPECT_THROW(load("ltmtex-forest 2\n"), ValidationError);
    EXPECT_THROW(load(text.substr(0, text.size() / 2)), ValidationError);

    std::string bad = text;
    const auto pos = bad.find("tree ");
    const auto line_end = bad.find('\n', pos);
    bad.replace(line_end + 1, bad.find(' ', line_end + 1) - line_end - 1, "99");
    EXPECT_THROW(load(bad), ValidationError);
}

}  // namespace
}  // namespace ltmtex
