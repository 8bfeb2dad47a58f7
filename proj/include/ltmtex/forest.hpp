#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ltmtex {

struct Sample {
    std::vector<double> features;
    int label = 0;
};

enum class FeaturesPerSplit { SqrtOfDims };

struct ForestParams {
    int n_trees = 10;
    int min_samples_split = 2;
    std::optional<int> max_depth;
    FeaturesPerSplit features_per_split = FeaturesPerSplit::SqrtOfDims;
    std::uint64_t seed = 42;
    /// Worker threads for tree growth. Results do not depend on it.
    int threads = 1;

    void validate() const;
};

/// Flat node array; node 0 is the root. Leaves have feature == -1.
struct DecisionTree {
    struct Node {
        int feature = -1;
        double threshold = 0.0;  // go left when x[feature] <= threshold
        int left = -1;
        int right = -1;
        double gini_decrease = 0.0;
        std::vector<std::uint32_t> counts;  // per class index, training samples reaching the node

        bool is_leaf() const { return feature < 0; }
    };

    std::vector<Node> nodes;

    /// Index of the leaf `x` is routed to.
    int leaf_for(const std::vector<double>& x) const;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::vector<int> class_labels;  // sorted ascending; node counts index into this
    std::size_t feature_count = 0;
    ForestParams params;
};

struct EvalReport {
    std::vector<double> fold_accuracies;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over folds
    std::vector<int> class_labels;
    std::vector<std::vector<std::uint64_t>> confusion;  // [true class][predicted class]

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

ForestModel train(const std::vector<Sample>& samples, const ForestParams& params);

int predict(const ForestModel& model, const std::vector<double>& x);

/// Stratified k-fold cross-validation. Each class is shuffled with a stream
/// derived from params.seed and dealt round-robin into the folds.
EvalReport cross_validate(const std::vector<Sample>& samples, const ForestParams& params, int folds);

/// Fold assignment used by cross_validate: fold index per sample.
std::vector<int> assign_folds(const std::vector<Sample>& samples, int folds, std::uint64_t seed);

/// Train once on `train_set`, evaluate once on `test_set`.
EvalReport evaluate_split(const std::vector<Sample>& train_set, const std::vector<Sample>& test_set,
                          const ForestParams& params);

void save_model(const ForestModel& model, std::ostream& out);
ForestModel load_model(std::istream& in);

std::string report_csv(const EvalReport& report);

}  // namespace ltmtex
