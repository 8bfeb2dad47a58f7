#include "ltmtex/forest.hpp"

#include "ltmtex/error.hpp"
#include "ltmtex/format.hpp"
#include "ltmtex/parallel.hpp"
#include "ltmtex/random.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace ltmtex {

namespace {

constexpr std::string_view kModelMagic = "ltmtex-forest";
constexpr int kModelVersion = 1;

struct LabelIndex {
    std::vector<int> labels;

    explicit LabelIndex(std::vector<int> sorted) : labels(std::move(sorted)) {}

    int index_of(int label) const {
        const auto it = std::ranges::lower_bound(labels, label);
        if (it == labels.end() || *it != label) return -1;
        return static_cast<int>(it - labels.begin());
    }
};

std::vector<int> sorted_labels(const std::vector<Sample>& samples) {
    std::vector<int> labels;
    labels.reserve(samples.size());
    for (const auto& s : samples) labels.push_back(s.label);
    std::ranges::sort(labels);
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

std::size_t validate_samples(const std::vector<Sample>& samples) {
    if (samples.size() < 2) throw ValidationError("training needs at least 2 samples, got " + std::to_string(samples.size()));
    const std::size_t dims = samples.front().features.size();
    if (dims == 0) throw ValidationError("training samples have no features");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].features.size() != dims) {
            throw ValidationError("sample " + std::to_string(i) + " has " + std::to_string(samples[i].features.size()) +
                                  " features, expected " + std::to_string(dims));
        }
        for (double v : samples[i].features) {
            if (std::isnan(v)) throw ValidationError("sample " + std::to_string(i) + " contains NaN");
        }
    }
    return dims;
}

std::uint64_t sum_of_squares(const std::vector<std::uint32_t>& counts) {
    std::uint64_t s = 0;
    for (auto c : counts) s += static_cast<std::uint64_t>(c) * c;
    return s;
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<Sample>& samples, const std::vector<int>& class_of, std::size_t classes,
                std::size_t dims, const ForestParams& params, std::uint64_t seed)
        : samples_(samples), class_of_(class_of), classes_(classes), dims_(dims), params_(params), rng_(seed) {
        feature_pool_.resize(dims_);
        std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
        candidates_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dims_))));
    }

    DecisionTree grow() {
        const std::size_t n = samples_.size();
        std::vector<int> bootstrap(n);
        for (auto& b : bootstrap) b = static_cast<int>(uniform_index(rng_, n));

        DecisionTree tree;
        tree.nodes.emplace_back();
        struct Work {
            int node;
            std::vector<int> rows;
            int depth;
        };
        std::vector<Work> stack;
        stack.push_back({0, std::move(bootstrap), 0});
        while (!stack.empty()) {
            Work w = std::move(stack.back());
            stack.pop_back();
            auto& counts = tree.nodes[w.node].counts;
            counts.assign(classes_, 0);
            for (int r : w.rows) ++counts[class_of_[r]];

            const bool pure = std::ranges::count_if(counts, [](auto c) { return c > 0; }) <= 1;
            const bool too_small = static_cast<int>(w.rows.size()) < params_.min_samples_split;
            const bool too_deep = params_.max_depth && w.depth >= *params_.max_depth;
            if (pure || too_small || too_deep) continue;

            const Split split = best_split(w.rows, counts);
            if (split.feature < 0) continue;

            std::vector<int> left, right;
            for (int r : w.rows) {
                (samples_[r].features[split.feature] <= split.threshold ? left : right).push_back(r);
            }
            const int left_id = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[w.node];
            node.feature = split.feature;
            node.threshold = split.threshold;
            node.gini_decrease = split.decrease;
            node.left = left_id;
            node.right = left_id + 1;
            // Right pushed first so the left subtree is expanded first.
            stack.push_back({left_id + 1, std::move(right), w.depth + 1});
            stack.push_back({left_id, std::move(left), w.depth + 1});
        }
        return tree;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double decrease = 0.0;
    };

    // Draws features without replacement until `candidates_` non-constant
    // ones have been scored or the pool is exhausted.
    Split best_split(const std::vector<int>& rows, const std::vector<std::uint32_t>& counts) {
        const double n = static_cast<double>(rows.size());
        Split best;
        double best_score = -1.0;
        std::size_t scored = 0;
        std::vector<std::pair<double, int>> column(rows.size());
        std::vector<std::uint32_t> left(classes_), right(classes_);

        for (std::size_t j = 0; j < dims_ && scored < candidates_; ++j) {
            const std::size_t pick = j + uniform_index(rng_, dims_ - j);
            std::swap(feature_pool_[j], feature_pool_[pick]);
            const int f = feature_pool_[j];

            bool constant = true;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                column[i] = {samples_[rows[i]].features[f], class_of_[rows[i]]};
                constant = constant && column[i].first == column[0].first;
            }
            if (constant) continue;
            ++scored;
            std::ranges::sort(column);

            std::ranges::fill(left, 0);
            right = counts;
            std::uint64_t sq_left = 0;
            std::uint64_t sq_right = sum_of_squares(counts);
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                const int c = column[i].second;
                sq_left += 2ULL * left[c] + 1;
                sq_right -= 2ULL * right[c] - 1;
                ++left[c];
                --right[c];
                if (column[i].first == column[i + 1].first) continue;
                const double n_left = static_cast<double>(i + 1);
                const double n_right = n - n_left;
                const double score = static_cast<double>(sq_left) / n_left + static_cast<double>(sq_right) / n_right;
                if (score > best_score) {
                    best_score = score;
                    double threshold = 0.5 * (column[i].first + column[i + 1].first);
                    if (!(threshold < column[i + 1].first)) threshold = column[i].first;
                    best = {f, threshold, 0.0};
                }
            }
        }
        if (best.feature >= 0) {
            const double parent = static_cast<double>(sum_of_squares(counts)) / n;
            best.decrease = std::max(0.0, (best_score - parent) / n);
        }
        return best;
    }

    const std::vector<Sample>& samples_;
    const std::vector<int>& class_of_;
    std::size_t classes_;
    std::size_t dims_;
    const ForestParams& params_;
    Rng rng_;
    std::vector<int> feature_pool_;
    std::size_t candidates_;
};

int argmax_lowest(const std::vector<std::uint32_t>& counts) {
    int best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i)
        if (counts[i] > counts[best]) best = static_cast<int>(i);
    return best;
}

EvalReport finish_report(std::vector<double> accuracies, std::vector<int> labels,
                         std::vector<std::vector<std::uint64_t>> confusion) {
    EvalReport r;
    r.fold_accuracies = std::move(accuracies);
    const double k = static_cast<double>(r.fold_accuracies.size());
    r.mean = std::accumulate(r.fold_accuracies.begin(), r.fold_accuracies.end(), 0.0) / k;
    double var = 0.0;
    for (double a : r.fold_accuracies) var += (a - r.mean) * (a - r.mean);
    r.std = std::sqrt(var / k);
    r.class_labels = std::move(labels);
    r.confusion = std::move(confusion);
    return r;
}

// Predicts every test sample, accumulates into `confusion`, returns accuracy.
double score_into(const ForestModel& model, const std::vector<Sample>& test, const LabelIndex& index,
                  std::vector<std::vector<std::uint64_t>>& confusion) {
    std::size_t correct = 0;
    for (const auto& s : test) {
        const int predicted = predict(model, s.features);
        correct += predicted == s.label;
        ++confusion[index.index_of(s.label)][index.index_of(predicted)];
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

void ForestParams::validate() const {
    if (n_trees < 1) throw ValidationError("forest.n_trees must be >= 1");
    if (min_samples_split < 2) throw ValidationError("forest.min_samples_split must be >= 2");
    if (max_depth && *max_depth < 1) throw ValidationError("forest.max_depth must be >= 1 when set");
    if (threads < 1) throw ValidationError("threads must be >= 1");
}

int DecisionTree::leaf_for(const std::vector<double>& x) const {
    int id = 0;
    while (!nodes[id].is_leaf()) id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    return id;
}

ForestModel train(const std::vector<Sample>& samples, const ForestParams& params) {
    params.validate();
    const std::size_t dims = validate_samples(samples);
    ForestModel model;
    model.class_labels = sorted_labels(samples);
    if (model.class_labels.size() < 2) throw ValidationError("training needs at least 2 classes");
    model.feature_count = dims;
    model.params = params;

    const LabelIndex index(model.class_labels);
    std::vector<int> class_of(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) class_of[i] = index.index_of(samples[i].label);

    model.trees.resize(static_cast<std::size_t>(params.n_trees));
    parallel_for(model.trees.size(), params.threads, [&](std::size_t t) {
        TreeBuilder builder(samples, class_of, model.class_labels.size(), dims, params, params.seed ^ t);
        model.trees[t] = builder.grow();
    });
    return model;
}

int predict(const ForestModel& model, const std::vector<double>& x) {
    if (x.size() != model.feature_count) {
        throw ValidationError("feature vector has " + std::to_string(x.size()) + " dimensions, model expects " +
                              std::to_string(model.feature_count));
    }
    std::vector<std::uint32_t> votes(model.class_labels.size(), 0);
    for (const auto& tree : model.trees) ++votes[argmax_lowest(tree.nodes[tree.leaf_for(x)].counts)];
    return model.class_labels[argmax_lowest(votes)];
}

std::vector<int> assign_folds(const std::vector<Sample>& samples, int folds, std::uint64_t seed) {
    if (folds < 2) throw ValidationError("folds must be >= 2");
    if (static_cast<std::size_t>(folds) > samples.size()) {
        throw ValidationError("folds (" + std::to_string(folds) + ") exceed sample count (" +
                              std::to_string(samples.size()) + ")");
    }
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < samples.size(); ++i) by_class[samples[i].label].push_back(static_cast<int>(i));

    Rng rng(mix_seed(seed));
    std::vector<int> fold_of(samples.size(), -1);
    std::size_t dealt = 0;
    for (auto& [label, members] : by_class) {
        shuffle(std::span<int>(members), rng);
        for (int idx : members) fold_of[idx] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
    }
    return fold_of;
}

EvalReport cross_validate(const std::vector<Sample>& samples, const ForestParams& params, int folds) {
    params.validate();
    validate_samples(samples);
    const auto fold_of = assign_folds(samples, folds, params.seed);
    const LabelIndex index(sorted_labels(samples));
    const std::size_t classes = index.labels.size();
    std::vector<std::vector<std::uint64_t>> confusion(classes, std::vector<std::uint64_t>(classes, 0));

    std::vector<double> accuracies;
    for (int f = 0; f < folds; ++f) {
        std::vector<Sample> train_set, test_set;
        for (std::size_t i = 0; i < samples.size(); ++i) (fold_of[i] == f ? test_set : train_set).push_back(samples[i]);
        const ForestModel model = train(train_set, params);
        accuracies.push_back(score_into(model, test_set, index, confusion));
    }
    return finish_report(std::move(accuracies), index.labels, std::move(confusion));
}

EvalReport evaluate_split(const std::vector<Sample>& train_set, const std::vector<Sample>& test_set,
                          const ForestParams& params) {
    if (test_set.empty()) throw ValidationError("test set is empty");
    const ForestModel model = train(train_set, params);
    std::vector<Sample> all = train_set;
    all.insert(all.end(), test_set.begin(), test_set.end());
    const LabelIndex index(sorted_labels(all));
    const std::size_t classes = index.labels.size();
    std::vector<std::vector<std::uint64_t>> confusion(classes, std::vector<std::uint64_t>(classes, 0));
    const double acc = score_into(model, test_set, index, confusion);
    return finish_report({acc}, index.labels, std::move(confusion));
}

void save_model(const ForestModel& model, std::ostream& out) {
    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "classes " << model.class_labels.size();
    for (int l : model.class_labels) out << ' ' << l;
    out << "\nfeatures " << model.feature_count << '\n';
    out << "params " << model.params.n_trees << ' ' << model.params.min_samples_split << ' '
        << model.params.max_depth.value_or(-1) << ' ' << model.params.seed << '\n';
    out << "trees " << model.trees.size() << '\n';
    for (const auto& tree : model.trees) {
        out << "tree " << tree.nodes.size() << '\n';
        for (const auto& n : tree.nodes) {
            out << n.feature << ' ' << format_roundtrip(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
                << format_roundtrip(n.gini_decrease);
            for (auto c : n.counts) out << ' ' << c;
            out << '\n';
        }
    }
}

ForestModel load_model(std::istream& in) {
    auto fail = [](const std::string& what) -> ValidationError { return ValidationError("model file: " + what); };
    auto expect = [&](std::string_view keyword) {
        std::string word;
        if (!(in >> word) || word != keyword) throw fail("expected '" + std::string(keyword) + "'");
    };

    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kModelMagic) throw fail("not an ltmtex forest");
    if (version != kModelVersion) throw fail("unsupported version " + std::to_string(version));

    ForestModel model;
    std::size_t classes = 0;
    expect("classes");
    if (!(in >> classes) || classes < 2) throw fail("bad class count");
    model.class_labels.resize(classes);
    for (auto& l : model.class_labels) in >> l;
    expect("features");
    in >> model.feature_count;
    expect("params");
    int max_depth = -1;
    in >> model.params.n_trees >> model.params.min_samples_split >> max_depth >> model.params.seed;
    if (max_depth > 0) model.params.max_depth = max_depth;
    std::size_t tree_count = 0;
    expect("trees");
    if (!(in >> tree_count)) throw fail("bad tree count");

    model.trees.resize(tree_count);
    for (auto& tree : model.trees) {
        std::size_t node_count = 0;
        expect("tree");
        if (!(in >> node_count) || node_count == 0) throw fail("bad node count");
        tree.nodes.resize(node_count);
        for (auto& n : tree.nodes) {
            std::string threshold, decrease;
            in >> n.feature >> threshold >> n.left >> n.right >> decrease;
            n.threshold = parse_double(threshold);
            n.gini_decrease = parse_double(decrease);
            n.counts.resize(classes);
            for (auto& c : n.counts) in >> c;
            if (!in) throw fail("truncated node record");
            const auto limit = static_cast<int>(node_count);
            if (!n.is_leaf() && (n.feature >= static_cast<int>(model.feature_count) || n.left <= 0 ||
                                 n.right <= 0 || n.left >= limit || n.right >= limit)) {
                throw fail("node references out of range");
            }
        }
    }
    return model;
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "fold,accuracy\n";
    for (std::size_t i = 0; i < report.fold_accuracies.size(); ++i)
        out << i + 1 << ',' << format_fixed(report.fold_accuracies[i], 6) << '\n';
    out << "mean," << format_fixed(report.mean, 6) << '\n';
    out << "std," << format_fixed(report.std, 6) << '\n';
    out << "\ntrue\\predicted";
    for (int l : report.class_labels) out << ',' << l;
    out << '\n';
    for (std::size_t r = 0; r < report.confusion.size(); ++r) {
        out << report.class_labels[r];
        for (auto c : report.confusion[r]) out << ',' << c;
        out << '\n';
    }
    return out.str();
}

}  // namespace ltmtex
