#pragma once

#include "ltmtex/dataset.hpp"
#include "ltmtex/features.hpp"
#include "ltmtex/forest.hpp"
#include "ltmtex/lbp.hpp"
#include "ltmtex/ltm.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ltmtex {

inline constexpr int kSpecVersion = 1;

/// Weight values random sweeps draw from.
inline constexpr double kWeightCandidates[] = {0.1, 0.5, 1, 2, 5, 10, 15, 20};

enum class DescriptorKind { Ltm, Olbp, CsLbp, CsLdp, XcsLbp };

std::string_view to_string(DescriptorKind kind);
DescriptorKind parse_descriptor(std::string_view text);

struct Descriptor {
    DescriptorKind kind = DescriptorKind::Ltm;
    LtmConfig ltm = LtmConfig::defaults();
    double cslbp_threshold = 0.0;

    FeatureVector extract(const GrayImage& image) const;
    std::string label() const;
};

struct EvalMode {
    enum class Kind { CrossValidation, Split };
    Kind kind = Kind::CrossValidation;
    int folds = 10;

    /// "cv:<folds>" or "split".
    static EvalMode parse(std::string_view text);
    std::string to_string() const;
};

struct SweepRow {
    std::vector<MomentOrder> orders;
    std::vector<double> weights;
};

/// Weights redrawn `count` times from kWeightCandidates for the base orders.
struct RandomSweep {
    int count = 0;
    std::uint64_t seed = 0;
};

using Sweep = std::variant<std::monostate, std::vector<SweepRow>, RandomSweep>;

struct ExperimentSpec {
    std::string dataset;  // manifest directory or synthetic:<classes>:<per_class>:<seed>[:<size>]
    DescriptorKind descriptor = DescriptorKind::Ltm;
    std::optional<LtmConfig> ltm;
    double cslbp_threshold = 0.0;
    EvalMode eval;
    ForestParams forest;
    Sweep sweep;
    int threads = 1;

    void validate() const;
};

ExperimentSpec parse_experiment_spec(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentSpec& spec);

/// Parses `<path>` as JSON; a relative dataset path resolves against the spec's directory.
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

RandomSweep parse_random_sweep(std::string_view text);

/// The concrete (orders, weights) rows a spec expands to; empty for LBP runs.
std::vector<SweepRow> expand_sweep(const ExperimentSpec& spec);

inline constexpr int kDefaultSyntheticSize = 64;

DatasetSplit resolve_dataset(const std::string& dataset);

/// Extracts one feature vector per image, in order.
std::vector<Sample> extract_samples(const std::vector<LabeledImage>& images, const Descriptor& descriptor,
                                    int threads = 1);

/// Cross-validation pools train and test; split mode trains on train, scores test.
EvalReport evaluate_descriptor(const DatasetSplit& data, const Descriptor& descriptor, const EvalMode& eval,
                               const ForestParams& forest, int threads = 1);

struct ResultRow {
    int experiment = 0;  // 1-based position in the sweep
    Descriptor descriptor;
    std::optional<EvalReport> report;
    std::string error;
};

struct RunResult {
    std::string dataset;
    EvalMode eval;
    std::vector<ResultRow> rows;  // sorted by mean accuracy, descending; failures last

    const ResultRow* best() const;
};

RunResult run_experiment(const ExperimentSpec& spec, const DatasetSplit& data);
RunResult run_experiment(const ExperimentSpec& spec);

std::string results_csv(const RunResult& result);
std::string results_markdown(const RunResult& result);

struct ComparisonTable {
    std::vector<std::string> datasets;
    std::vector<std::string> descriptors;
    // cells[descriptor][dataset]
    std::vector<std::vector<ResultRow>> cells;
};

/// LTM plus the four LBP variants under identical evaluation on every dataset.
ComparisonTable compare_descriptors(const std::vector<DatasetSplit>& datasets, const LtmConfig& ltm,
                                    const ForestParams& forest, const EvalMode& eval, double cslbp_threshold = 0.0,
                                    int threads = 1);

std::string comparison_csv(const ComparisonTable& table);
std::string comparison_markdown(const ComparisonTable& table);

/// "0.96 ± 0.03"
std::string format_accuracy(const EvalReport& report);

}  // namespace ltmtex
