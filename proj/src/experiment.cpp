#include "ltmtex/experiment.hpp"

#include "ltmtex/error.hpp"
#include "ltmtex/format.hpp"
#include "ltmtex/parallel.hpp"
#include "ltmtex/random.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace ltmtex {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw ValidationError("spec field '" + field + "': " + what);
}

std::vector<std::string> split_colon(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(':', start);
        parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

template <typename Int>
Int parse_integer(std::string_view text, const std::string& field) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        field_error(field, "expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

void check_keys(const json& obj, const std::string& field, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) field_error(field, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            field_error(field.empty() ? key : field + "." + key, "unknown key");
        }
    }
}

MomentOrder order_from_json(const json& j, const std::string& field) {
    if (j.is_string()) {
        try {
            return parse_order(j.get<std::string>());
        } catch (const ValidationError& e) {
            field_error(field, e.what());
        }
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
        return {j[0].get<int>(), j[1].get<int>()};
    }
    field_error(field, "expected \"Mpq\" or [p, q]");
}

std::vector<MomentOrder> orders_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) field_error(field, "expected an array");
    std::vector<MomentOrder> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(order_from_json(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> weights_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) field_error(field, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) field_error(field + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(j[i].get<double>());
    }
    return out;
}

json orders_to_json(const std::vector<MomentOrder>& orders) {
    json a = json::array();
    for (const auto& o : orders) a.push_back(format_order(o));
    return a;
}

std::string join_orders(const std::vector<MomentOrder>& orders) {
    std::string s;
    for (const auto& o : orders) s += (s.empty() ? "" : " ") + format_order(o);
    return s;
}

std::string join_weights(const std::vector<double>& weights) {
    std::string s;
    for (double w : weights) s += (s.empty() ? "" : " ") + format_weight(w);
    return s;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::vector<Descriptor> sweep_descriptors(const ExperimentSpec& spec) {
    if (spec.descriptor != DescriptorKind::Ltm) {
        Descriptor d;
        d.kind = spec.descriptor;
        d.cslbp_threshold = spec.cslbp_threshold;
        return {d};
    }
    std::vector<Descriptor> out;
    for (const auto& row : expand_sweep(spec)) {
        Descriptor d;
        d.ltm = *spec.ltm;
        d.ltm.orders = row.orders;
        d.ltm.weights = row.weights;
        out.push_back(std::move(d));
    }
    return out;
}

ResultRow evaluate_row(int experiment, const Descriptor& d, const DatasetSplit& data, const EvalMode& eval,
                       const ForestParams& forest, int threads) {
    ResultRow row;
    row.experiment = experiment;
    row.descriptor = d;
    try {
        row.report = evaluate_descriptor(data, d, eval, forest, threads);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

std::string row_accuracy(const ResultRow& row) {
    return row.report ? format_accuracy(*row.report) : "error: " + row.error;
}

}  // namespace

std::string_view to_string(DescriptorKind kind) {
    switch (kind) {
        case DescriptorKind::Ltm: return "ltm";
        case DescriptorKind::Olbp: return "olbp";
        case DescriptorKind::CsLbp: return "cslbp";
        case DescriptorKind::CsLdp: return "csldp";
        case DescriptorKind::XcsLbp: return "xcslbp";
    }
    return "?";
}

DescriptorKind parse_descriptor(std::string_view text) {
    for (auto k : {DescriptorKind::Ltm, DescriptorKind::Olbp, DescriptorKind::CsLbp, DescriptorKind::CsLdp,
                   DescriptorKind::XcsLbp}) {
        if (text == to_string(k)) return k;
    }
    throw ValidationError("descriptor must be one of ltm|olbp|cslbp|csldp|xcslbp, got '" + std::string(text) + "'");
}

FeatureVector Descriptor::extract(const GrayImage& image) const {
    switch (kind) {
        case DescriptorKind::Ltm: return extract_ltm(image, ltm);
        case DescriptorKind::Olbp: return extract_lbp(image, {LbpKind::Olbp, 0.0});
        case DescriptorKind::CsLbp: return extract_lbp(image, {LbpKind::CsLbp, cslbp_threshold});
        case DescriptorKind::CsLdp: return extract_lbp(image, {LbpKind::CsLdp, 0.0});
        case DescriptorKind::XcsLbp: return extract_lbp(image, {LbpKind::XcsLbp, 0.0});
    }
    throw ValidationError("unknown descriptor");
}

std::string Descriptor::label() const {
    switch (kind) {
        case DescriptorKind::Ltm: return "LTM";
        case DescriptorKind::Olbp: return "OLBP";
        case DescriptorKind::CsLbp: return "CS-LBP";
        case DescriptorKind::CsLdp: return "CS-LDP";
        case DescriptorKind::XcsLbp: return "XCS-LBP";
    }
    return "?";
}

EvalMode EvalMode::parse(std::string_view text) {
    if (text == "split") return {Kind::Split, 0};
    if (text.starts_with("cv:")) {
        const int folds = parse_integer<int>(text.substr(3), "eval");
        if (folds < 2) field_error("eval", "cross-validation needs at least 2 folds");
        return {Kind::CrossValidation, folds};
    }
    field_error("eval", "expected 'cv:<folds>' or 'split', got '" + std::string(text) + "'");
}

std::string EvalMode::to_string() const {
    return kind == Kind::Split ? "split" : "cv:" + std::to_string(folds);
}

RandomSweep parse_random_sweep(std::string_view text) {
    const auto parts = split_colon(text);
    if (parts.size() != 3 || parts[0] != "random") field_error("sweep", "expected 'random:<count>:<seed>'");
    RandomSweep r{parse_integer<int>(parts[1], "sweep"), parse_integer<std::uint64_t>(parts[2], "sweep")};
    if (r.count < 1) field_error("sweep", "random sweep needs a positive count");
    return r;
}

void ExperimentSpec::validate() const {
    if (dataset.empty()) field_error("dataset", "required");
    if ((descriptor == DescriptorKind::Ltm) != ltm.has_value()) {
        field_error("ltm", descriptor == DescriptorKind::Ltm ? "required when descriptor is ltm"
                                                             : "only allowed when descriptor is ltm");
    }
    if (!std::holds_alternative<std::monostate>(sweep) && descriptor != DescriptorKind::Ltm) {
        field_error("sweep", "only allowed when descriptor is ltm");
    }
    if (ltm) {
        try {
            ltm->validate();
        } catch (const ValidationError& e) {
            field_error("ltm", e.what());
        }
    }
    if (const auto* rows = std::get_if<std::vector<SweepRow>>(&sweep)) {
        if (rows->empty()) field_error("sweep", "empty sweep");
        for (std::size_t i = 0; i < rows->size(); ++i) {
            LtmConfig c = *ltm;
            c.orders = (*rows)[i].orders;
            c.weights = (*rows)[i].weights;
            try {
                c.validate();
            } catch (const ValidationError& e) {
                field_error("sweep[" + std::to_string(i) + "]", e.what());
            }
        }
    }
    if (const auto* r = std::get_if<RandomSweep>(&sweep); r && r->count < 1) field_error("sweep", "count must be >= 1");
    if (!(cslbp_threshold >= 0.0)) field_error("cslbp_threshold", "must be >= 0");
    if (eval.kind == EvalMode::Kind::CrossValidation && eval.folds < 2) field_error("eval", "folds must be >= 2");
    if (threads < 1) field_error("threads", "must be >= 1");
    try {
        forest.validate();
    } catch (const ValidationError& e) {
        field_error("forest", e.what());
    }
}

ExperimentSpec parse_experiment_spec(const json& doc) {
    check_keys(doc, "", {"version", "dataset", "descriptor", "ltm", "cslbp_threshold", "eval", "forest", "sweep",
                         "threads"});
    ExperimentSpec spec;
    try {
        const int version = doc.value("version", kSpecVersion);
        if (version != kSpecVersion) field_error("version", "unsupported version " + std::to_string(version));
        if (!doc.contains("dataset") || !doc["dataset"].is_string()) field_error("dataset", "required string");
        spec.dataset = doc["dataset"].get<std::string>();
        spec.descriptor = parse_descriptor(doc.value("descriptor", std::string("ltm")));
        spec.cslbp_threshold = doc.value("cslbp_threshold", 0.0);
        spec.eval = EvalMode::parse(doc.value("eval", std::string("cv:10")));
        spec.threads = doc.value("threads", 1);

        if (doc.contains("ltm")) {
            const json& l = doc["ltm"];
            check_keys(l, "ltm", {"kernel_size", "orders", "weights", "value_mode", "tie_rule"});
            LtmConfig c = LtmConfig::defaults();
            c.kernel_size = l.value("kernel_size", c.kernel_size);
            if (l.contains("orders")) c.orders = orders_from_json(l["orders"], "ltm.orders");
            if (l.contains("weights")) c.weights = weights_from_json(l["weights"], "ltm.weights");
            c.value_mode = parse_value_mode(l.value("value_mode", std::string("raw")));
            if (l.value("tie_rule", std::string("earlier-index-stronger")) != "earlier-index-stronger") {
                field_error("ltm.tie_rule", "only 'earlier-index-stronger' is supported");
            }
            spec.ltm = c;
        } else if (spec.descriptor == DescriptorKind::Ltm) {
            spec.ltm = LtmConfig::defaults();
        }

        if (doc.contains("forest")) {
            const json& f = doc["forest"];
            check_keys(f, "forest", {"n_trees", "min_samples_split", "max_depth", "seed"});
            spec.forest.n_trees = f.value("n_trees", spec.forest.n_trees);
            spec.forest.min_samples_split = f.value("min_samples_split", spec.forest.min_samples_split);
            if (f.contains("max_depth") && !f["max_depth"].is_null()) spec.forest.max_depth = f["max_depth"].get<int>();
            spec.forest.seed = f.value("seed", spec.forest.seed);
        }

        if (doc.contains("sweep")) {
            const json& s = doc["sweep"];
            if (s.is_string()) {
                spec.sweep = parse_random_sweep(s.get<std::string>());
            } else if (s.is_array()) {
                std::vector<SweepRow> rows;
                for (std::size_t i = 0; i < s.size(); ++i) {
                    const std::string field = "sweep[" + std::to_string(i) + "]";
                    check_keys(s[i], field, {"orders", "weights"});
                    SweepRow row;
                    if (s[i].contains("orders")) {
                        row.orders = orders_from_json(s[i]["orders"], field + ".orders");
                    } else if (spec.ltm) {
                        row.orders = spec.ltm->orders;
                    }
                    if (!s[i].contains("weights")) field_error(field + ".weights", "required");
                    row.weights = weights_from_json(s[i]["weights"], field + ".weights");
                    rows.push_back(std::move(row));
                }
                spec.sweep = std::move(rows);
            } else if (!s.is_null()) {
                field_error("sweep", "expected a list of rows or 'random:<count>:<seed>'");
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

json to_json(const ExperimentSpec& spec) {
    json doc;
    doc["version"] = kSpecVersion;
    doc["dataset"] = spec.dataset;
    doc["descriptor"] = std::string(to_string(spec.descriptor));
    if (spec.ltm) {
        doc["ltm"] = {{"kernel_size", spec.ltm->kernel_size},
                      {"orders", orders_to_json(spec.ltm->orders)},
                      {"weights", spec.ltm->weights},
                      {"value_mode", std::string(to_string(spec.ltm->value_mode))},
                      {"tie_rule", "earlier-index-stronger"}};
    }
    if (spec.descriptor == DescriptorKind::CsLbp) doc["cslbp_threshold"] = spec.cslbp_threshold;
    doc["eval"] = spec.eval.to_string();
    doc["forest"] = {{"n_trees", spec.forest.n_trees},
                     {"min_samples_split", spec.forest.min_samples_split},
                     {"max_depth", spec.forest.max_depth ? json(*spec.forest.max_depth) : json(nullptr)},
                     {"seed", spec.forest.seed}};
    if (const auto* r = std::get_if<RandomSweep>(&spec.sweep)) {
        doc["sweep"] = "random:" + std::to_string(r->count) + ":" + std::to_string(r->seed);
    } else if (const auto* rows = std::get_if<std::vector<SweepRow>>(&spec.sweep)) {
        json a = json::array();
        for (const auto& row : *rows) a.push_back({{"orders", orders_to_json(row.orders)}, {"weights", row.weights}});
        doc["sweep"] = a;
    }
    doc["threads"] = spec.threads;
    return doc;
}

ExperimentSpec load_experiment_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("spec file not found: " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ValidationError("spec file " + path.string() + ": " + e.what());
    }
    ExperimentSpec spec = parse_experiment_spec(doc);
    if (!spec.dataset.starts_with("synthetic:") && fs::path(spec.dataset).is_relative()) {
        spec.dataset = (path.parent_path() / spec.dataset).lexically_normal().string();
    }
    return spec;
}

std::vector<SweepRow> expand_sweep(const ExperimentSpec& spec) {
    if (!spec.ltm) return {};
    if (const auto* rows = std::get_if<std::vector<SweepRow>>(&spec.sweep)) return *rows;
    if (const auto* r = std::get_if<RandomSweep>(&spec.sweep)) {
        Rng rng(mix_seed(r->seed));
        std::vector<SweepRow> rows;
        for (int i = 0; i < r->count; ++i) {
            SweepRow row{spec.ltm->orders, {}};
            for (std::size_t j = 0; j < row.orders.size(); ++j)
                row.weights.push_back(kWeightCandidates[uniform_index(rng, std::size(kWeightCandidates))]);
            rows.push_back(std::move(row));
        }
        return rows;
    }
    return {{spec.ltm->orders, spec.ltm->weights}};
}

DatasetSplit resolve_dataset(const std::string& dataset) {
    if (dataset.starts_with("synthetic:")) {
        const auto parts = split_colon(dataset);
        if (parts.size() != 4 && parts.size() != 5) {
            field_error("dataset", "expected 'synthetic:<classes>:<per_class>:<seed>[:<size>]'");
        }
        const int classes = parse_integer<int>(parts[1], "dataset");
        const int per_class = parse_integer<int>(parts[2], "dataset");
        const auto seed = parse_integer<std::uint64_t>(parts[3], "dataset");
        const int size = parts.size() == 5 ? parse_integer<int>(parts[4], "dataset") : kDefaultSyntheticSize;
        return generate_synthetic(classes, per_class, size, seed);
    }
    return load_split(dataset);
}

std::vector<Sample> extract_samples(const std::vector<LabeledImage>& images, const Descriptor& descriptor,
                                    int threads) {
    std::vector<Sample> out(images.size());
    parallel_for(images.size(), threads, [&](std::size_t i) {
        out[i] = {descriptor.extract(images[i].image).as_doubles(), images[i].label};
    });
    return out;
}

EvalReport evaluate_descriptor(const DatasetSplit& data, const Descriptor& descriptor, const EvalMode& eval,
                               const ForestParams& forest, int threads) {
    ForestParams params = forest;
    params.threads = threads;
    std::vector<Sample> train_set = extract_samples(data.train, descriptor, threads);
    std::vector<Sample> test_set = extract_samples(data.test, descriptor, threads);
    if (eval.kind == EvalMode::Kind::Split) return evaluate_split(train_set, test_set, params);
    train_set.insert(train_set.end(), std::make_move_iterator(test_set.begin()), std::make_move_iterator(test_set.end()));
    return cross_validate(train_set, params, eval.folds);
}

const ResultRow* RunResult::best() const {
    return !rows.empty() && rows.front().report ? &rows.front() : nullptr;
}

RunResult run_experiment(const ExperimentSpec& spec, const DatasetSplit& data) {
    spec.validate();
    const auto descriptors = sweep_descriptors(spec);
    RunResult result;
    result.dataset = data.name;
    result.eval = spec.eval;
    result.rows.resize(descriptors.size());
    const bool rows_parallel = descriptors.size() > 1 && spec.threads > 1;
    const int inner_threads = rows_parallel ? 1 : spec.threads;
    parallel_for(descriptors.size(), rows_parallel ? spec.threads : 1, [&](std::size_t i) {
        result.rows[i] =
            evaluate_row(static_cast<int>(i) + 1, descriptors[i], data, spec.eval, spec.forest, inner_threads);
    });
    std::ranges::stable_sort(result.rows, [](const ResultRow& a, const ResultRow& b) {
        if (a.report.has_value() != b.report.has_value()) return a.report.has_value();
        return a.report && a.report->mean > b.report->mean;
    });
    return result;
}

RunResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    return run_experiment(spec, resolve_dataset(spec.dataset));
}

std::string format_accuracy(const EvalReport& report) {
    return format_fixed(report.mean, 2) + " ± " + format_fixed(report.std, 2);
}

std::string results_csv(const RunResult& result) {
    std::ostringstream out;
    out << "experiment,descriptor,kernel_size,orders,weights,value_mode,mean,std,eval,status\n";
    for (const auto& row : result.rows) {
        const auto& d = row.descriptor;
        const bool ltm = d.kind == DescriptorKind::Ltm;
        out << row.experiment << ',' << to_string(d.kind) << ',' << (ltm ? std::to_string(d.ltm.kernel_size) : "3")
            << ',' << (ltm ? join_orders(d.ltm.orders) : "") << ',' << (ltm ? join_weights(d.ltm.weights) : "") << ','
            << (ltm ? std::string(to_string(d.ltm.value_mode)) : "") << ',';
        if (row.report) {
            out << format_fixed(row.report->mean, 6) << ',' << format_fixed(row.report->std, 6) << ','
                << result.eval.to_string() << ",ok\n";
        } else {
            out << ",," << result.eval.to_string() << ',' << csv_field("error: " + row.error) << '\n';
        }
    }
    return out.str();
}

std::string results_markdown(const RunResult& result) {
    std::ostringstream out;
    out << "| Experiment | Descriptor | M_pq used | Weights | Accuracy " << result.dataset << " (" << result.eval.to_string()
        << ") |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& row : result.rows) {
        const auto& d = row.descriptor;
        const bool ltm = d.kind == DescriptorKind::Ltm;
        out << "| " << row.experiment << " | " << d.label()
            << (ltm ? " " + std::to_string(d.ltm.kernel_size) + "x" + std::to_string(d.ltm.kernel_size) : "") << " | "
            << (ltm ? join_orders(d.ltm.orders) : "-") << " | " << (ltm ? join_weights(d.ltm.weights) : "-") << " | "
            << row_accuracy(row) << " |\n";
    }
    out << '\n';
    if (const ResultRow* b = result.best()) {
        out << "best: experiment " << b->experiment << ", " << b->descriptor.label();
        if (b->descriptor.kind == DescriptorKind::Ltm) {
            out << ' ' << join_orders(b->descriptor.ltm.orders) << ", weights " << join_weights(b->descriptor.ltm.weights);
        }
        out << ", " << format_accuracy(*b->report) << '\n';
    } else {
        out << "best: none (every row failed)\n";
    }
    return out.str();
}

ComparisonTable compare_descriptors(const std::vector<DatasetSplit>& datasets, const LtmConfig& ltm,
                                    const ForestParams& forest, const EvalMode& eval, double cslbp_threshold,
                                    int threads) {
    if (datasets.empty()) throw ValidationError("compare needs at least one dataset");
    ltm.validate();
    forest.validate();

    std::vector<Descriptor> descriptors;
    for (auto kind : {DescriptorKind::Ltm, DescriptorKind::Olbp, DescriptorKind::CsLbp, DescriptorKind::CsLdp,
                      DescriptorKind::XcsLbp}) {
        Descriptor d;
        d.kind = kind;
        d.ltm = ltm;
        d.cslbp_threshold = cslbp_threshold;
        descriptors.push_back(d);
    }

    ComparisonTable table;
    for (const auto& d : datasets) table.datasets.push_back(d.name);
    for (const auto& d : descriptors) table.descriptors.push_back(d.label());
    table.cells.assign(descriptors.size(), std::vector<ResultRow>(datasets.size()));

    const std::size_t cells = descriptors.size() * datasets.size();
    parallel_for(cells, threads, [&](std::size_t i) {
        const std::size_t r = i / datasets.size();
        const std::size_t c = i % datasets.size();
        table.cells[r][c] = evaluate_row(static_cast<int>(r) + 1, descriptors[r], datasets[c], eval, forest, 1);
    });
    return table;
}

std::string comparison_csv(const ComparisonTable& table) {
    std::ostringstream out;
    out << "descriptor,dataset,mean,std,status\n";
    for (std::size_t r = 0; r < table.descriptors.size(); ++r) {
        for (std::size_t c = 0; c < table.datasets.size(); ++c) {
            const auto& cell = table.cells[r][c];
            out << table.descriptors[r] << ',' << csv_field(table.datasets[c]) << ',';
            if (cell.report) {
                out << format_fixed(cell.report->mean, 6) << ',' << format_fixed(cell.report->std, 6) << ",ok\n";
            } else {
                out << ",," << csv_field("error: " + cell.error) << '\n';
            }
        }
    }
    return out.str();
}

std::string comparison_markdown(const ComparisonTable& table) {
    std::ostringstream out;
    out << "| Descriptor |";
    for (const auto& d : table.datasets) out << ' ' << d << " |";
    out << "\n|---|";
    for (std::size_t c = 0; c < table.datasets.size(); ++c) out << "---|";
    out << '\n';
    for (std::size_t r = 0; r < table.descriptors.size(); ++r) {
        out << "| " << table.descriptors[r] << " |";
        for (const auto& cell : table.cells[r]) out << ' ' << row_accuracy(cell) << " |";
        out << '\n';
    }
    return out.str();
}

}  // namespace ltmtex
