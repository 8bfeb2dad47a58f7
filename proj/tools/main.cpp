// ltmtex command-line tool: kernel dumps, feature extraction, experiment
// sweeps and LTM-vs-LBP comparisons.

#include "ltmtex/dataset.hpp"
#include "ltmtex/error.hpp"
#include "ltmtex/experiment.hpp"
#include "ltmtex/format.hpp"
#include "ltmtex/forest.hpp"
#include "ltmtex/lbp.hpp"
#include "ltmtex/ltm.hpp"
#include "ltmtex/tchebichef.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ltmtex;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ' ' || c == ';') {
            if (!cur.empty()) items.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) items.push_back(cur);
    return items;
}

// Options shared by every subcommand that builds a descriptor.
struct DescriptorFlags {
    std::string descriptor = "ltm";
    std::optional<int> kernel_size;
    std::string orders;
    std::string weights;
    std::string value_mode;
    std::optional<double> cslbp_threshold;

    void add_to(CLI::App* app, bool with_descriptor = true) {
        if (with_descriptor) {
            app->add_option("--descriptor", descriptor, "ltm|olbp|cslbp|csldp|xcslbp")
                ->check(CLI::IsMember({"ltm", "olbp", "cslbp", "csldp", "xcslbp"}));
        }
        app->add_option("--kernel-size", kernel_size, "LTM kernel size (odd, 3-15)");
        app->add_option("--orders", orders, "LTM orders, e.g. \"M00,M01,M10,M11,M20\"");
        app->add_option("--weights", weights, "LTM weights, e.g. \".1,5,5,5,5\"");
        app->add_option("--value-mode", value_mode, "raw|absolute")->check(CLI::IsMember({"raw", "absolute"}));
        app->add_option("--cslbp-threshold", cslbp_threshold, "CS-LBP threshold on the 0-255 scale");
    }

    // Writes explicitly given flags into a spec document.
    void apply(json& doc) const {
        doc["descriptor"] = descriptor;
        if (descriptor == "ltm") {
            json& l = doc["ltm"];
            if (!l.is_object()) l = json::object();
            if (kernel_size) l["kernel_size"] = *kernel_size;
            if (!orders.empty()) l["orders"] = split_list(orders);
            if (!weights.empty()) {
                json w = json::array();
                for (const auto& s : split_list(weights)) w.push_back(parse_double(s));
                l["weights"] = w;
            }
            if (!value_mode.empty()) l["value_mode"] = value_mode;
        } else {
            doc.erase("ltm");
            doc.erase("sweep");
        }
        if (cslbp_threshold) doc["cslbp_threshold"] = *cslbp_threshold;
    }

    Descriptor build() const {
        json doc = {{"dataset", "-"}};
        apply(doc);
        const ExperimentSpec spec = parse_experiment_spec(doc);
        Descriptor d;
        d.kind = spec.descriptor;
        if (spec.ltm) d.ltm = *spec.ltm;
        d.cslbp_threshold = spec.cslbp_threshold;
        return d;
    }
};

struct ForestFlags {
    std::optional<int> trees;
    std::optional<int> min_samples_split;
    std::optional<int> max_depth;
    std::optional<std::uint64_t> seed;

    void add_to(CLI::App* app) {
        app->add_option("--trees", trees, "Trees per forest (default 10)");
        app->add_option("--min-samples-split", min_samples_split, "Minimum node size to split (default 2)");
        app->add_option("--max-depth", max_depth, "Maximum tree depth (default unlimited)");
        app->add_option("--seed", seed, "Forest and fold seed");
    }

    void apply(json& doc) const {
        json& f = doc["forest"];
        if (!f.is_object()) f = json::object();
        if (trees) f["n_trees"] = *trees;
        if (min_samples_split) f["min_samples_split"] = *min_samples_split;
        if (max_depth) f["max_depth"] = *max_depth;
        if (seed) f["seed"] = *seed;
    }
};

// ---------------------------------------------------------------------------

int dump_kernels(int size, const fs::path& out_dir) {
    const auto kernels = all_kernels(size);
    fs::create_directories(out_dir);
    std::ostringstream index, rendering;
    index << "file,p,q,degree\n";
    for (const auto& k : kernels) {
        const std::string name = format_order(k.order());
        std::ostringstream csv;
        rendering << name << '\n';
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                csv << (x ? "," : "") << format_fixed(k.at(x, y), 6);
                rendering << (x ? "\t" : "") << format_significant(k.at(x, y), 3);
            }
            csv << '\n';
            rendering << '\n';
        }
        rendering << '\n';
        write_text(out_dir / (name + ".csv"), csv.str());
        index << name << ".csv," << k.order().p << ',' << k.order().q << ',' << k.order().degree() << '\n';
    }
    write_text(out_dir / "index.csv", index.str());
    write_text(out_dir / "kernels_3sig.txt", rendering.str());
    std::cout << "wrote " << kernels.size() << " kernels of size " << size << " to " << out_dir.string() << '\n';
    return 0;
}

int extract(const fs::path& image_path, const DescriptorFlags& flags, const std::string& out, const std::string& render) {
    const Descriptor d = flags.build();
    const GrayImage image = load_image(image_path);

    CodeImage codes;
    if (d.kind == DescriptorKind::Ltm) {
        codes = ltm_image(image, d.ltm).as_code_image();
    } else {
        const LbpKind kind = parse_lbp_kind(to_string(d.kind));
        codes = lbp_image(image, {kind, d.cslbp_threshold});
    }
    const FeatureVector fv = histogram(codes);

    std::ostringstream csv;
    csv << "bin,count\n";
    for (std::size_t i = 0; i < fv.bins.size(); ++i) csv << i << ',' << fv.bins[i] << '\n';
    if (out.empty() || out == "-") {
        std::cout << csv.str();
    } else {
        write_text(out, csv.str());
    }

    if (!render.empty()) {
        if (codes.bin_count > 256) {
            throw ValidationError("--render needs codes that fit a byte (at most 5 moments)");
        }
        // Spread codes over the byte range: x2 for 120 LTM codes, x17 for 16 CS codes.
        const auto stretch = static_cast<std::uint32_t>(255 / (codes.bin_count - 1));
        GrayImage rendered(codes.width, codes.height);
        for (std::size_t i = 0; i < codes.codes.size(); ++i)
            rendered.pixels[i] = static_cast<std::uint8_t>(codes.codes[i] * stretch);
        if (fs::path(render).has_parent_path()) fs::create_directories(fs::path(render).parent_path());
        write_image(rendered, render);
    }
    return 0;
}

json load_spec_document(const std::string& spec_path, const std::string& dataset_flag) {
    json doc = json::object();
    if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw ValidationError("spec file not found: " + spec_path);
        try {
            doc = json::parse(in, nullptr, true, true);
        } catch (const json::exception& e) {
            throw ValidationError("spec file " + spec_path + ": " + e.what());
        }
        if (dataset_flag.empty() && doc.contains("dataset") && doc["dataset"].is_string()) {
            const std::string ds = doc["dataset"];
            if (!ds.starts_with("synthetic:") && fs::path(ds).is_relative()) {
                doc["dataset"] = (fs::path(spec_path).parent_path() / ds).lexically_normal().string();
            }
        }
    }
    if (!dataset_flag.empty()) doc["dataset"] = dataset_flag;
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local Tchebichef Moment texture descriptors and evaluation harness"};
    app.require_subcommand(1);

    // dump-kernels
    int kernel_size = 5;
    std::string kernel_out;
    auto* dump = app.add_subcommand("dump-kernels", "Write every NxN moment mask as CSV");
    dump->add_option("--size", kernel_size, "Odd kernel size, 3-15")
        ->required()
        ->check(CLI::Validator(
            [](std::string& v) -> std::string {
                int n = 0;
                const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
                if (ec != std::errc() || ptr != v.data() + v.size()) return "kernel size must be an integer";
                return (n >= kMinKernelSize && n <= kMaxKernelSize && n % 2 == 1) ? "" : "kernel size must be odd in [3, 15]";
            },
            "ODD 3-15"));
    dump->add_option("--out", kernel_out, "Output directory")->required();

    // extract
    std::string image_path, extract_out, render_out;
    DescriptorFlags extract_flags;
    auto* ext = app.add_subcommand("extract", "Histogram features (and optionally the code image) for one PGM");
    ext->add_option("--image", image_path, "Input PGM (P2/P5)")->required();
    extract_flags.add_to(ext);
    ext->add_option("--out", extract_out, "Histogram CSV path ('-' for stdout)");
    ext->add_option("--render", render_out, "Write the code image as an 8-bit PGM");

    // run
    std::string spec_path, run_dataset, run_eval, run_sweep, run_out;
    std::optional<int> run_threads;
    DescriptorFlags run_flags;
    ForestFlags run_forest;
    auto* run = app.add_subcommand("run", "Run an experiment spec (single config or sweep)");
    run->add_option("--spec", spec_path, "Experiment spec (JSON)");
    run->add_option("--dataset", run_dataset, "Manifest directory or synthetic:<classes>:<per_class>:<seed>[:<size>]");
    run_flags.add_to(run);
    run->add_option("--eval", run_eval, "cv:<folds> or split");
    run->add_option("--sweep", run_sweep, "random:<count>:<seed>");
    run_forest.add_to(run);
    run->add_option("--threads", run_threads, "Worker threads (results do not depend on it)");
    run->add_option("--out", run_out, "Directory for results.csv / results.md / spec.json");
    auto* descriptor_opt = run->get_option("--descriptor");

    // compare
    std::vector<std::string> compare_datasets;
    std::string compare_eval = "cv:10", compare_out;
    int compare_threads = 1;
    DescriptorFlags compare_flags;
    ForestFlags compare_forest;
    auto* cmp = app.add_subcommand("compare", "LTM against OLBP, CS-LBP, CS-LDP and XCS-LBP");
    cmp->add_option("--dataset", compare_datasets, "One or more datasets (repeatable)")->required();
    compare_flags.add_to(cmp, false);
    cmp->add_option("--eval", compare_eval, "cv:<folds> or split");
    compare_forest.add_to(cmp);
    cmp->add_option("--threads", compare_threads, "Worker threads");
    cmp->add_option("--out", compare_out, "Directory for compare.csv / compare.md");

    // train / predict
    std::string train_dataset, model_path, predict_image;
    DescriptorFlags train_flags, predict_flags;
    ForestFlags train_forest;
    auto* trn = app.add_subcommand("train", "Train a forest on a dataset's training split and save it");
    trn->add_option("--dataset", train_dataset, "Manifest directory or synthetic spec")->required();
    train_flags.add_to(trn);
    train_forest.add_to(trn);
    trn->add_option("--model", model_path, "Output model file")->required();
    auto* prd = app.add_subcommand("predict", "Classify one image with a saved forest");
    prd->add_option("--model", model_path, "Model file")->required();
    prd->add_option("--image", predict_image, "Input PGM")->required();
    predict_flags.add_to(prd);

    // generate
    int gen_classes = 4, gen_per_class = 20, gen_size = kDefaultSyntheticSize;
    std::uint64_t gen_seed = kDefaultSyntheticSeed;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "Write a synthetic texture dataset with manifests");
    gen->add_option("--classes", gen_classes, "Texture classes, 2-8");
    gen->add_option("--per-class", gen_per_class, "Images per class (split 50/50)");
    gen->add_option("--size", gen_size, "Image side in pixels");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }

    try {
        if (*dump) return dump_kernels(kernel_size, kernel_out);
        if (*ext) return extract(image_path, extract_flags, extract_out, render_out);

        if (*run) {
            json doc = load_spec_document(spec_path, run_dataset);
            if (descriptor_opt->count() > 0 || !doc.contains("descriptor")) {
                run_flags.apply(doc);
            } else {
                run_flags.descriptor = doc["descriptor"].get<std::string>();
                run_flags.apply(doc);
            }
            if (!run_eval.empty()) doc["eval"] = run_eval;
            if (!run_sweep.empty()) doc["sweep"] = run_sweep;
            if (run_threads) doc["threads"] = *run_threads;
            run_forest.apply(doc);

            const ExperimentSpec spec = parse_experiment_spec(doc);
            const RunResult result = run_experiment(spec);
            const std::string md = results_markdown(result);
            std::cout << md;
            if (!run_out.empty()) {
                write_text(fs::path(run_out) / "results.csv", results_csv(result));
                write_text(fs::path(run_out) / "results.md", md);
                write_text(fs::path(run_out) / "spec.json", to_json(spec).dump(2) + "\n");
            }
            return result.best() ? 0 : 1;
        }

        if (*cmp) {
            json doc = {{"dataset", "-"}};
            compare_flags.descriptor = "ltm";
            compare_flags.apply(doc);
            compare_forest.apply(doc);
            doc["eval"] = compare_eval;
            doc["threads"] = compare_threads;
            const ExperimentSpec spec = parse_experiment_spec(doc);
            std::vector<DatasetSplit> datasets;
            for (const auto& d : compare_datasets) datasets.push_back(resolve_dataset(d));
            const ComparisonTable table =
                compare_descriptors(datasets, *spec.ltm, spec.forest, spec.eval, spec.cslbp_threshold, spec.threads);
            const std::string md = comparison_markdown(table);
            std::cout << md;
            if (!compare_out.empty()) {
                write_text(fs::path(compare_out) / "compare.csv", comparison_csv(table));
                write_text(fs::path(compare_out) / "compare.md", md);
            }
            return 0;
        }

        if (*trn) {
            json doc = {{"dataset", train_dataset}};
            train_flags.apply(doc);
            train_forest.apply(doc);
            const ExperimentSpec spec = parse_experiment_spec(doc);
            const Descriptor d = train_flags.build();
            const DatasetSplit data = resolve_dataset(spec.dataset);
            const ForestModel model = train(extract_samples(data.train, d), spec.forest);
            std::ostringstream out;
            save_model(model, out);
            write_text(model_path, out.str());
            std::cout << "trained " << model.trees.size() << " trees on " << data.train.size() << " images\n";
            return 0;
        }

        if (*prd) {
            std::ifstream in(model_path);
            if (!in) throw ValidationError("model file not found: " + model_path);
            const ForestModel model = load_model(in);
            const Descriptor d = predict_flags.build();
            std::cout << predict(model, d.extract(load_image(predict_image)).as_doubles()) << '\n';
            return 0;
        }

        if (*gen) {
            const DatasetSplit split = generate_synthetic(gen_classes, gen_per_class, gen_size, gen_seed);
            write_split(split, gen_out);
            std::cout << "wrote " << split.train.size() << " train and " << split.test.size() << " test images to "
                      << gen_out << '\n';
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << json{{"error", "validation"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const ImageError& e) {
        std::cerr << json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << '\n';
        return 3;
    } catch (const DatasetError& e) {
        std::cerr << json{{"error", "dataset"}, {"message", e.what()}}.dump() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
