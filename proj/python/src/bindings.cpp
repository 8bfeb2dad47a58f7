#include "ltmtex/dataset.hpp"
#include "ltmtex/error.hpp"
#include "ltmtex/experiment.hpp"
#include "ltmtex/forest.hpp"
#include "ltmtex/lbp.hpp"
#include "ltmtex/ltm.hpp"
#include "ltmtex/tchebichef.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace ltmtex;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const U8Array& a) {
    if (a.ndim() != 2) throw ValidationError("expected a 2-D uint8 array");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return GrayImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

py::array_t<std::uint8_t> from_image(const GrayImage& img) {
    py::array_t<std::uint8_t> out({img.height, img.width});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
}

template <typename T>
py::array_t<T> matrix(std::span<const T> values, int rows, int cols) {
    py::array_t<T> out({rows, cols});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

py::array_t<std::uint32_t> bins(const FeatureVector& fv) {
    py::array_t<std::uint32_t> out(static_cast<py::ssize_t>(fv.bins.size()));
    std::copy(fv.bins.begin(), fv.bins.end(), out.mutable_data());
    return out;
}

std::vector<Sample> to_samples(const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                               const std::vector<int>& y) {
    if (x.ndim() != 2) throw ValidationError("X must be 2-D");
    if (static_cast<std::size_t>(x.shape(0)) != y.size()) throw ValidationError("X and y lengths differ");
    const auto cols = static_cast<std::size_t>(x.shape(1));
    std::vector<Sample> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i].features.assign(x.data() + i * cols, x.data() + (i + 1) * cols);
        out[i].label = y[i];
    }
    return out;
}

py::list labeled_to_python(const std::vector<LabeledImage>& items) {
    py::list out;
    for (const auto& item : items) out.append(py::make_tuple(from_image(item.image), item.label));
    return out;
}

LbpVariant variant_from(const std::string& kind, double threshold) { return {parse_lbp_kind(kind), threshold}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Local Tchebichef Moment texture descriptors, LBP baselines and Random Forest evaluation";

    py::register_exception<ImageError>(m, "ImageError", PyExc_OSError);
    py::register_exception<DatasetError>(m, "DatasetError", PyExc_RuntimeError);

    // Tchebichef basis and masks
    m.def("basis", [](int size) {
        const auto b = build_basis(size);
        std::vector<double> table;
        for (int n = 0; n < size; ++n) table.insert(table.end(), b.row(n).begin(), b.row(n).end());
        return matrix<double>(table, size, size);
    }, py::arg("size"), "Orthonormal Tchebichef table t[n, x].");
    m.def("kernel", [](int size, int p, int q) {
        const auto k = build_kernel(build_basis(size), p, q);
        return matrix<double>(k.weights(), size, size);
    }, py::arg("size"), py::arg("p"), py::arg("q"), "Mask w[y, x] = t_p(x) t_q(y).");
    m.def("all_kernels", [](int size) {
        py::list out;
        for (const auto& k : all_kernels(size))
            out.append(py::make_tuple(py::make_tuple(k.order().p, k.order().q), matrix<double>(k.weights(), size, size)));
        return out;
    }, py::arg("size"));

    // LTM
    py::enum_<ValueMode>(m, "ValueMode").value("RAW", ValueMode::Raw).value("ABSOLUTE", ValueMode::Absolute);
    py::class_<LtmConfig>(m, "LtmConfig")
        .def(py::init([](int kernel_size, std::vector<std::string> orders, std::vector<double> weights,
                         const std::string& value_mode) {
                 LtmConfig c;
                 c.kernel_size = kernel_size;
                 for (const auto& o : orders) c.orders.push_back(parse_order(o));
                 c.weights = std::move(weights);
                 c.value_mode = parse_value_mode(value_mode);
                 c.validate();
                 return c;
             }),
             py::arg("kernel_size") = 5,
             py::arg("orders") = std::vector<std::string>{"M00", "M01", "M10", "M11", "M20"},
             py::arg("weights") = std::vector<double>{0.1, 5, 5, 5, 5}, py::arg("value_mode") = "raw")
        .def_readonly("kernel_size", &LtmConfig::kernel_size)
        .def_readonly("weights", &LtmConfig::weights)
        .def_readonly("value_mode", &LtmConfig::value_mode)
        .def_property_readonly("orders", [](const LtmConfig& c) {
            std::vector<std::string> out;
            for (const auto& o : c.orders) out.push_back(format_order(o));
            return out;
        })
        .def("__repr__", [](const LtmConfig& c) {
            std::ostringstream s;
            s << "LtmConfig(kernel_size=" << c.kernel_size << ", k=" << c.moment_count() << ")";
            return s.str();
        });

    m.def("moment_at", [](const U8Array& image, int x, int y, int size, int p, int q) {
        return moment_at(to_image(image), x, y, build_kernel(build_basis(size), p, q));
    }, py::arg("image"), py::arg("x"), py::arg("y"), py::arg("size"), py::arg("p"), py::arg("q"));
    m.def("lehmer_code", [](const std::vector<double>& values) { return lehmer_code(values); }, py::arg("values"));
    m.def("ltm_image", [](const U8Array& image, const LtmConfig& config) {
        const auto img = ltm_image(to_image(image), config);
        return matrix<std::uint32_t>(img.codes, img.height, img.width);
    }, py::arg("image"), py::arg("config") = LtmConfig::defaults());
    m.def("extract_ltm", [](const U8Array& image, const LtmConfig& config) {
        return bins(extract_ltm(to_image(image), config));
    }, py::arg("image"), py::arg("config") = LtmConfig::defaults());

    // LBP
    m.def("lbp_image", [](const U8Array& image, const std::string& kind, double threshold) {
        const auto img = lbp_image(to_image(image), variant_from(kind, threshold));
        return matrix<std::uint32_t>(img.codes, img.height, img.width);
    }, py::arg("image"), py::arg("kind") = "olbp", py::arg("threshold") = 0.0);
    m.def("extract_lbp", [](const U8Array& image, const std::string& kind, double threshold) {
        return bins(extract_lbp(to_image(image), variant_from(kind, threshold)));
    }, py::arg("image"), py::arg("kind") = "olbp", py::arg("threshold") = 0.0);

    // Forest
    py::class_<ForestParams>(m, "ForestParams")
        .def(py::init([](int n_trees, int min_samples_split, std::optional<int> max_depth, std::uint64_t seed,
                         int threads) {
                 ForestParams p;
                 p.n_trees = n_trees;
                 p.min_samples_split = min_samples_split;
                 p.max_depth = max_depth;
                 p.seed = seed;
                 p.threads = threads;
                 p.validate();
                 return p;
             }),
             py::arg("n_trees") = 10, py::arg("min_samples_split") = 2, py::arg("max_depth") = py::none(),
             py::arg("seed") = 42, py::arg("threads") = 1)
        .def_readonly("n_trees", &ForestParams::n_trees)
        .def_readonly("min_samples_split", &ForestParams::min_samples_split)
        .def_readonly("max_depth", &ForestParams::max_depth)
        .def_readonly("seed", &ForestParams::seed);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("fold_accuracies", &EvalReport::fold_accuracies)
        .def_readonly("mean", &EvalReport::mean)
        .def_readonly("std", &EvalReport::std)
        .def_readonly("class_labels", &EvalReport::class_labels)
        .def_readonly("confusion", &EvalReport::confusion)
        .def("to_csv", &report_csv)
        .def("__repr__", [](const EvalReport& r) { return "EvalReport(" + format_accuracy(r) + ")"; });

    py::class_<ForestModel>(m, "ForestModel")
        .def_readonly("class_labels", &ForestModel::class_labels)
        .def_readonly("feature_count", &ForestModel::feature_count)
        .def_property_readonly("n_trees", [](const ForestModel& f) { return f.trees.size(); })
        .def("predict", [](const ForestModel& f, const std::vector<double>& x) { return predict(f, x); })
        .def("dumps", [](const ForestModel& f) {
            std::ostringstream out;
            save_model(f, out);
            return out.str();
        })
        .def_static("loads", [](const std::string& text) {
            std::istringstream in(text);
            return load_model(in);
        });

    m.def("train", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, const std::vector<int>& y,
                      const ForestParams& params) { return train(to_samples(x, y), params); },
          py::arg("X"), py::arg("y"), py::arg("params") = ForestParams{});
    m.def("cross_validate",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, const std::vector<int>& y,
             const ForestParams& params, int folds) { return cross_validate(to_samples(x, y), params, folds); },
          py::arg("X"), py::arg("y"), py::arg("params") = ForestParams{}, py::arg("folds") = 10);
    m.def("evaluate_split",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x_train,
             const std::vector<int>& y_train, const py::array_t<double, py::array::c_style | py::array::forcecast>& x_test,
             const std::vector<int>& y_test, const ForestParams& params) {
              return evaluate_split(to_samples(x_train, y_train), to_samples(x_test, y_test), params);
          },
          py::arg("X_train"), py::arg("y_train"), py::arg("X_test"), py::arg("y_test"),
          py::arg("params") = ForestParams{});

    // Datasets
    m.def("load_image", [](const std::filesystem::path& p) { return from_image(load_image(p)); }, py::arg("path"));
    m.def("write_image", [](const U8Array& image, const std::filesystem::path& p) { write_image(to_image(image), p); },
          py::arg("image"), py::arg("path"));
    m.def("generate_synthetic", [](int classes, int per_class, int size, std::uint64_t seed) {
        const auto split = generate_synthetic(classes, per_class, size, seed);
        py::dict out;
        out["name"] = split.name;
        out["classes"] = split.classes;
        out["train"] = labeled_to_python(split.train);
        out["test"] = labeled_to_python(split.test);
        return out;
    }, py::arg("classes") = 4, py::arg("per_class") = 20, py::arg("size") = kDefaultSyntheticSize,
       py::arg("seed") = kDefaultSyntheticSeed);

    // Experiments: spec documents are passed as JSON text.
    m.def("run_experiment", [](const std::string& spec_json) {
        const auto spec = parse_experiment_spec(nlohmann::json::parse(spec_json));
        RunResult result;
        {
            py::gil_scoped_release release;
            result = run_experiment(spec);
        }
        py::dict out;
        out["csv"] = results_csv(result);
        out["markdown"] = results_markdown(result);
        if (const auto* best = result.best()) {
            out["best_experiment"] = best->experiment;
            out["best_mean"] = best->report->mean;
            out["best_std"] = best->report->std;
        }
        return out;
    }, py::arg("spec_json"));
    m.def("compare", [](const std::vector<std::string>& datasets, const LtmConfig& ltm, const ForestParams& forest,
                        const std::string& eval, double cslbp_threshold) {
        std::vector<DatasetSplit> splits;
        for (const auto& d : datasets) splits.push_back(resolve_dataset(d));
        ComparisonTable table;
        {
            py::gil_scoped_release release;
            table = compare_descriptors(splits, ltm, forest, EvalMode::parse(eval), cslbp_threshold, forest.threads);
        }
        py::dict out;
        out["csv"] = comparison_csv(table);
        out["markdown"] = comparison_markdown(table);
        return out;
    }, py::arg("datasets"), py::arg("ltm") = LtmConfig::defaults(), py::arg("forest") = ForestParams{},
       py::arg("eval") = "cv:10", py::arg("cslbp_threshold") = 0.0);

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
