#include "ltmtex/ltm.hpp"

#include "ltmtex/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace ltmtex {

namespace {

// Σ_i f[i] * g(i) over a symmetric window, pairing i with N-1-i. `f` is even
// (f[N-1-i] == f[i]) or odd (f[N-1-i] == -f[i]) as given by `odd`.
template <typename Sample>
double folded_dot(std::span<const double> f, bool odd, Sample&& g) {
    const int n = static_cast<int>(f.size());
    const int half = n / 2;
    double acc = 0.0;
    for (int i = 0; i < half; ++i) {
        const auto a = g(i);
        const auto b = g(n - 1 - i);
        acc += f[i] * (odd ? (a - b) : (a + b));
    }
    if (!odd) acc += f[half] * g(half);
    return acc;
}

void check_window(const GrayImage& image, int x, int y, int size) {
    const int half = size / 2;
    if (x - half < 0 || y - half < 0 || x + half >= image.width || y + half >= image.height) {
        throw ValidationError("window of size " + std::to_string(size) + " centred at (" + std::to_string(x) + ", " +
                              std::to_string(y) + ") exceeds image " + std::to_string(image.width) + "x" +
                              std::to_string(image.height));
    }
}

double moment_unchecked(const GrayImage& image, int x, int y, const MomentKernel& kernel) {
    const int N = kernel.size();
    const int x0 = x - N / 2;
    const int y0 = y - N / 2;
    const MomentOrder order = kernel.order();

    if (order.p == 0 && order.q == 0) {
        long sum = 0;
        for (int v = 0; v < N; ++v)
            for (int u = 0; u < N; ++u) sum += image.at(x0 + u, y0 + v);
        return kernel.at(0, 0) * static_cast<double>(sum);
    }

    const int centre = image.at(x, y);
    const auto col = kernel.column_factor();
    const bool col_odd = order.p % 2 == 1;
    const bool row_odd = order.q % 2 == 1;
    auto row_response = [&](int v) {
        const std::uint8_t* line = &image.pixels[static_cast<std::size_t>(y0 + v) * image.width + x0];
        return folded_dot(col, col_odd, [&](int u) { return static_cast<int>(line[u]) - centre; });
    };
    return folded_dot(kernel.row_factor(), row_odd, row_response);
}

void validate_values(std::span<const double> values) {
    if (values.size() < 2 || values.size() > 12) {
        throw ValidationError("Lehmer code needs between 2 and 12 values, got " + std::to_string(values.size()));
    }
    for (double v : values) {
        if (std::isnan(v)) throw ValidationError("Lehmer code input contains NaN");
    }
}

// `tolerance` is the margin by which a later value must exceed values[i] to
// count as stronger; anything closer is a tie.
std::uint32_t lehmer_unchecked(std::span<const double> values, double tolerance = 0.0) {
    const int k = static_cast<int>(values.size());
    std::uint32_t code = 0;
    for (int i = 0; i < k; ++i) {
        std::uint32_t stronger_later = 0;
        for (int j = i + 1; j < k; ++j) stronger_later += values[j] > values[i] + tolerance;
        code = code * static_cast<std::uint32_t>(k - i) + stronger_later;
    }
    return code;
}

}  // namespace

std::string_view to_string(ValueMode mode) {
    return mode == ValueMode::Raw ? "raw" : "absolute";
}

ValueMode parse_value_mode(std::string_view text) {
    if (text == "raw") return ValueMode::Raw;
    if (text == "absolute" || text == "abs") return ValueMode::Absolute;
    throw ValidationError("value_mode must be 'raw' or 'absolute', got '" + std::string(text) + "'");
}

void LtmConfig::validate() const {
    validate_kernel_size(kernel_size);
    const int k = moment_count();
    if (k < 2 || k > kMaxMoments) {
        throw ValidationError("orders: need between 2 and " + std::to_string(kMaxMoments) + " moments, got " +
                              std::to_string(k));
    }
    if (weights.size() != orders.size()) {
        throw ValidationError("weights: expected " + std::to_string(k) + " entries to match orders, got " +
                              std::to_string(weights.size()));
    }
    for (const auto& o : orders) {
        if (o.p < 0 || o.q < 0 || o.p >= kernel_size || o.q >= kernel_size) {
            throw ValidationError("orders: " + format_order(o) + " not available for kernel size " +
                                  std::to_string(kernel_size));
        }
    }
    for (double w : weights) {
        if (!(w > 0.0 && w <= kMaxWeight)) {
            throw ValidationError("weights: every weight must lie in (0, 100], got " + std::to_string(w));
        }
    }
}

LtmConfig LtmConfig::defaults() {
    LtmConfig c;
    c.kernel_size = 5;
    c.orders = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}};
    c.weights = {0.1, 5, 5, 5, 5};
    return c;
}

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

std::size_t LtmImage::bin_count() const { return static_cast<std::size_t>(factorial(k)); }

CodeImage LtmImage::as_code_image() const { return CodeImage{width, height, bin_count(), codes}; }

double moment_at(const GrayImage& image, int x, int y, const MomentKernel& kernel) {
    check_window(image, x, y, kernel.size());
    return moment_unchecked(image, x, y, kernel);
}

double tie_tolerance(const LtmConfig& config) {
    const double full_scale = 255.0 * config.kernel_size * config.kernel_size *
                              *std::max_element(config.weights.begin(), config.weights.end());
    return kTieTolerance * full_scale;
}

std::uint32_t lehmer_code(std::span<const double> values, TieRule) {
    validate_values(values);
    return lehmer_unchecked(values);
}

std::vector<MomentKernel> kernels_for(const LtmConfig& config) {
    config.validate();
    const TchebichefBasis basis = build_basis(config.kernel_size);
    std::vector<MomentKernel> kernels;
    kernels.reserve(config.orders.size());
    for (const auto& o : config.orders) kernels.push_back(build_kernel(basis, o));
    return kernels;
}

LtmImage ltm_image(const GrayImage& image, const LtmConfig& config) {
    const auto kernels = kernels_for(config);
    return ltm_image(image, config, kernels);
}

LtmImage ltm_image(const GrayImage& image, const LtmConfig& config, std::span<const MomentKernel> kernels) {
    config.validate();
    const int N = config.kernel_size;
    if (kernels.size() != config.orders.size()) {
        throw ValidationError("expected one kernel per configured order");
    }
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        if (kernels[i].size() != N || kernels[i].order() != config.orders[i]) {
            throw ValidationError("kernel " + std::to_string(i) + " does not match the configured order " +
                                  format_order(config.orders[i]));
        }
    }
    if (image.width < N || image.height < N) {
        throw ValidationError("image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                              " is smaller than the " + std::to_string(N) + "x" + std::to_string(N) + " kernel");
    }

    LtmImage out;
    out.width = image.width - N + 1;
    out.height = image.height - N + 1;
    out.k = config.moment_count();
    out.codes.resize(static_cast<std::size_t>(out.width) * out.height);

    const int half = N / 2;
    const bool absolute = config.value_mode == ValueMode::Absolute;
    const double tolerance = tie_tolerance(config);
    std::vector<double> strengths(kernels.size());
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            for (std::size_t i = 0; i < kernels.size(); ++i) {
                const double m = moment_unchecked(image, x + half, y + half, kernels[i]);
                strengths[i] = config.weights[i] * (absolute ? std::abs(m) : m);
            }
            out.codes[static_cast<std::size_t>(y) * out.width + x] = lehmer_unchecked(strengths, tolerance);
        }
    }
    return out;
}

FeatureVector histogram(const LtmImage& image) { return histogram(image.as_code_image()); }

FeatureVector extract_ltm(const GrayImage& image, const LtmConfig& config) {
    return histogram(ltm_image(image, config));
}

MomentOrder parse_order(std::string_view text) {
    const std::string original(text);
    if (!text.empty() && (text.front() == 'M' || text.front() == 'm')) text.remove_prefix(1);
    auto parse_int = [&](std::string_view part) {
        int v = -1;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc() || ptr != part.data() + part.size() || v < 0) {
            throw ValidationError("cannot parse moment order '" + original + "'");
        }
        return v;
    };
    const auto sep = text.find_first_of(",_");
    if (sep != std::string_view::npos) return {parse_int(text.substr(0, sep)), parse_int(text.substr(sep + 1))};
    if (text.size() != 2) throw ValidationError("cannot parse moment order '" + original + "'");
    return {parse_int(text.substr(0, 1)), parse_int(text.substr(1, 1))};
}

std::string format_order(MomentOrder order) {
    if (order.p < 10 && order.q < 10) return "M" + std::to_string(order.p) + std::to_string(order.q);
    return "M" + std::to_string(order.p) + "_" + std::to_string(order.q);
}

}  // namespace ltmtex
