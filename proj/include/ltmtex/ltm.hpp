#pragma once

#include "ltmtex/features.hpp"
#include "ltmtex/image.hpp"
#include "ltmtex/tchebichef.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltmtex {

inline constexpr int kMaxMoments = 8;
inline constexpr double kMaxWeight = 100.0;

/// Weighted moments closer than this fraction of the window's full-scale
/// response (255 N² max weight) rank as equal.
inline constexpr double kTieTolerance = 1e-12;

enum class ValueMode { Raw, Absolute };

/// How equal weighted moments are ordered. Only one rule exists: the moment
/// listed first counts as the stronger one.
enum class TieRule { EarlierIndexStronger };

std::string_view to_string(ValueMode mode);
ValueMode parse_value_mode(std::string_view text);

struct LtmConfig {
    int kernel_size = 5;
    std::vector<MomentOrder> orders;
    std::vector<double> weights;
    ValueMode value_mode = ValueMode::Raw;
    TieRule tie_rule = TieRule::EarlierIndexStronger;

    int moment_count() const { return static_cast<int>(orders.size()); }

    /// Throws ValidationError naming the offending field.
    void validate() const;

    /// 5x5 kernels, orders M00 M01 M10 M11 M20, weights 0.1 5 5 5 5.
    static LtmConfig defaults();

    friend bool operator==(const LtmConfig&, const LtmConfig&) = default;
};

/// Lehmer-coded LTM image; codes lie in [0, k!).
struct LtmImage {
    int width = 0;
    int height = 0;
    int k = 0;
    std::vector<std::uint32_t> codes;

    std::uint32_t at(int x, int y) const { return codes[static_cast<std::size_t>(y) * width + x]; }
    std::size_t bin_count() const;
    CodeImage as_code_image() const;

    friend bool operator==(const LtmImage&, const LtmImage&) = default;
};

std::uint64_t factorial(int n);

/// Correlation of `kernel` with the N x N window centred on (x, y).
///
/// Evaluated separably with parity folding on centre-relative intensities for
/// every order other than (0, 0); this is exact zero on flat windows and
/// exactly invariant to gray-level shifts.
double moment_at(const GrayImage& image, int x, int y, const MomentKernel& kernel);

/// Rank code of `values`: Σ_i c_i (k-1-i)! with c_i the number of later
/// entries strictly greater than values[i].
std::uint32_t lehmer_code(std::span<const double> values, TieRule tie_rule = TieRule::EarlierIndexStronger);

/// Absolute tie margin used by ltm_image for `config`.
double tie_tolerance(const LtmConfig& config);

/// Per-pixel weighted moments over the valid region, Lehmer coded. Moments
/// within tie_tolerance(config) of each other are ties.
LtmImage ltm_image(const GrayImage& image, const LtmConfig& config);
LtmImage ltm_image(const GrayImage& image, const LtmConfig& config, std::span<const MomentKernel> kernels);

/// Kernels for config.orders, in order (duplicates included).
std::vector<MomentKernel> kernels_for(const LtmConfig& config);

FeatureVector histogram(const LtmImage& image);

FeatureVector extract_ltm(const GrayImage& image, const LtmConfig& config);

/// "M01" / "01" / "0,1" for single-digit orders; "M3_12" / "3_12" / "3,12" for wider ones.
MomentOrder parse_order(std::string_view text);
std::string format_order(MomentOrder order);

}  // namespace ltmtex
