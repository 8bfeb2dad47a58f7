#pragma once

#include "ltmtex/features.hpp"
#include "ltmtex/image.hpp"

#include <string>
#include <string_view>

namespace ltmtex {

enum class LbpKind { Olbp, CsLbp, CsLdp, XcsLbp };

std::string_view to_string(LbpKind kind);
/// Accepts the CLI spellings: olbp, cslbp, csldp, xcslbp.
LbpKind parse_lbp_kind(std::string_view text);

struct LbpVariant {
    LbpKind kind = LbpKind::Olbp;
    double threshold = 0.0;  // CS-LBP only, on the 0-255 scale

    std::size_t bin_count() const { return kind == LbpKind::Olbp ? 256 : 16; }
};

/// Radius-1, 8-neighbour code image over the valid region (border 1).
///
/// Neighbours g0..g7 run counter-clockwise from the east neighbour, so
/// g_{i+4} is opposite g_i. With s(v) = [v >= 0]:
///   OLBP    Σ_p s(g_p - g_c) 2^p
///   CS-LBP  Σ_i [g_i - g_{i+4} > T] 2^i
///   CS-LDP  Σ_i s((g_i - g_c)(g_c - g_{i+4})) 2^i
///   XCS-LBP Σ_i s((g_i - g_{i+4} + g_c) + (g_i - g_c)(g_{i+4} - g_c)) 2^i
CodeImage lbp_image(const GrayImage& image, const LbpVariant& variant);

FeatureVector extract_lbp(const GrayImage& image, const LbpVariant& variant);

}  // namespace ltmtex
