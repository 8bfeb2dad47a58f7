#include "ltmtex/lbp.hpp"

#include "ltmtex/error.hpp"

#include <array>
#include <string>

namespace ltmtex {

namespace {

// (dx, dy) counter-clockwise from east; y grows downwards.
constexpr std::array<std::array<int, 2>, 8> kNeighbours{{
    {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1},
}};

std::uint32_t code_at(const GrayImage& img, int x, int y, const LbpVariant& variant) {
    std::array<int, 8> g{};
    for (int i = 0; i < 8; ++i) g[i] = img.at(x + kNeighbours[i][0], y + kNeighbours[i][1]);
    const int c = img.at(x, y);

    std::uint32_t code = 0;
    switch (variant.kind) {
        case LbpKind::Olbp:
            for (int p = 0; p < 8; ++p) code |= static_cast<std::uint32_t>(g[p] - c >= 0) << p;
            break;
        case LbpKind::CsLbp:
            for (int i = 0; i < 4; ++i)
                code |= static_cast<std::uint32_t>(static_cast<double>(g[i] - g[i + 4]) > variant.threshold) << i;
            break;
        case LbpKind::CsLdp:
            for (int i = 0; i < 4; ++i) code |= static_cast<std::uint32_t>((g[i] - c) * (c - g[i + 4]) >= 0) << i;
            break;
        case LbpKind::XcsLbp:
            for (int i = 0; i < 4; ++i) {
                const int v = (g[i] - g[i + 4] + c) + (g[i] - c) * (g[i + 4] - c);
                code |= static_cast<std::uint32_t>(v >= 0) << i;
            }
            break;
    }
    return code;
}

}  // namespace

std::string_view to_string(LbpKind kind) {
    switch (kind) {
        case LbpKind::Olbp: return "olbp";
        case LbpKind::CsLbp: return "cslbp";
        case LbpKind::CsLdp: return "csldp";
        case LbpKind::XcsLbp: return "xcslbp";
    }
    return "?";
}

LbpKind parse_lbp_kind(std::string_view text) {
    if (text == "olbp") return LbpKind::Olbp;
    if (text == "cslbp") return LbpKind::CsLbp;
    if (text == "csldp") return LbpKind::CsLdp;
    if (text == "xcslbp") return LbpKind::XcsLbp;
    throw ValidationError("unknown LBP variant '" + std::string(text) + "'");
}

CodeImage lbp_image(const GrayImage& image, const LbpVariant& variant) {
    if (image.width < 3 || image.height < 3) {
        throw ValidationError("LBP needs an image of at least 3x3, got " + std::to_string(image.width) + "x" +
                              std::to_string(image.height));
    }
    if (variant.kind == LbpKind::CsLbp && !(variant.threshold >= 0.0)) {
        throw ValidationError("CS-LBP threshold must be >= 0");
    }
    CodeImage out;
    out.width = image.width - 2;
    out.height = image.height - 2;
    out.bin_count = variant.bin_count();
    out.codes.resize(static_cast<std::size_t>(out.width) * out.height);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.codes[static_cast<std::size_t>(y) * out.width + x] = code_at(image, x + 1, y + 1, variant);
    return out;
}

FeatureVector extract_lbp(const GrayImage& image, const LbpVariant& variant) {
    return histogram(lbp_image(image, variant));
}

}  // namespace ltmtex
