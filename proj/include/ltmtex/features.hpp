#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace ltmtex {

/// Histogram of descriptor codes. One bin per possible code.
struct FeatureVector {
    std::vector<std::uint32_t> bins;

    std::size_t bin_count() const { return bins.size(); }
    std::uint64_t total() const { return std::accumulate(bins.begin(), bins.end(), std::uint64_t{0}); }

    std::vector<double> as_doubles() const { return {bins.begin(), bins.end()}; }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Descriptor code image over the valid region of a source image.
struct CodeImage {
    int width = 0;
    int height = 0;
    std::size_t bin_count = 0;
    std::vector<std::uint32_t> codes;

    std::uint32_t at(int x, int y) const { return codes[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const CodeImage&, const CodeImage&) = default;
};

/// Counts occurrences of every code; Σ bins equals the number of codes.
FeatureVector histogram(const CodeImage& image);

}  // namespace ltmtex
