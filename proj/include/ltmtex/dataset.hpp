#pragma once

#include "ltmtex/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ltmtex {

enum class PgmFormat { Binary, Ascii };

/// Decodes an 8-bit PGM (P5 or P2). Throws ImageError.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_pgm(const GrayImage& image, PgmFormat format = PgmFormat::Binary);
void write_image(const GrayImage& image, const std::filesystem::path& path, PgmFormat format = PgmFormat::Binary);

struct LabeledImage {
    GrayImage image;
    int label = 0;

    friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

struct DatasetSplit {
    std::string name;
    int classes = 0;
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> test;
};

/// Reads `train.txt` and `test.txt` from `manifest_dir`. Each non-comment line
/// is "relative/path.pgm label"; paths resolve against `manifest_dir`.
DatasetSplit load_split(const std::filesystem::path& manifest_dir);

/// Writes images under train/ and test/ plus both manifests.
void write_split(const DatasetSplit& split, const std::filesystem::path& manifest_dir);

inline constexpr std::uint64_t kDefaultSyntheticSeed = 1;

/// Desk-scale stand-in for Outex: one texture family per class, jittered per
/// image, first half of each class to train and the rest to test.
///
/// Families: horizontal gratings, vertical gratings, checkerboards, binarized
/// value-noise blobs, then diagonal grating, rotated checkerboard, fine blobs
/// and an anti-diagonal high-frequency grating.
DatasetSplit generate_synthetic(int classes, int per_class, int size, std::uint64_t seed = kDefaultSyntheticSeed);

}  // namespace ltmtex
