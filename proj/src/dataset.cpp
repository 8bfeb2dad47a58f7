#include "ltmtex/dataset.hpp"

#include "ltmtex/error.hpp"
#include "ltmtex/random.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

namespace ltmtex {

namespace fs = std::filesystem;

std::string_view to_string(ImageErrorKind kind) {
    switch (kind) {
        case ImageErrorKind::MissingFile: return "missing_file";
        case ImageErrorKind::MalformedHeader: return "malformed_header";
        case ImageErrorKind::UnsupportedDepth: return "unsupported_depth";
        case ImageErrorKind::MalformedPayload: return "malformed_payload";
    }
    return "unknown";
}

namespace {

class PgmReader {
public:
    explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    // Next whitespace-delimited token, skipping '#' comments.
    std::string_view token() {
        for (;;) {
            while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
            if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
                continue;
            }
            break;
        }
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') ++pos_;
        return {reinterpret_cast<const char*>(bytes_.data()) + start, pos_ - start};
    }

    std::size_t position() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

bool parse_int(std::string_view text, long& out) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return !text.empty() && ec == std::errc() && ptr == text.data() + text.size();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<LabeledImage> read_manifest(const fs::path& dir, const std::string& file, int& max_label) {
    const fs::path manifest = dir / file;
    std::ifstream in(manifest);
    if (!in) throw DatasetError(manifest.string() + ": manifest not found");

    std::vector<LabeledImage> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = file + ":" + std::to_string(line_no) + ": ";
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto sep = body.find_last_of(" \t");
        long label = -1;
        if (sep == std::string::npos || !parse_int(trim(body.substr(sep + 1)), label) || label < 0) {
            throw DatasetError(where + "expected '<path> <non-negative label>', got '" + body + "'");
        }
        const std::string rel = trim(body.substr(0, sep));
        try {
            out.push_back({load_image(dir / rel), static_cast<int>(label)});
        } catch (const ImageError& e) {
            throw DatasetError(where + "cannot load '" + rel + "': " + e.what());
        }
        max_label = std::max(max_label, static_cast<int>(label));
    }
    if (out.empty()) throw ValidationError(manifest.string() + ": manifest lists no images");
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic textures

using Field = std::vector<double>;

struct Canvas {
    int size;
    Field v;
    explicit Canvas(int n) : size(n), v(static_cast<std::size_t>(n) * n, 0.0) {}
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * size + x]; }
};

void grating(Canvas& c, Rng& rng, double angle, double base_period) {
    const double period = base_period * uniform_real(rng, 0.85, 1.2);
    const double phase = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
    const double amp = uniform_real(rng, 60.0, 100.0);
    const double theta = angle + uniform_real(rng, -0.05, 0.05);
    const double ux = std::cos(theta), uy = std::sin(theta);
    for (int y = 0; y < c.size; ++y)
        for (int x = 0; x < c.size; ++x)
            c.at(x, y) = 128.0 + amp * std::sin(2.0 * std::numbers::pi * (x * ux + y * uy) / period + phase);
}

void checkerboard(Canvas& c, Rng& rng, double angle, int min_cell, int max_cell) {
    const double cell = static_cast<double>(min_cell + static_cast<int>(uniform_index(rng, max_cell - min_cell + 1)));
    const double ox = uniform_real(rng, 0.0, 2.0 * cell), oy = uniform_real(rng, 0.0, 2.0 * cell);
    const double lo = uniform_real(rng, 40.0, 90.0), hi = uniform_real(rng, 160.0, 220.0);
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (int y = 0; y < c.size; ++y) {
        for (int x = 0; x < c.size; ++x) {
            const double u = x * ca + y * sa + ox;
            const double w = -x * sa + y * ca + oy;
            const long parity = static_cast<long>(std::floor(u / cell)) + static_cast<long>(std::floor(w / cell));
            c.at(x, y) = (parity % 2 == 0) ? hi : lo;
        }
    }
}

void blobs(Canvas& c, Rng& rng, double min_spacing, double max_spacing) {
    const double spacing = uniform_real(rng, min_spacing, max_spacing);
    const int cells = static_cast<int>(std::ceil(c.size / spacing)) + 2;
    std::vector<double> lattice(static_cast<std::size_t>(cells) * cells);
    for (auto& v : lattice) v = uniform_real(rng);
    const double lo = uniform_real(rng, 40.0, 90.0), hi = uniform_real(rng, 160.0, 220.0);
    auto node = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * cells + i]; };
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    for (int y = 0; y < c.size; ++y) {
        for (int x = 0; x < c.size; ++x) {
            const double gx = x / spacing, gy = y / spacing;
            const int i = static_cast<int>(gx), j = static_cast<int>(gy);
            const double fx = smooth(gx - i), fy = smooth(gy - j);
            const double top = node(i, j) * (1 - fx) + node(i + 1, j) * fx;
            const double bottom = node(i, j + 1) * (1 - fx) + node(i + 1, j + 1) * fx;
            c.at(x, y) = (top * (1 - fy) + bottom * fy) > 0.5 ? hi : lo;
        }
    }
}

GrayImage render_texture(int family, int size, Rng& rng) {
    constexpr double pi = std::numbers::pi;
    Canvas c(size);
    switch (family) {
        case 0: grating(c, rng, pi / 2, 8.0); break;  // stripes varying along y
        case 1: grating(c, rng, 0.0, 8.0); break;
        case 2: checkerboard(c, rng, 0.0, 4, 10); break;
        case 3: blobs(c, rng, 6.0, 12.0); break;
        case 4: grating(c, rng, pi / 4, 11.0); break;
        case 5: checkerboard(c, rng, pi / 4, 5, 9); break;
        case 6: blobs(c, rng, 3.0, 5.0); break;
        default: grating(c, rng, 3 * pi / 4, 5.0); break;
    }
    const double sigma = uniform_real(rng, 4.0, 10.0);
    GrayImage img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double v = std::round(c.at(x, y) + sigma * standard_normal(rng));
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return img;
}

}  // namespace

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> data) : width(w), height(h), pixels(std::move(data)) {
    if (w < 0 || h < 0 || pixels.size() != static_cast<std::size_t>(w) * h) {
        throw ValidationError("pixel buffer does not match " + std::to_string(w) + "x" + std::to_string(h));
    }
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    PgmReader r(bytes);
    const std::string_view magic = r.token();
    if (magic != "P5" && magic != "P2") {
        throw ImageError(ImageErrorKind::MalformedHeader, "malformed header: not a P2/P5 PGM");
    }
    long width = 0, height = 0, maxval = 0;
    if (!parse_int(r.token(), width) || !parse_int(r.token(), height) || width <= 0 || height <= 0) {
        throw ImageError(ImageErrorKind::MalformedHeader, "malformed header: bad dimensions");
    }
    if (!parse_int(r.token(), maxval) || maxval <= 0) {
        throw ImageError(ImageErrorKind::MalformedHeader, "malformed header: bad maxval");
    }
    if (maxval > 255) {
        throw ImageError(ImageErrorKind::UnsupportedDepth,
                         "unsupported depth: maxval " + std::to_string(maxval) + " exceeds 8 bits");
    }
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint8_t> pixels(count);

    if (magic == "P5") {
        // Exactly one whitespace byte separates maxval from the raster.
        if (r.remaining() == 0 || !std::isspace(bytes[r.position()])) {
            throw ImageError(ImageErrorKind::MalformedPayload, "malformed payload: missing raster");
        }
        r.advance(1);
        if (r.remaining() < count) {
            throw ImageError(ImageErrorKind::MalformedPayload, "malformed payload: expected " + std::to_string(count) +
                                                                   " bytes, got " + std::to_string(r.remaining()));
        }
        const auto raster = r.rest().first(count);
        std::copy(raster.begin(), raster.end(), pixels.begin());
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            long v = -1;
            if (!parse_int(r.token(), v) || v < 0 || v > maxval) {
                throw ImageError(ImageErrorKind::MalformedPayload,
                                 "malformed payload: bad or missing sample " + std::to_string(i));
            }
            pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    for (auto p : pixels) {
        if (p > maxval) throw ImageError(ImageErrorKind::MalformedPayload, "malformed payload: sample exceeds maxval");
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

GrayImage load_image(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError(ImageErrorKind::MissingFile, "missing file: " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_pgm(bytes);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image, PgmFormat format) {
    std::ostringstream out;
    out << (format == PgmFormat::Binary ? "P5" : "P2") << '\n' << image.width << ' ' << image.height << "\n255\n";
    if (format == PgmFormat::Binary) {
        out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    } else {
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) out << (x ? " " : "") << static_cast<int>(image.at(x, y));
            out << '\n';
        }
    }
    const std::string s = out.str();
    return {s.begin(), s.end()};
}

void write_image(const GrayImage& image, const fs::path& path, PgmFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError(ImageErrorKind::MissingFile, "cannot open for writing: " + path.string());
    const auto bytes = encode_pgm(image, format);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

DatasetSplit load_split(const fs::path& manifest_dir) {
    DatasetSplit split;
    split.name = manifest_dir.filename().empty() ? manifest_dir.parent_path().filename().string()
                                                 : manifest_dir.filename().string();
    int max_label = -1;
    split.train = read_manifest(manifest_dir, "train.txt", max_label);
    split.test = read_manifest(manifest_dir, "test.txt", max_label);
    split.classes = max_label + 1;

    std::set<int> seen;
    for (const auto& s : split.train) seen.insert(s.label);
    for (int c = 0; c < split.classes; ++c) {
        if (!seen.contains(c)) {
            throw DatasetError("train.txt: label " + std::to_string(c) + " never appears although labels reach " +
                               std::to_string(max_label));
        }
    }
    return split;
}

void write_split(const DatasetSplit& split, const fs::path& manifest_dir) {
    for (const char* part : {"train", "test"}) {
        const auto& items = std::string_view(part) == "train" ? split.train : split.test;
        fs::create_directories(manifest_dir / part);
        std::ofstream manifest(manifest_dir / (std::string(part) + ".txt"));
        if (!manifest) throw DatasetError("cannot write manifest in " + manifest_dir.string());
        manifest << "# " << split.name << " " << part << " split: path label\n";
        for (std::size_t i = 0; i < items.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "%s/%05zu_c%d.pgm", part, i, items[i].label);
            write_image(items[i].image, manifest_dir / name);
            manifest << name << ' ' << items[i].label << '\n';
        }
    }
}

DatasetSplit generate_synthetic(int classes, int per_class, int size, std::uint64_t seed) {
    if (classes < 2 || classes > 8) throw ValidationError("synthetic classes must lie in [2, 8]");
    if (per_class < 2) throw ValidationError("synthetic per_class must be >= 2");
    if (size < 16) throw ValidationError("synthetic image size must be >= 16");

    DatasetSplit split;
    split.name = "synthetic:" + std::to_string(classes) + ":" + std::to_string(per_class) + ":" + std::to_string(seed);
    split.classes = classes;
    const int train_count = (per_class + 1) / 2;
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < per_class; ++i) {
            Rng rng(mix_seed(seed ^ mix_seed((static_cast<std::uint64_t>(c) << 32) | static_cast<std::uint64_t>(i))));
            LabeledImage item{render_texture(c, size, rng), c};
            (i < train_count ? split.train : split.test).push_back(std::move(item));
        }
    }
    return split;
}

}  // namespace ltmtex
