#include "ltmtex/dataset.hpp"
#include "ltmtex/error.hpp"
#include "ltmtex/lbp.hpp"
#include "ltmtex/random.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

namespace ltmtex {
namespace {

namespace fs = std::filesystem;

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("ltmtex_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    void write_text(const fs::path& rel, const std::string& text) const {
        fs::create_directories((dir_ / rel).parent_path());
        std::ofstream(dir_ / rel, std::ios::binary) << text;
    }

    fs::path dir_;
};

ImageErrorKind decode_error(const std::string& text) {
    try {
        decode_pgm(bytes_of(text));
    } catch (const ImageError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for input";
    return ImageErrorKind::MissingFile;
}

TEST(Pgm, BinaryAndAsciiDecodeAlike) {
    std::string p5 = "P5\n2 2\n255\n";
    p5 += std::string{'\x00', '\x40', '\x80', '\xff'};
    const GrayImage a = decode_pgm(bytes_of(p5));
    EXPECT_EQ(a, GrayImage(2, 2, {0, 64, 128, 255}));

    const GrayImage b = decode_pgm(bytes_of("P2\n# a comment\n2 2\n255\n0 64\n128 255\n"));
    EXPECT_EQ(a, b);

    const GrayImage c = decode_pgm(bytes_of("P5 # header comment\n2 # w\n2\n255\n\x01\x02\x03\x04"));
    EXPECT_EQ(c.pixels, (std::vector<std::uint8_t>{1, 2, 3, 4}));
}

TEST(Pgm, SmallMaxvalKeepsRawSamples) {
    EXPECT_EQ(decode_pgm(bytes_of("P2 3 1 15 0 7 15")).pixels, (std::vector<std::uint8_t>{0, 7, 15}));
}

TEST(Pgm, ErrorKinds) {
    EXPECT_EQ(decode_error("P6\n2 2\n255\n...."), ImageErrorKind::MalformedHeader);
    EXPECT_EQ(decode_error(""), ImageErrorKind::MalformedHeader);
    EXPECT_EQ(decode_error("P5\n0 2\n255\n"), ImageErrorKind::MalformedHeader);
    EXPECT_EQ(decode_error("P5\n2 x\n255\n"), ImageErrorKind::MalformedHeader);
    EXPECT_EQ(decode_error("P5\n2 2\n65535\n12345678"), ImageErrorKind::UnsupportedDepth);
    EXPECT_EQ(decode_error("P5\n2 2\n255\n\x01\x02\x03"), ImageErrorKind::MalformedPayload);
    EXPECT_EQ(decode_error("P2\n2 2\n255\n1 2 3"), ImageErrorKind::MalformedPayload);
    EXPECT_EQ(decode_error("P2\n2 2\n100\n1 2 3 101"), ImageErrorKind::MalformedPayload);
    EXPECT_EQ(to_string(ImageErrorKind::MalformedPayload), "malformed_payload");
}

TEST_F(TempDir, MissingFile) {
    try {
        load_image(dir_ / "nope.pgm");
        FAIL();
    } catch (const ImageError& e) {
        EXPECT_EQ(e.kind(), ImageErrorKind::MissingFile);
    }
}

TEST_F(TempDir, P5RoundTripIsByteIdentical) {
    Rng rng(3);
    GrayImage img(17, 9);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(uniform_index(rng, 256));
    const auto encoded = encode_pgm(img);
    EXPECT_EQ(encode_pgm(decode_pgm(encoded)), encoded);

    write_image(img, dir_ / "a.pgm");
    EXPECT_EQ(load_image(dir_ / "a.pgm"), img);
    write_image(img, dir_ / "b.pgm", PgmFormat::Ascii);
    EXPECT_EQ(load_image(dir_ / "b.pgm"), img);
}

TEST_F(TempDir, TcTenShapedManifest) {
    std::string one = "P5\n4 4\n255\n" + std::string(16, '\x20');
    write_text("images/blank.pgm", one);
    std::string train = "# tc10 train\n", test;
    for (int i = 0; i < 480; ++i) train += "images/blank.pgm " + std::to_string(i % 24) + "\n";
    for (int i = 0; i < 3840; ++i) test += "images/blank.pgm " + std::to_string(i % 24) + "\n";
    write_text("train.txt", train);
    write_text("test.txt", test);
    const auto split = load_split(dir_);
    EXPECT_EQ(split.classes, 24);
    EXPECT_EQ(split.train.size(), 480u);
    EXPECT_EQ(split.test.size(), 3840u);
    EXPECT_EQ(split.name, dir_.filename().string());
}

TEST_F(TempDir, ManifestErrors) {
    write_text("a.pgm", "P2 2 2 255 1 2 3 4");
    write_text("train.txt", "a.pgm 0\na.pgm 1\n");
    write_text("test.txt", "# nothing here\n\n");
    EXPECT_THROW(load_split(dir_), ValidationError);

    write_text("test.txt", "a.pgm 0\n");
    EXPECT_NO_THROW(load_split(dir_));

    write_text("train.txt", "a.pgm 0\n\na.pgm two\n");
    try {
        load_split(dir_);
        FAIL();
    } catch (const DatasetError& e) {
        EXPECT_NE(std::string(e.what()).find("train.txt:3:"), std::string::npos) << e.what();
    }

    write_text("train.txt", "a.pgm 0\nmissing.pgm 1\n");
    try {
        load_split(dir_);
        FAIL();
    } catch (const DatasetError& e) {
        EXPECT_NE(std::string(e.what()).find("train.txt:2:"), std::string::npos) << e.what();
    }

    write_text("train.txt", "a.pgm 0\na.pgm 2\n");
    EXPECT_THROW(load_split(dir_), DatasetError);

    fs::remove(dir_ / "test.txt");
    write_text("train.txt", "a.pgm 0\na.pgm 1\n");
    EXPECT_THROW(load_split(dir_), DatasetError);
}

TEST(Synthetic, ShapeAndBalance) {
    const auto split = generate_synthetic(4, 20, 64, kDefaultSyntheticSeed);
    EXPECT_EQ(split.classes, 4);
    ASSERT_EQ(split.train.size(), 40u);
    ASSERT_EQ(split.test.size(), 40u);
    std::map<int, int> train_counts, test_counts;
    for (const auto& s : split.train) {
        ++train_counts[s.label];
        EXPECT_EQ(s.image.width, 64);
        EXPECT_EQ(s.image.height, 64);
    }
    for (const auto& s : split.test) ++test_counts[s.label];
    for (int c = 0; c < 4; ++c) {
        EXPECT_EQ(train_counts[c], 10);
        EXPECT_EQ(test_counts[c], 10);
    }
}

TEST(Synthetic, Deterministic) {
    const auto a = generate_synthetic(8, 4, 32, 5);
    const auto b = generate_synthetic(8, 4, 32, 5);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    const auto c = generate_synthetic(8, 4, 32, 6);
    EXPECT_NE(a.train, c.train);
}

TEST(Synthetic, ParameterBounds) {
    EXPECT_THROW(generate_synthetic(1, 4, 32, 1), ValidationError);
    EXPECT_THROW(generate_synthetic(9, 4, 32, 1), ValidationError);
    EXPECT_THROW(generate_synthetic(4, 4, 15, 1), ValidationError);
    EXPECT_THROW(generate_synthetic(4, 1, 32, 1), ValidationError);
    EXPECT_NO_THROW(generate_synthetic(2, 2, 16, 1));
}

TEST_F(TempDir, SyntheticRoundTrip) {
    const auto split = generate_synthetic(4, 6, 32, 9);
    write_split(split, dir_ / "synth");
    const auto loaded = load_split(dir_ / "synth");
    EXPECT_EQ(loaded.classes, split.classes);
    EXPECT_EQ(loaded.train, split.train);
    EXPECT_EQ(loaded.test, split.test);
}

double chi_square(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = a[i] + b[i];
        if (s > 0) d += (a[i] - b[i]) * (a[i] - b[i]) / s;
    }
    return d;
}

TEST(Synthetic, ClassesSeparateUnderOlbp) {
    const auto split = generate_synthetic(4, 20, 64, kDefaultSyntheticSeed);
    std::map<int, std::vector<std::vector<double>>> by_class;
    for (const auto* part : {&split.train, &split.test}) {
        for (const auto& s : *part) {
            auto h = extract_lbp(s.image, {LbpKind::Olbp}).as_doubles();
            const double total = static_cast<double>(62 * 62);
            for (auto& v : h) v /= total;
            by_class[s.label].push_back(std::move(h));
        }
    }

    // Within-class spread: mean distance from each image to its class mean.
    std::map<int, std::vector<double>> means;
    double within = 0.0;
    int images = 0;
    for (const auto& [label, hists] : by_class) {
        std::vector<double> m(256, 0.0);
        for (const auto& h : hists)
            for (std::size_t i = 0; i < 256; ++i) m[i] += h[i] / static_cast<double>(hists.size());
        means[label] = m;
        for (const auto& h : hists) {
            within += chi_square(h, m);
            ++images;
        }
    }
    within /= images;

    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            EXPECT_GT(chi_square(means[a], means[b]), within) << "classes " << a << " and " << b;
}

}  // namespace
}  // namespace ltmtex
