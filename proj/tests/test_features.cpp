#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "bbinit/errors.hpp"
#include "bbinit/features.hpp"

using namespace bbinit;

namespace {

Image random_image(int w, int h, std::uint32_t seed) {
    Image img(w, h);
    std::mt19937 rng(seed);
    for (Rgb& p : img.pixels)
        p = {static_cast<std::uint8_t>(rng() & 0xff), static_cast<std::uint8_t>(rng() & 0xff),
             static_cast<std::uint8_t>(rng() & 0xff)};
    return img;
}

// Independent riu2 code evaluation used as an oracle for lbp_at.
int oracle_riu2(const Image& img, int channel, int px, int py) {
    auto sample = [&](double sx, double sy) {
        int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
        double fx = sx - x0, fy = sy - y0;
        auto value = [&](int x, int y) {
            x = std::clamp(x, 0, img.width - 1);
            y = std::clamp(y, 0, img.height - 1);
            const Rgb& p = img.at(x, y);
            return channel == 0 ? double(p.r) : channel == 1 ? double(p.g) : double(p.b);
        };
        return value(x0, y0) * (1 - fx) * (1 - fy) + value(x0 + 1, y0) * fx * (1 - fy) +
               value(x0, y0 + 1) * (1 - fx) * fy + value(x0 + 1, y0 + 1) * fx * fy;
    };
    const Rgb& c = img.at(px, py);
    double centre = channel == 0 ? c.r : channel == 1 ? c.g : c.b;
    std::array<int, 8> bits{};
    for (int k = 0; k < 8; ++k) {
        double angle = 2.0 * M_PI * k / 8.0;
        double v = sample(px + 2.0 * std::cos(angle), py - 2.0 * std::sin(angle));
        bits[k] = v >= centre ? 1 : 0;
    }
    int transitions = 0, ones = 0;
    for (int k = 0; k < 8; ++k) {
        transitions += bits[k] != bits[(k + 1) % 8];
        ones += bits[k];
    }
    return transitions <= 2 ? ones : 9;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("feature dimensions are fixed per kind") {
    CHECK(feature_dimension(FeatureKind::RgbHist) == 512);
    CHECK(feature_dimension(FeatureKind::LabHist) == 512);
    CHECK(feature_dimension(FeatureKind::Sift) == 384);
    CHECK(feature_dimension(FeatureKind::Lbp) == 30);
    CHECK(feature_kind_from_string("lab") == FeatureKind::LabHist);
    CHECK_THROWS_AS(feature_kind_from_string("hog"), InvalidInput);
}

TEST_CASE("srgb_to_lab hits the reference values") {
    auto black = srgb_to_lab({0, 0, 0});
    CHECK(black[0] == doctest::Approx(0).epsilon(1e-6));
    CHECK(black[1] == doctest::Approx(0).epsilon(1e-6));
    CHECK(black[2] == doctest::Approx(0).epsilon(1e-6));

    auto white = srgb_to_lab({255, 255, 255});
    CHECK(white[0] == doctest::Approx(100).epsilon(1e-4));
    CHECK(std::abs(white[1]) < 1e-2);
    CHECK(std::abs(white[2]) < 1e-2);

    auto red = srgb_to_lab({255, 0, 0});
    CHECK(std::abs(red[0] - 53.24) < 0.1);
    CHECK(std::abs(red[1] - 80.09) < 0.1);
    CHECK(std::abs(red[2] - 67.20) < 0.1);
}

TEST_CASE("srgb_to_lab L is strictly increasing in grey level") {
    double prev = -1.0;
    for (int g = 0; g < 256; ++g) {
        auto lab = srgb_to_lab({static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(g),
                                static_cast<std::uint8_t>(g)});
        CHECK(lab[0] > prev);
        prev = lab[0];
    }
}

TEST_CASE("colour_histogram concentrates mass on constant inputs") {
    Image img(4, 4, {0, 0, 0});
    std::vector<int> all(16);
    for (int i = 0; i < 16; ++i) all[i] = i;
    FeatureVector h = colour_histogram(img, all, FeatureKind::RgbHist);
    CHECK(h.values[0] == doctest::Approx(1.0));
    CHECK(h.values.sum() == doctest::Approx(1.0));

    for (int i = 8; i < 16; ++i) img.pixels[i] = {255, 255, 255};
    FeatureVector h2 = colour_histogram(img, all, FeatureKind::RgbHist);
    CHECK(h2.values[0] == doctest::Approx(0.5));
    CHECK(h2.values[511] == doctest::Approx(0.5));
}

TEST_CASE("colour_histogram matches brute-force binning on random pixels") {
    Image img = random_image(10, 10, 17);
    std::vector<int> all(100);
    for (int i = 0; i < 100; ++i) all[i] = i;
    FeatureVector h = colour_histogram(img, all, FeatureKind::RgbHist);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(512);
    for (const Rgb& p : img.pixels) {
        int br = p.r * 8 / 256, bg = p.g * 8 / 256, bb = p.b * 8 / 256;
        expect[(br * 8 + bg) * 8 + bb] += 1.0 / 100.0;
    }
    CHECK((h.values - expect).cwiseAbs().maxCoeff() < 1e-12);

    // Order invariance.
    std::mt19937 rng(5);
    std::shuffle(all.begin(), all.end(), rng);
    FeatureVector h2 = colour_histogram(img, all, FeatureKind::RgbHist);
    CHECK((h.values - h2.values).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(colour_histogram(img, {}, FeatureKind::RgbHist), InvalidInput);
}

TEST_CASE("lab histogram is normalised and clamps extremes into range") {
    Image img(2, 2, {255, 0, 0});
    FeatureVector h = colour_histogram(img, {0, 1, 2, 3}, FeatureKind::LabHist);
    CHECK(h.values.sum() == doctest::Approx(1.0));
    CHECK(h.values.minCoeff() >= 0.0);
    CHECK(h.values.maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("dense_sift_at is zero on uniform images") {
    Image img(32, 32, {120, 120, 120});
    FeatureVector d = dense_sift_at(img, 16, 16);
    CHECK(d.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense_sift_at concentrates energy on a vertical step edge") {
    Image img(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            img.at(x, y) = x < 16 ? Rgb{20, 20, 20} : Rgb{230, 230, 230};
    FeatureVector d = dense_sift_at(img, 16, 16);
    REQUIRE(d.values.size() == 384);
    for (int ch = 0; ch < 3; ++ch) {
        double total = 0.0, horizontal = 0.0;
        for (int i = 0; i < 128; ++i) {
            double v = d.values[ch * 128 + i];
            total += v;
            if (i % 8 == 0 || i % 8 == 4) horizontal += v;
        }
        REQUIRE(total > 0.0);
        CHECK(horizontal / total > 0.9);
    }
}

TEST_CASE("dense_sift_at channel symmetry and clipping bound") {
    Image img = random_image(24, 24, 23);
    for (Rgb& p : img.pixels) p = {p.r, p.r, p.r};
    FeatureVector d = dense_sift_at(img, 12, 12);
    for (int i = 0; i < 128; ++i) {
        CHECK(d.values[i] == doctest::Approx(d.values[128 + i]));
        CHECK(d.values[i] == doctest::Approx(d.values[256 + i]));
    }
    CHECK(d.values.minCoeff() >= 0.0);
    CHECK(d.values.maxCoeff() <= 0.2 + 1e-6);
    CHECK_THROWS_AS(dense_sift_at(img, -1, 5), InvalidInput);
}

TEST_CASE("dense_sift_at is invariant to a constant intensity offset") {
    Image img = random_image(24, 24, 31);
    for (Rgb& p : img.pixels)
        p = {static_cast<std::uint8_t>(p.r / 2), static_cast<std::uint8_t>(p.g / 2),
             static_cast<std::uint8_t>(p.b / 2)};
    Image shifted = img;
    for (Rgb& p : shifted.pixels)
        p = {static_cast<std::uint8_t>(p.r + 50), static_cast<std::uint8_t>(p.g + 50),
             static_cast<std::uint8_t>(p.b + 50)};
    FeatureVector a = dense_sift_at(img, 12, 12);
    FeatureVector b = dense_sift_at(shifted, 12, 12);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("lbp_at gives code 8 unit mass on uniform images") {
    Image img(16, 16, {77, 77, 77});
    FeatureVector d = lbp_at(img, 8, 8);
    REQUIRE(d.values.size() == 30);
    for (int ch = 0; ch < 3; ++ch) {
        CHECK(d.values[ch * 10 + 8] == doctest::Approx(1.0));
        double sum = 0.0;
        for (int i = 0; i < 10; ++i) sum += d.values[ch * 10 + i];
        CHECK(sum == doctest::Approx(1.0));
    }
}

TEST_CASE("lbp_at matches an independent code evaluation") {
    Image img(16, 16, {0, 0, 0});
    img.at(8, 8) = {250, 250, 250};
    FeatureVector d = lbp_at(img, 8, 8);
    for (int ch = 0; ch < 3; ++ch) {
        Eigen::VectorXd expect = Eigen::VectorXd::Zero(10);
        for (int wy = 6; wy <= 10; ++wy)
            for (int wx = 6; wx <= 10; ++wx) expect[oracle_riu2(img, ch, wx, wy)] += 1.0 / 25.0;
        for (int i = 0; i < 10; ++i) CHECK(d.values[ch * 10 + i] == doctest::Approx(expect[i]));
    }

    Image noisy = random_image(16, 16, 41);
    FeatureVector dn = lbp_at(noisy, 7, 9);
    for (int ch = 0; ch < 3; ++ch) {
        Eigen::VectorXd expect = Eigen::VectorXd::Zero(10);
        for (int wy = 7; wy <= 11; ++wy)
            for (int wx = 5; wx <= 9; ++wx) expect[oracle_riu2(noisy, ch, wx, wy)] += 1.0 / 25.0;
        for (int i = 0; i < 10; ++i)
            CHECK(dn.values[ch * 10 + i] == doctest::Approx(expect[i]));
    }
}

TEST_CASE("lbp_at channel symmetry and offset invariance") {
    Image img = random_image(16, 16, 43);
    for (Rgb& p : img.pixels) p = {static_cast<std::uint8_t>(p.g / 2), static_cast<std::uint8_t>(p.g / 2), static_cast<std::uint8_t>(p.g / 2)};
    FeatureVector a = lbp_at(img, 8, 8);
    for (int i = 0; i < 10; ++i) {
        CHECK(a.values[i] == doctest::Approx(a.values[10 + i]));
        CHECK(a.values[i] == doctest::Approx(a.values[20 + i]));
    }
    Image shifted = img;
    for (Rgb& p : shifted.pixels)
        p = {static_cast<std::uint8_t>(p.r + 40), static_cast<std::uint8_t>(p.g + 40),
             static_cast<std::uint8_t>(p.b + 40)};
    FeatureVector b = lbp_at(shifted, 8, 8);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(lbp_at(img, 20, 8), InvalidInput);
}

TEST_CASE("standardize centres and scales each dimension") {
    Eigen::MatrixXd X(2, 1);
    X << 1, 3;
    auto [Z, stats] = standardize(X);
    CHECK(Z(0, 0) == doctest::Approx(-1));
    CHECK(Z(1, 0) == doctest::Approx(1));
    CHECK(stats.mean[0] == doctest::Approx(2));
    CHECK(stats.stddev[0] == doctest::Approx(1));

    Eigen::MatrixXd C(3, 1);
    C << 5, 5, 5;
    auto [Zc, sc] = standardize(C);
    CHECK(Zc.cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd one(1, 2);
    CHECK_THROWS_AS(standardize(one), InvalidInput);
}

TEST_CASE("standardize output has zero mean and unit variance") {
    std::mt19937 rng(19);
    std::normal_distribution<double> gauss(3.0, 2.5);
    Eigen::MatrixXd X(10, 4);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 4; ++j) X(i, j) = gauss(rng);
    auto [Z, stats] = standardize(X);
    for (int j = 0; j < 4; ++j) {
        double mean = Z.col(j).mean();
        double var = (Z.col(j).array() - mean).square().mean();
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
    }
    Eigen::MatrixXd Z2 = apply_standardization(X, stats);
    CHECK((Z - Z2).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
