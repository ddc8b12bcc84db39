#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "spectracal/calibration.hpp"
#include "spectracal/cube.hpp"
#include "spectracal/cube_io.hpp"
#include "spectracal/errors.hpp"
#include "spectracal/labels.hpp"
#include "support.hpp"

using namespace spectracal;
using testing_support::random_cube;
using testing_support::random_white;
using testing_support::small_grid;
using testing_support::TempDir;

TEST(WavelengthGrid, Validation) {
    EXPECT_THROW(WavelengthGrid({500.0}), DomainError);
    EXPECT_THROW(WavelengthGrid({500.0, 500.0}), DomainError);
    EXPECT_THROW(WavelengthGrid({510.0, 500.0}), DomainError);
    EXPECT_THROW(WavelengthGrid({-1.0, 500.0}), DomainError);
    EXPECT_THROW(WavelengthGrid({500.0, NAN}), DomainError);
    EXPECT_NO_THROW(WavelengthGrid({500.0, 501.0}));
}

TEST(WavelengthGrid, Defaults) {
    const auto full = WavelengthGrid::full_scale();
    ASSERT_EQ(full.size(), 100u);
    EXPECT_DOUBLE_EQ(full[0], 500.0);
    EXPECT_DOUBLE_EQ(full[99], 995.0);
    const auto desk = WavelengthGrid::desk_scale();
    ASSERT_EQ(desk.size(), 16u);
    EXPECT_DOUBLE_EQ(desk[0], 500.0);
    EXPECT_DOUBLE_EQ(desk[15], 950.0);
    EXPECT_DOUBLE_EQ(desk.micrometers(1), 0.53);
}

TEST(HsiCube, Validation) {
    const auto g = small_grid(2);
    EXPECT_THROW(HsiCube(1, 1, g, {1.0}), DimensionError);
    EXPECT_THROW(HsiCube(1, 1, g, {1.0, -0.5}), DomainError);
    EXPECT_THROW(HsiCube(1, 1, g, {1.0, INFINITY}), DomainError);
    EXPECT_THROW(HsiCube(1, 1, g, {NAN, 1.0}), DomainError);
    const HsiCube c(1, 2, g, {1, 2, 3, 4});
    EXPECT_EQ(c.at(0, 1, 0), 3.0);
    EXPECT_EQ(c.pixel(1)[1], 4.0);
}

TEST(WhiteRefImage, RejectsValuesBelowEpsilon) {
    const auto g = small_grid(2);
    EXPECT_THROW(WhiteRefImage(HsiCube(1, 1, g, {1.0, 0.0})), DomainError);
    EXPECT_THROW(WhiteRefImage(HsiCube(1, 1, g, {1.0, 0.5e-6})), DomainError);
    EXPECT_NO_THROW(WhiteRefImage(HsiCube(1, 1, g, {1.0, kWhiteEpsilon})));
}

TEST(Spectrum, LengthMustMatchGrid) {
    EXPECT_THROW(Spectrum({1.0}, small_grid(2)), DimensionError);
}

TEST(Calibrate, SelfDivisionGivesOnes) {
    Rng rng(1);
    const auto w = random_white(3, 2, small_grid(), rng);
    const auto out = calibrate(w.cube(), w);
    for (double v : out.values()) EXPECT_EQ(v, 1.0);
}

TEST(Calibrate, DoubledRawGivesTwos) {
    Rng rng(2);
    const auto w = random_white(2, 2, small_grid(), rng);
    std::vector<double> v(w.cube().values().begin(), w.cube().values().end());
    for (double& x : v) x *= 2.0;
    const auto out = calibrate(HsiCube(2, 2, small_grid(), v), w);
    for (double x : out.values()) EXPECT_EQ(x, 2.0);
}

TEST(Calibrate, DimensionMismatch) {
    Rng rng(3);
    const auto w = random_white(2, 2, small_grid(), rng);
    EXPECT_THROW(calibrate(random_cube(2, 3, small_grid(), rng), w), DimensionError);
    EXPECT_THROW(calibrate(random_cube(2, 2, small_grid(5), rng), w), DimensionError);
    EXPECT_THROW(simulate_raw(random_cube(3, 2, small_grid(), rng), w), DimensionError);
}

TEST(SimulateRaw, Examples) {
    const auto g = small_grid(2);
    const HsiCube c(1, 1, g, {1.0, 2.0});
    const WhiteRefImage w(HsiCube(1, 1, g, {3.0, 4.0}));
    const auto raw = simulate_raw(c, w);
    EXPECT_EQ(raw.at(0, 0, 0), 3.0);
    EXPECT_EQ(raw.at(0, 0, 1), 8.0);

    Rng rng(4);
    const auto x = random_cube(2, 3, g, rng);
    EXPECT_EQ(simulate_raw(x, WhiteRefImage(HsiCube::filled(2, 3, g, 1.0))), x);
    const auto zeros = simulate_raw(HsiCube(2, 3, g), random_white(2, 3, g, rng));
    for (double v : zeros.values()) EXPECT_EQ(v, 0.0);
}

TEST(Calibrate, RoundTripProperty) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto c = random_cube(3, 4, small_grid(6), rng, 0.0, 3.0);
        const auto w = random_white(3, 4, small_grid(6), rng);
        const auto back = calibrate(simulate_raw(c, w), w);
        for (std::size_t k = 0; k < c.values().size(); ++k) {
            const double ref = c.values()[k];
            EXPECT_LE(std::abs(back.values()[k] - ref), 1e-12 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST(Calibrate, ScaleEquivarianceProperty) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto raw = random_cube(2, 3, small_grid(), rng);
        const auto w = random_white(2, 3, small_grid(), rng);
        const double k = rng.uniform(0.1, 10.0);
        std::vector<double> scaled(raw.values().begin(), raw.values().end());
        for (double& v : scaled) v *= k;
        const auto a = calibrate(HsiCube(2, 3, small_grid(), scaled), w);
        const auto b = calibrate(raw, w);
        for (std::size_t i = 0; i < a.values().size(); ++i)
            EXPECT_NEAR(a.values()[i], k * b.values()[i], 1e-12 * std::max(1.0, a.values()[i]));
    }
}

TEST(MeanSpectrum, Examples) {
    const auto g = small_grid(2);
    const std::vector<double> s{0.3, 0.7};
    const auto m = mean_spectrum(HsiCube::broadcast(3, 2, g, s));
    EXPECT_DOUBLE_EQ(m[0], 0.3);
    EXPECT_DOUBLE_EQ(m[1], 0.7);
    const auto two = mean_spectrum(HsiCube(1, 2, g, {1.0, 0.0, 3.0, 0.0}));
    EXPECT_DOUBLE_EQ(two[0], 2.0);
    const auto zero = mean_spectrum(HsiCube(2, 2, g));
    EXPECT_EQ(zero[0], 0.0);
    EXPECT_EQ(zero[1], 0.0);
}

TEST(MeanSpectrum, LinearityProperty) {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_cube(3, 3, small_grid(), rng);
        const auto y = random_cube(3, 3, small_grid(), rng);
        const double a = rng.uniform(0.0, 5.0);
        const double b = rng.uniform(0.0, 5.0);
        std::vector<double> combo(x.values().size());
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * x.values()[i] + b * y.values()[i];
        const auto lhs = mean_spectrum(HsiCube(3, 3, small_grid(), combo));
        const auto mx = mean_spectrum(x);
        const auto my = mean_spectrum(y);
        for (std::size_t l = 0; l < lhs.size(); ++l) EXPECT_NEAR(lhs[l], a * mx[l] + b * my[l], 1e-12);
    }
}

TEST(L1Normalize, Examples) {
    const auto g = small_grid(2);
    const auto a = l1_normalize(Spectrum({2.0, 2.0}, g));
    EXPECT_DOUBLE_EQ(a[0], 0.5);
    EXPECT_DOUBLE_EQ(a[1], 0.5);
    const auto b = l1_normalize(Spectrum({1.0, 3.0}, g));
    EXPECT_DOUBLE_EQ(b[0], 0.25);
    EXPECT_DOUBLE_EQ(b[1], 0.75);
    EXPECT_THROW(l1_normalize(Spectrum({0.0, 0.0}, g)), DomainError);
}

TEST(L1Normalize, SumsToOneAndIdempotentProperty) {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(7);
        for (double& x : v) x = rng.uniform(-1.0, 3.0);
        const auto once = l1_normalize(Spectrum(v, small_grid(7)));
        double sum = 0.0;
        for (double x : once.values()) sum += std::abs(x);
        EXPECT_NEAR(sum, 1.0, 1e-12);
        const auto twice = l1_normalize(once);
        for (std::size_t l = 0; l < 7; ++l) EXPECT_NEAR(twice[l], once[l], 1e-12);
    }
}

TEST(CubeIo, RoundTripIsBitIdenticalForFloatValues) {
    TempDir dir("io");
    Rng rng(9);
    const auto c = quantize_to_float(random_cube(2, 2, small_grid(3), rng));
    write_cube(c, dir / "a.hsic");
    const auto back = read_cube(dir / "a.hsic");
    EXPECT_EQ(back, c);
    EXPECT_EQ(std::memcmp(back.values().data(), c.values().data(), c.values().size() * sizeof(double)), 0);
}

TEST(CubeIo, HeaderLayout) {
    TempDir dir("io");
    const HsiCube c(1, 2, WavelengthGrid({500.0, 600.0}), {1.0f, 2.0f, 3.0f, 4.0f});
    write_cube(c, dir / "a.hsic");
    const auto bytes = testing_support::slurp(dir / "a.hsic");
    ASSERT_EQ(bytes.size(), 4u + 2 + 2 + 12 + 2 * 8 + 4 * 4);
    EXPECT_EQ(bytes.substr(0, 4), "HSIC");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 0);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1);   // H
    EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2);  // W
    EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 2);  // B
    float first = 0.0f;
    std::memcpy(&first, bytes.data() + 20 + 16, 4);
    EXPECT_EQ(first, 1.0f);
}

TEST(CubeIo, Errors) {
    TempDir dir("io");
    Rng rng(10);
    const auto c = random_cube(2, 2, small_grid(3), rng);
    write_cube(c, dir / "a.hsic");
    auto bytes = testing_support::slurp(dir / "a.hsic");

    auto write_bytes = [&](const std::string& name, const std::string& data) {
        std::ofstream out(dir / name, std::ios::binary);
        out << data;
        return dir / name;
    };
    std::string bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(read_cube(write_bytes("magic.hsic", bad)), FormatError);
    EXPECT_THROW(read_cube(write_bytes("trunc.hsic", bytes.substr(0, bytes.size() - 3))), FormatError);
    std::string big = bytes;
    big[8] = static_cast<char>(0xff);
    big[9] = static_cast<char>(0xff);
    EXPECT_THROW(read_cube(write_bytes("big.hsic", big)), FormatError);
    EXPECT_THROW(read_cube(write_bytes("tail.hsic", bytes + "x")), FormatError);
    EXPECT_THROW(read_cube(write_bytes("short.hsic", "HSI")), FormatError);
    EXPECT_THROW(read_cube(dir / "missing.hsic"), FormatError);
}

TEST(CubeIo, MetaSidecar) {
    TempDir dir("io");
    EXPECT_EQ(meta_path("x/scene_0001.hsic"), std::filesystem::path("x/scene_0001.meta.json"));
    EXPECT_FALSE(read_meta(dir / "none.hsic").has_value());
    write_meta(dir / "a.hsic", {{"k", 1}});
    EXPECT_EQ(read_meta(dir / "a.hsic")->at("k"), 1);
}

TEST(LabelMask, SizeCheck) {
    EXPECT_THROW(LabelMask(2, 2, std::vector<int>{0, 1, 2}), DimensionError);
    const LabelMask m(2, 2, std::vector<int>{0, 1, 2, 3});
    EXPECT_EQ(m.at(1, 0), 2);
}
