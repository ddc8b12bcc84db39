#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spectracal {

/// White-reference values below this are rejected (normalized intensity units).
inline constexpr double kWhiteEpsilon = 1e-6;

/// Strictly increasing list of band-center wavelengths in nanometers.
class WavelengthGrid {
public:
    explicit WavelengthGrid(std::vector<double> nanometers);

    static WavelengthGrid uniform(double start_nm, double step_nm, std::size_t count);
    /// 500-995 nm in 5 nm steps (100 bands).
    static WavelengthGrid full_scale();
    /// 500-950 nm in 30 nm steps (16 bands).
    static WavelengthGrid desk_scale();

    std::size_t size() const noexcept { return nm_.size(); }
    double operator[](std::size_t band) const { return nm_[band]; }
    std::span<const double> nanometers() const noexcept { return nm_; }
    double micrometers(std::size_t band) const { return nm_[band] * 1e-3; }

    friend bool operator==(const WavelengthGrid&, const WavelengthGrid&) = default;

private:
    std::vector<double> nm_;
};

struct CubeShape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t bands = 0;

    std::size_t pixels() const noexcept { return height * width; }
    std::size_t size() const noexcept { return height * width * bands; }
    friend bool operator==(const CubeShape&, const CubeShape&) = default;
};

/// H x W x B cube of finite, nonnegative values with an attached wavelength grid.
///
/// Memory order is pixel-major with the band index innermost:
/// offset(i, j, l) = (i * W + j) * B + l.
class HsiCube {
public:
    HsiCube(std::size_t height, std::size_t width, WavelengthGrid grid,
            std::vector<double> values);
    /// Zero-filled cube.
    HsiCube(std::size_t height, std::size_t width, WavelengthGrid grid);

    static HsiCube filled(std::size_t height, std::size_t width, const WavelengthGrid& grid,
                          double value);
    /// Every pixel carries the same spectrum.
    static HsiCube broadcast(std::size_t height, std::size_t width, const WavelengthGrid& grid,
                             std::span<const double> spectrum);

    std::size_t height() const noexcept { return shape_.height; }
    std::size_t width() const noexcept { return shape_.width; }
    std::size_t bands() const noexcept { return shape_.bands; }
    std::size_t pixels() const noexcept { return shape_.pixels(); }
    const CubeShape& shape() const noexcept { return shape_; }
    const WavelengthGrid& grid() const noexcept { return grid_; }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t offset(std::size_t i, std::size_t j, std::size_t band) const noexcept {
        return (i * shape_.width + j) * shape_.bands + band;
    }
    double at(std::size_t i, std::size_t j, std::size_t band) const {
        return values_[offset(i, j, band)];
    }
    std::span<const double> pixel(std::size_t i, std::size_t j) const {
        return std::span<const double>(values_).subspan(offset(i, j, 0), shape_.bands);
    }
    std::span<const double> pixel(std::size_t flat_index) const {
        return std::span<const double>(values_).subspan(flat_index * shape_.bands, shape_.bands);
    }

    /// Same shape and grid.
    bool congruent(const HsiCube& other) const {
        return shape_ == other.shape_ && grid_ == other.grid_;
    }

    friend bool operator==(const HsiCube&, const HsiCube&) = default;

private:
    CubeShape shape_;
    WavelengthGrid grid_;
    std::vector<double> values_;
};

/// A white-tile measurement: an HsiCube whose every value is >= kWhiteEpsilon.
class WhiteRefImage {
public:
    explicit WhiteRefImage(HsiCube cube);

    const HsiCube& cube() const noexcept { return cube_; }
    friend bool operator==(const WhiteRefImage&, const WhiteRefImage&) = default;

private:
    HsiCube cube_;
};

/// Length-B vector of finite reals on a wavelength grid.
class Spectrum {
public:
    Spectrum(std::vector<double> values, WavelengthGrid grid);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t band) const { return values_[band]; }
    std::span<const double> values() const noexcept { return values_; }
    const WavelengthGrid& grid() const noexcept { return grid_; }

    friend bool operator==(const Spectrum&, const Spectrum&) = default;

private:
    std::vector<double> values_;
    WavelengthGrid grid_;
};

}  // namespace spectracal
