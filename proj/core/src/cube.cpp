#include "spectracal/cube.hpp"

#include <cmath>
#include <string>

#include "spectracal/errors.hpp"

namespace spectracal {

WavelengthGrid::WavelengthGrid(std::vector<double> nanometers) : nm_(std::move(nanometers)) {
    if (nm_.size() < 2) throw DomainError("wavelength grid needs at least 2 bands");
    for (std::size_t k = 0; k < nm_.size(); ++k) {
        if (!std::isfinite(nm_[k]) || nm_[k] <= 0.0)
            throw DomainError("wavelength " + std::to_string(k) + " is not finite and positive");
        if (k > 0 && nm_[k] <= nm_[k - 1])
            throw DomainError("wavelength grid is not strictly increasing");
    }
}

WavelengthGrid WavelengthGrid::uniform(double start_nm, double step_nm, std::size_t count) {
    std::vector<double> nm(count);
    for (std::size_t k = 0; k < count; ++k) nm[k] = start_nm + step_nm * static_cast<double>(k);
    return WavelengthGrid(std::move(nm));
}

WavelengthGrid WavelengthGrid::full_scale() { return uniform(500.0, 5.0, 100); }

WavelengthGrid WavelengthGrid::desk_scale() { return uniform(500.0, 30.0, 16); }

HsiCube::HsiCube(std::size_t height, std::size_t width, WavelengthGrid grid,
                 std::vector<double> values)
    : shape_{height, width, grid.size()}, grid_(std::move(grid)), values_(std::move(values)) {
    if (height == 0 || width == 0) throw DimensionError("cube height and width must be positive");
    if (values_.size() != shape_.size())
        throw DimensionError("cube has " + std::to_string(values_.size()) + " values, expected " +
                             std::to_string(shape_.size()));
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0)
            throw DomainError("cube values must be finite and nonnegative");
    }
}

HsiCube::HsiCube(std::size_t height, std::size_t width, WavelengthGrid grid)
    : HsiCube(height, width, grid, std::vector<double>(height * width * grid.size(), 0.0)) {}

HsiCube HsiCube::filled(std::size_t height, std::size_t width, const WavelengthGrid& grid,
                        double value) {
    return HsiCube(height, width, grid, std::vector<double>(height * width * grid.size(), value));
}

HsiCube HsiCube::broadcast(std::size_t height, std::size_t width, const WavelengthGrid& grid,
                           std::span<const double> spectrum) {
    if (spectrum.size() != grid.size()) throw DimensionError("spectrum length does not match grid");
    std::vector<double> values;
    values.reserve(height * width * grid.size());
    for (std::size_t p = 0; p < height * width; ++p)
        values.insert(values.end(), spectrum.begin(), spectrum.end());
    return HsiCube(height, width, grid, std::move(values));
}

WhiteRefImage::WhiteRefImage(HsiCube cube) : cube_(std::move(cube)) {
    for (double v : cube_.values()) {
        if (v < kWhiteEpsilon)
            throw DomainError("white reference value " + std::to_string(v) +
                              " is below the white epsilon");
    }
}

Spectrum::Spectrum(std::vector<double> values, WavelengthGrid grid)
    : values_(std::move(values)), grid_(std::move(grid)) {
    if (values_.size() != grid_.size()) throw DimensionError("spectrum length does not match grid");
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError("spectrum values must be finite");
    }
}

}  // namespace spectracal
