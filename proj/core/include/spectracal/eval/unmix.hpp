#pragma once

#include <array>
#include <vector>

#include "spectracal/cube.hpp"
#include "spectracal/illum/scene.hpp"

namespace spectracal::eval {

/// Reflectance floor applied before taking logarithms.
inline constexpr double kReflectanceFloor = 1e-6;

/// Nonnegative least squares min |A x - y|, x >= 0, by the Lawson-Hanson
/// active-set method. `a` is row-major (rows x cols).
std::vector<double> nnls(std::span<const double> a, std::size_t rows, std::size_t cols,
                         std::span<const double> y);

struct UnmixResult {
    std::size_t height = 0;
    std::size_t width = 0;
    /// H x W x 3 (oxy, deoxy, water), pixel-major.
    std::vector<double> concentrations;
    /// oxy / (oxy + deoxy) per pixel; 0 when both vanish.
    std::vector<double> oxygenation;
    /// 1 where the oxygenation was undefined (0/0) and set to 0.
    std::vector<unsigned char> undefined_oxygenation;

    std::vector<double> total_hemoglobin() const;
    std::vector<double> water() const;
};

/// Per pixel, NNLS of the absorbance -ln(max(R, floor)) / path_length onto the
/// chromophore templates.
UnmixResult unmix(const HsiCube& cube, const illum::ChromophoreBasis& basis, double path_length);

}  // namespace spectracal::eval
