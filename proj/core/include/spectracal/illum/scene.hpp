#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "spectracal/cube.hpp"
#include "spectracal/labels.hpp"
#include "spectracal/rng.hpp"

namespace spectracal::illum {

/// One Gaussian absorption bump: amplitude * exp(-0.5 * ((lambda - center) / width)^2).
struct AbsorptionBump {
    double center_nm;
    double width_nm;
    double amplitude;
};

inline constexpr std::size_t kChromophores = 3;
inline constexpr std::array<const char*, kChromophores> kChromophoreNames{"mu_oxy", "mu_deoxy",
                                                                          "mu_water"};

/// The fixed bump lists defining the oxy-hemoglobin, deoxy-hemoglobin and water templates.
const std::array<std::vector<AbsorptionBump>, kChromophores>& chromophore_bumps();

/// Absorption templates sampled on a grid; column k holds chromophore k.
struct ChromophoreBasis {
    WavelengthGrid grid;
    std::array<std::vector<double>, kChromophores> mu;

    double at(std::size_t band, std::size_t chromophore) const { return mu[chromophore][band]; }
};

/// Evaluates the bump formulas on `grid`. Bumps are summed in listed order starting from 0.0.
ChromophoreBasis chromophore_basis(const WavelengthGrid& grid);

/// CSV asset text: '#' header lines documenting the formulas and bump table,
/// a column header line, then wavelength_nm,mu_oxy,mu_deoxy,mu_water rows
/// printed with 17 significant digits.
std::string chromophore_csv(const WavelengthGrid& grid);
void write_chromophore_csv(const WavelengthGrid& grid, const std::filesystem::path& path);
ChromophoreBasis read_chromophore_csv(const std::filesystem::path& path);

/// Chromophore concentrations of one tissue class.
struct TissueComposition {
    double oxy = 0.0;
    double deoxy = 0.0;
    double water = 0.0;
};

struct SceneConfig {
    std::size_t height = 32;
    std::size_t width = 32;
    WavelengthGrid grid = WavelengthGrid::desk_scale();
    /// Mean composition per class; the class count is classes.size().
    std::vector<TissueComposition> classes{
        {1.4, 0.25, 0.5},  // well perfused
        {0.45, 1.1, 0.6},  // venous
        {0.35, 0.2, 1.4},  // water rich, low blood
        {0.12, 0.08, 0.2}, // pale
    };
    /// Voronoi regions per scene (>= classes.size() so every class appears).
    std::size_t regions = 8;
    /// Relative amplitude of the smooth per-pixel concentration fluctuation.
    double variation = 0.15;
    std::size_t field_modes = 3;
    double path_length = 1.0;
    double base_scatter = 0.01;

    void validate() const;
};

/// A calibrated scene with everything needed to score a recalibration.
struct SceneTruth {
    HsiCube cube;
    LabelMask labels;
    std::size_t n_classes = 0;
    /// H x W x 3 (oxy, deoxy, water), pixel-major.
    std::vector<double> concentrations;
    /// H x W, oxy / (oxy + deoxy); 0 where both vanish.
    std::vector<double> oxygenation;
};

/// Reflectance R = exp(-d * sum_k c_k mu_k(lambda)) + base_scatter over
/// piecewise-constant class regions with smooth concentration fields.
/// Cube values are rounded to float32 so they survive the HSIC format.
SceneTruth synth_scene(const SceneConfig& config, Rng& rng);

/// Reflectance of one pixel under the forward model.
std::vector<double> reflectance(const ChromophoreBasis& basis, const TissueComposition& c,
                                double path_length, double base_scatter);

}  // namespace spectracal::illum
