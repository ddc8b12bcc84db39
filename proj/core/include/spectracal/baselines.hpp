#pragma once

#include "spectracal/cube.hpp"

/// Global-illuminant estimators. Each returns an L1-normalized spectrum; the
/// absolute illuminant scale is not identifiable from a single image.
namespace spectracal::baselines {

/// Gray-world: the scene average is assumed achromatic.
Spectrum grayworld(const HsiCube& raw);

/// Max-RGB generalized to B bands: per-band maximum over all pixels.
Spectrum maxrgb(const HsiCube& raw);

inline constexpr double kDefaultTopFraction = 0.01;

/// Mean spectrum of the brightest pixels (by unweighted band sum). Selects
/// max(1, ceil(top_fraction * pixels)) pixels; ties in brightness keep the
/// lower flat pixel index.
Spectrum specular_highlight(const HsiCube& raw, double top_fraction = kDefaultTopFraction);

/// Indices of the pixels chosen by specular_highlight.
std::vector<std::size_t> highlight_pixels(const HsiCube& raw, double top_fraction);

/// out(i,j,l) = raw(i,j,l) / illuminant(l).
HsiCube apply_global(const HsiCube& raw, const Spectrum& illuminant);

}  // namespace spectracal::baselines
