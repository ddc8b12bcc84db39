#pragma once

#include "spectracal/cube.hpp"

namespace spectracal {

/// out(i,j,l) = raw(i,j,l) / white(i,j,l).
HsiCube calibrate(const HsiCube& raw, const WhiteRefImage& white);

/// out(i,j,l) = calibrated(i,j,l) * white(i,j,l); the inverse of calibrate.
HsiCube simulate_raw(const HsiCube& calibrated, const WhiteRefImage& white);

/// Per-band average over all pixels.
Spectrum mean_spectrum(const HsiCube& cube);

/// s / sum(|s|). Throws DomainError for the zero vector.
Spectrum l1_normalize(const Spectrum& s);

/// Rounds every value to the nearest float32. Cubes that live on the float32
/// lattice survive the HSIC format unchanged, and products of two of them are
/// exact in double precision.
HsiCube quantize_to_float(const HsiCube& cube);

}  // namespace spectracal
