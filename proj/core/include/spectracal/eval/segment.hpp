#pragma once

#include <vector>

#include "spectracal/cube.hpp"
#include "spectracal/illum/scene.hpp"
#include "spectracal/labels.hpp"

namespace spectracal::eval {

/// Nearest-centroid segmentation by spectral angle: each pixel takes the
/// class whose centroid has the highest cosine similarity with it (ties to the
/// lower class id). Pixels with an all-zero spectrum get kBackgroundLabel.
LabelMask centroid_segment(const HsiCube& cube, const std::vector<Spectrum>& centroids);

/// Per-class mean spectrum over the given calibrated scenes.
std::vector<Spectrum> class_centroids(std::span<const illum::SceneTruth> scenes);

}  // namespace spectracal::eval
