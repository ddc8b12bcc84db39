#pragma once

#include <span>

#include "spectracal/cube.hpp"
#include "spectracal/labels.hpp"

namespace spectracal::eval {

/// dot(a, b) / sqrt(|a|^2 |b|^2), clamped to [-1, 1]. Identical inputs give
/// exactly 1. Throws DomainError if either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const Spectrum& a, const Spectrum& b);

/// Mean over pixels of the per-pixel spectral cosine similarity.
double mean_pixel_cosine(const HsiCube& a, const HsiCube& b);

/// 2|A n B| / (|A| + |B|) for the pixels labelled `class_id`; 1 when both are empty.
double dsc(const LabelMask& pred, const LabelMask& ref, int class_id);

/// Boundary pixels of the class region: pixels of the class with at least one
/// 4-neighbor outside the class. Neighbors beyond the image edge count as
/// outside. Returned as row-major flat indices.
std::vector<std::size_t> class_boundary(const LabelMask& mask, int class_id);

inline constexpr double kDefaultNsdTolerance = 1.0;

/// Normalized surface distance: boundary pixels of each mask that lie within
/// Euclidean distance tau (pixel centers) of the other mask's boundary,
/// pooled over both directions and divided by the total boundary size.
/// 1 when both regions are empty, 0 when exactly one is.
double nsd(const LabelMask& pred, const LabelMask& ref, int class_id,
           double tau = kDefaultNsdTolerance);

/// Mean of |x - y|.
double mae(std::span<const double> x, std::span<const double> y);
/// Mean of |x - y| over pixels where mask == class_id; 0 if none.
double mae(std::span<const double> x, std::span<const double> y, const LabelMask& mask,
           int class_id);

}  // namespace spectracal::eval
