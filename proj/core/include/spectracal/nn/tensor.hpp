#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spectracal::nn {

/// Dense C x D0 x D1 x D2 activation volume, laid out channel-major with the
/// last (spectral) axis innermost. Channel 0 of a single-channel tensor has
/// exactly the memory order of an HsiCube.
struct Tensor {
    std::size_t channels = 0;
    std::size_t d0 = 0;
    std::size_t d1 = 0;
    std::size_t d2 = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t c, std::size_t n0, std::size_t n1, std::size_t n2, double fill = 0.0)
        : channels(c), d0(n0), d1(n1), d2(n2), data(c * n0 * n1 * n2, fill) {}

    std::size_t voxels() const noexcept { return d0 * d1 * d2; }
    std::size_t size() const noexcept { return data.size(); }
    bool same_shape(const Tensor& o) const noexcept {
        return channels == o.channels && d0 == o.d0 && d1 == o.d1 && d2 == o.d2;
    }
    std::span<double> channel(std::size_t c) { return {data.data() + c * voxels(), voxels()}; }
    std::span<const double> channel(std::size_t c) const {
        return {data.data() + c * voxels(), voxels()};
    }
};

}  // namespace spectracal::nn
