#pragma once

#include <span>
#include <vector>

#include "spectracal/nn/tensor.hpp"

namespace spectracal::nn {

/// Cubic 3D convolution with zero padding kernel / 2 on every axis.
/// Weights are laid out (out, in, k, k, k); bias has one entry per output channel.
struct ConvGeometry {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel = 3;
    std::size_t stride = 1;

    std::size_t padding() const noexcept { return kernel / 2; }
    std::size_t weight_count() const noexcept {
        return out_channels * in_channels * kernel * kernel * kernel;
    }
    std::size_t out_extent(std::size_t n) const noexcept {
        return (n + 2 * padding() - kernel) / stride + 1;
    }
};

/// im2col buffer kept from the forward pass for the weight gradient.
struct ConvCache {
    std::vector<double> columns;
};

Tensor conv3d_forward(const Tensor& input, std::span<const double> weight,
                      std::span<const double> bias, const ConvGeometry& g, ConvCache* cache);

/// Accumulates into grad_weight / grad_bias; writes grad_input when non-null.
void conv3d_backward(const Tensor& input, const ConvCache& cache, const Tensor& grad_output,
                     std::span<const double> weight, const ConvGeometry& g,
                     std::span<double> grad_weight, std::span<double> grad_bias,
                     Tensor* grad_input);

double softplus(double x);
double sigmoid(double x);
Tensor softplus_forward(const Tensor& x);
/// Gradient with respect to the softplus input `x`.
Tensor softplus_backward(const Tensor& x, const Tensor& grad_output);

/// Nearest-neighbor upsampling by 2 along all three axes.
Tensor upsample2_forward(const Tensor& x);
Tensor upsample2_backward(const Tensor& grad_output);

}  // namespace spectracal::nn
