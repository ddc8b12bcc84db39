#include "spectracal/nn/layers.hpp"

#include <Eigen/Core>

#include <cmath>

#include "spectracal/errors.hpp"

namespace spectracal::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

bool is_pointwise(const ConvGeometry& g) { return g.kernel == 1 && g.stride == 1; }

// columns[(ci, kz, ky, kx), out_voxel]
void im2col(const Tensor& in, const ConvGeometry& g, std::size_t o0, std::size_t o1,
            std::size_t o2, std::vector<double>& columns) {
    const std::size_t k = g.kernel;
    const auto pad = static_cast<std::ptrdiff_t>(g.padding());
    const auto s = static_cast<std::ptrdiff_t>(g.stride);
    const std::size_t out_vox = o0 * o1 * o2;
    columns.assign(g.in_channels * k * k * k * out_vox, 0.0);
    const auto n0 = static_cast<std::ptrdiff_t>(in.d0);
    const auto n1 = static_cast<std::ptrdiff_t>(in.d1);
    const auto n2 = static_cast<std::ptrdiff_t>(in.d2);
    std::size_t row = 0;
    for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
        const double* src = in.data.data() + ci * in.voxels();
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                for (std::size_t c = 0; c < k; ++c, ++row) {
                    double* dst = columns.data() + row * out_vox;
                    for (std::size_t x0 = 0; x0 < o0; ++x0) {
                        const auto i0 = static_cast<std::ptrdiff_t>(x0) * s + static_cast<std::ptrdiff_t>(a) - pad;
                        if (i0 < 0 || i0 >= n0) continue;
                        for (std::size_t x1 = 0; x1 < o1; ++x1) {
                            const auto i1 = static_cast<std::ptrdiff_t>(x1) * s + static_cast<std::ptrdiff_t>(b) - pad;
                            if (i1 < 0 || i1 >= n1) continue;
                            const double* line = src + (i0 * n1 + i1) * n2;
                            double* out = dst + (x0 * o1 + x1) * o2;
                            for (std::size_t x2 = 0; x2 < o2; ++x2) {
                                const auto i2 = static_cast<std::ptrdiff_t>(x2) * s + static_cast<std::ptrdiff_t>(c) - pad;
                                if (i2 >= 0 && i2 < n2) out[x2] = line[i2];
                            }
                        }
                    }
                }
            }
        }
    }
}

void col2im(const std::vector<double>& columns, const ConvGeometry& g, std::size_t o0,
            std::size_t o1, std::size_t o2, Tensor& out) {
    const std::size_t k = g.kernel;
    const auto pad = static_cast<std::ptrdiff_t>(g.padding());
    const auto s = static_cast<std::ptrdiff_t>(g.stride);
    const std::size_t out_vox = o0 * o1 * o2;
    const auto n0 = static_cast<std::ptrdiff_t>(out.d0);
    const auto n1 = static_cast<std::ptrdiff_t>(out.d1);
    const auto n2 = static_cast<std::ptrdiff_t>(out.d2);
    std::fill(out.data.begin(), out.data.end(), 0.0);
    std::size_t row = 0;
    for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
        double* dst = out.data.data() + ci * out.voxels();
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                for (std::size_t c = 0; c < k; ++c, ++row) {
                    const double* src = columns.data() + row * out_vox;
                    for (std::size_t x0 = 0; x0 < o0; ++x0) {
                        const auto i0 = static_cast<std::ptrdiff_t>(x0) * s + static_cast<std::ptrdiff_t>(a) - pad;
                        if (i0 < 0 || i0 >= n0) continue;
                        for (std::size_t x1 = 0; x1 < o1; ++x1) {
                            const auto i1 = static_cast<std::ptrdiff_t>(x1) * s + static_cast<std::ptrdiff_t>(b) - pad;
                            if (i1 < 0 || i1 >= n1) continue;
                            double* line = dst + (i0 * n1 + i1) * n2;
                            const double* in = src + (x0 * o1 + x1) * o2;
                            for (std::size_t x2 = 0; x2 < o2; ++x2) {
                                const auto i2 = static_cast<std::ptrdiff_t>(x2) * s + static_cast<std::ptrdiff_t>(c) - pad;
                                if (i2 >= 0 && i2 < n2) line[i2] += in[x2];
                            }
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor conv3d_forward(const Tensor& input, std::span<const double> weight,
                      std::span<const double> bias, const ConvGeometry& g, ConvCache* cache) {
    if (input.channels != g.in_channels) throw DimensionError("conv3d: input channel mismatch");
    if (weight.size() != g.weight_count() || bias.size() != g.out_channels)
        throw DimensionError("conv3d: parameter size mismatch");
    const std::size_t o0 = g.out_extent(input.d0);
    const std::size_t o1 = g.out_extent(input.d1);
    const std::size_t o2 = g.out_extent(input.d2);
    Tensor out(g.out_channels, o0, o1, o2);
    const auto out_vox = static_cast<Eigen::Index>(out.voxels());
    const auto rows = static_cast<Eigen::Index>(g.in_channels * g.kernel * g.kernel * g.kernel);

    const double* cols = nullptr;
    ConvCache local;
    ConvCache& buf = cache ? *cache : local;
    if (is_pointwise(g)) {
        cols = input.data.data();
        buf.columns.clear();
    } else {
        im2col(input, g, o0, o1, o2, buf.columns);
        cols = buf.columns.data();
    }
    ConstMap w(weight.data(), static_cast<Eigen::Index>(g.out_channels), rows);
    ConstMap x(cols, rows, out_vox);
    Map y(out.data.data(), static_cast<Eigen::Index>(g.out_channels), out_vox);
    y.noalias() = w * x;
    for (std::size_t co = 0; co < g.out_channels; ++co) y.row(static_cast<Eigen::Index>(co)).array() += bias[co];
    return out;
}

void conv3d_backward(const Tensor& input, const ConvCache& cache, const Tensor& grad_output,
                     std::span<const double> weight, const ConvGeometry& g,
                     std::span<double> grad_weight, std::span<double> grad_bias,
                     Tensor* grad_input) {
    const auto out_vox = static_cast<Eigen::Index>(grad_output.voxels());
    const auto rows = static_cast<Eigen::Index>(g.in_channels * g.kernel * g.kernel * g.kernel);
    const auto oc = static_cast<Eigen::Index>(g.out_channels);
    const double* cols = is_pointwise(g) ? input.data.data() : cache.columns.data();

    ConstMap dy(grad_output.data.data(), oc, out_vox);
    ConstMap x(cols, rows, out_vox);
    Map dw(grad_weight.data(), oc, rows);
    dw.noalias() += dy * x.transpose();
    for (Eigen::Index co = 0; co < oc; ++co) {
        double s = 0.0;
        for (Eigen::Index v = 0; v < out_vox; ++v) s += dy(co, v);
        grad_bias[static_cast<std::size_t>(co)] += s;
    }

    if (!grad_input) return;
    ConstMap w(weight.data(), oc, rows);
    *grad_input = Tensor(input.channels, input.d0, input.d1, input.d2);
    if (is_pointwise(g)) {
        Map dx(grad_input->data.data(), rows, out_vox);
        dx.noalias() = w.transpose() * dy;
        return;
    }
    std::vector<double> dcols(static_cast<std::size_t>(rows * out_vox));
    Map dc(dcols.data(), rows, out_vox);
    dc.noalias() = w.transpose() * dy;
    col2im(dcols, g, grad_output.d0, grad_output.d1, grad_output.d2, *grad_input);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor softplus_forward(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.data) v = softplus(v);
    return y;
}

Tensor softplus_backward(const Tensor& x, const Tensor& grad_output) {
    Tensor g = grad_output;
    for (std::size_t k = 0; k < g.data.size(); ++k) g.data[k] *= sigmoid(x.data[k]);
    return g;
}

Tensor upsample2_forward(const Tensor& x) {
    Tensor y(x.channels, 2 * x.d0, 2 * x.d1, 2 * x.d2);
    for (std::size_t c = 0; c < x.channels; ++c) {
        const double* src = x.data.data() + c * x.voxels();
        double* dst = y.data.data() + c * y.voxels();
        for (std::size_t i = 0; i < y.d0; ++i) {
            for (std::size_t j = 0; j < y.d1; ++j) {
                const double* line = src + ((i / 2) * x.d1 + j / 2) * x.d2;
                double* out = dst + (i * y.d1 + j) * y.d2;
                for (std::size_t l = 0; l < y.d2; ++l) out[l] = line[l / 2];
            }
        }
    }
    return y;
}

Tensor upsample2_backward(const Tensor& grad_output) {
    const Tensor& g = grad_output;
    Tensor x(g.channels, g.d0 / 2, g.d1 / 2, g.d2 / 2);
    for (std::size_t c = 0; c < g.channels; ++c) {
        const double* src = g.data.data() + c * g.voxels();
        double* dst = x.data.data() + c * x.voxels();
        for (std::size_t i = 0; i < g.d0; ++i) {
            for (std::size_t j = 0; j < g.d1; ++j) {
                double* line = dst + ((i / 2) * x.d1 + j / 2) * x.d2;
                const double* in = src + (i * g.d1 + j) * g.d2;
                for (std::size_t l = 0; l < g.d2; ++l) line[l / 2] += in[l];
            }
        }
    }
    return x;
}

}  // namespace spectracal::nn
