#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spectracal/cube.hpp"
#include "spectracal/nn/layers.hpp"
#include "spectracal/nn/tensor.hpp"
#include "spectracal/rng.hpp"

namespace spectracal::nn {

enum class OutputActivation { Softplus, Identity };

/// Topology of the 3D convolutional autoencoder.
///
///   encoder stage s: stride-2 conv -> softplus -> residual blocks
///                    (no residual blocks at the deepest stage)
///   decoder stage s: 2x nearest upsample -> conv -> softplus -> residual blocks
///                    (the last decoder stage maps to head_width channels and
///                    has no residual blocks)
///   head:            1x1x1 conv to one channel -> output activation
///
/// A residual block is conv -> softplus -> conv plus the identity shortcut.
/// Encoder features never reach the decoder except through the bottleneck.
/// With no encoder stages the network is just the head.
struct NetConfig {
    std::size_t height = 32;
    std::size_t width = 32;
    std::size_t bands = 16;
    std::vector<std::size_t> encoder_widths{8, 16, 32};
    std::size_t blocks_per_stage = 1;
    std::size_t kernel = 3;
    std::size_t head_width = 4;
    bool skip_connections = false;
    OutputActivation output = OutputActivation::Softplus;
    /// Scale applied to the He initialization of each residual block's second conv.
    double residual_init_scale = 0.1;

    /// Throws ParameterError for skip connections or indivisible dimensions.
    void validate() const;
};

nlohmann::json to_json(const NetConfig& config);
NetConfig net_config_from_json(const nlohmann::json& j);

struct ParamTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;
};

/// Weights and biases, one entry per tensor in network order.
struct NetParams {
    std::vector<ParamTensor> tensors;

    std::size_t count() const;
    /// Zero-valued tensors with the same names and shapes.
    NetParams zeros_like() const;
    bool same_layout(const NetParams& other) const;
    void add_scaled(const NetParams& other, double scale);

    friend bool operator==(const NetParams& a, const NetParams& b);
};

/// SCNP: "SCNP" | u16 version | u32 tensor count |
///       per tensor: u32 rank | rank x u32 dims | prod(dims) x f64 (little-endian)
inline constexpr std::uint16_t kScnpVersion = 1;
void write_params(const NetParams& params, const std::filesystem::path& path);
NetParams read_params(const std::filesystem::path& path);

class Network {
public:
    explicit Network(NetConfig config);

    const NetConfig& config() const noexcept { return config_; }

    /// He-normal weights, zero biases.
    NetParams init_params(Rng& rng) const;
    NetParams zero_params() const;
    bool matches(const NetParams& params) const;

    /// Raw output tensor (1 x H x W x B).
    Tensor forward_tensor(const NetParams& params, const Tensor& input) const;

    /// Predicted white reference. Softplus outputs are floored at kWhiteEpsilon.
    WhiteRefImage forward(const NetParams& params, const HsiCube& raw) const;

    /// Mean squared error of the prediction for `raw` against `target`.
    /// Adds weight * dLoss/dParams into `grad` and returns the loss.
    double accumulate_gradient(const NetParams& params, const HsiCube& raw,
                               const WhiteRefImage& target, NetParams& grad,
                               double weight = 1.0) const;

    /// Gradient of a mean squared error against an arbitrary target tensor;
    /// used by the layer-level gradient checks.
    double accumulate_gradient(const NetParams& params, const Tensor& input, const Tensor& target,
                               NetParams& grad, double weight = 1.0) const;

private:
    enum class OpKind { Conv, Softplus, Upsample, Save, AddSaved };
    struct Op {
        OpKind kind;
        ConvGeometry geometry{};
        std::size_t weight_index = 0;
    };

    struct Trace;
    Tensor run(const NetParams& params, const Tensor& input, Trace* trace) const;
    void check_input(const Tensor& input) const;

    NetConfig config_;
    std::vector<Op> ops_;
    std::vector<ParamTensor> layout_;
    std::vector<bool> second_in_block_;
};

Tensor to_tensor(const HsiCube& cube);

/// Mean over all entries of (pred - target)^2.
double mse_loss(const WhiteRefImage& pred, const WhiteRefImage& target);

/// calibrate(raw, network.forward(params, raw)).
HsiCube recalibrate(const Network& network, const NetParams& params, const HsiCube& raw);

}  // namespace spectracal::nn
