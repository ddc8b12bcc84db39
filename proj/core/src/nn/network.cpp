#include "spectracal/nn/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "spectracal/calibration.hpp"
#include "spectracal/errors.hpp"

namespace spectracal::nn {

struct Network::Trace {
    std::vector<Tensor> inputs;
    std::vector<ConvCache> caches;
};

void NetConfig::validate() const {
    if (skip_connections)
        throw ParameterError("encoder-to-decoder skip connections are not supported");
    if (height == 0 || width == 0 || bands == 0) throw ParameterError("input dims must be positive");
    if (kernel == 0 || kernel % 2 == 0) throw ParameterError("kernel size must be odd");
    const std::size_t factor = std::size_t{1} << encoder_widths.size();
    if (height % factor || width % factor || bands % factor)
        throw ParameterError("input dims must be divisible by 2^stages in every axis");
    for (auto w : encoder_widths) {
        if (w == 0) throw ParameterError("stage widths must be positive");
    }
    if (!encoder_widths.empty() && head_width == 0) throw ParameterError("head width must be positive");
}

nlohmann::json to_json(const NetConfig& c) {
    return {{"height", c.height},
            {"width", c.width},
            {"bands", c.bands},
            {"encoder_widths", c.encoder_widths},
            {"blocks_per_stage", c.blocks_per_stage},
            {"kernel", c.kernel},
            {"head_width", c.head_width},
            {"skip_connections", c.skip_connections},
            {"output", c.output == OutputActivation::Softplus ? "softplus" : "identity"},
            {"residual_init_scale", c.residual_init_scale}};
}

NetConfig net_config_from_json(const nlohmann::json& j) {
    NetConfig c;
    try {
        c.height = j.at("height").get<std::size_t>();
        c.width = j.at("width").get<std::size_t>();
        c.bands = j.at("bands").get<std::size_t>();
        c.encoder_widths = j.at("encoder_widths").get<std::vector<std::size_t>>();
        c.blocks_per_stage = j.at("blocks_per_stage").get<std::size_t>();
        c.kernel = j.at("kernel").get<std::size_t>();
        c.head_width = j.at("head_width").get<std::size_t>();
        c.skip_connections = j.at("skip_connections").get<bool>();
        const auto out = j.at("output").get<std::string>();
        if (out == "softplus") {
            c.output = OutputActivation::Softplus;
        } else if (out == "identity") {
            c.output = OutputActivation::Identity;
        } else {
            throw FormatError("unknown output activation '" + out + "'");
        }
        c.residual_init_scale = j.value("residual_init_scale", c.residual_init_scale);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("network config: ") + e.what());
    }
    return c;
}

std::size_t NetParams::count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.values.size();
    return n;
}

NetParams NetParams::zeros_like() const {
    NetParams z = *this;
    for (auto& t : z.tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
    return z;
}

bool NetParams::same_layout(const NetParams& other) const {
    if (tensors.size() != other.tensors.size()) return false;
    for (std::size_t k = 0; k < tensors.size(); ++k) {
        if (tensors[k].shape != other.tensors[k].shape) return false;
    }
    return true;
}

void NetParams::add_scaled(const NetParams& other, double scale) {
    if (!same_layout(other)) throw DimensionError("parameter layouts differ");
    for (std::size_t k = 0; k < tensors.size(); ++k) {
        auto& dst = tensors[k].values;
        const auto& src = other.tensors[k].values;
        for (std::size_t q = 0; q < dst.size(); ++q) dst[q] += scale * src[q];
    }
}

bool operator==(const NetParams& a, const NetParams& b) {
    if (!a.same_layout(b)) return false;
    for (std::size_t k = 0; k < a.tensors.size(); ++k) {
        if (a.tensors[k].values != b.tensors[k].values) return false;
    }
    return true;
}

namespace {

constexpr char kScnpMagic[4] = {'S', 'C', 'N', 'P'};

template <typename U>
void put_le(std::vector<unsigned char>& out, U v) {
    for (std::size_t k = 0; k < sizeof(U); ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFFu));
}

struct Reader {
    const std::vector<unsigned char>& bytes;
    std::size_t pos = 0;
    std::string what;

    template <typename U>
    U get() {
        if (bytes.size() - pos < sizeof(U)) throw FormatError(what + ": truncated");
        U v = 0;
        for (std::size_t k = 0; k < sizeof(U); ++k) v |= static_cast<U>(bytes[pos + k]) << (8 * k);
        pos += sizeof(U);
        return v;
    }
};

std::size_t volume(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

}  // namespace

void write_params(const NetParams& params, const std::filesystem::path& path) {
    std::vector<unsigned char> bytes(std::begin(kScnpMagic), std::end(kScnpMagic));
    put_le<std::uint16_t>(bytes, kScnpVersion);
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(params.tensors.size()));
    for (const auto& t : params.tensors) {
        put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(t.shape.size()));
        for (auto d : t.shape) put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(d));
        for (double v : t.values) put_le<std::uint64_t>(bytes, std::bit_cast<std::uint64_t>(v));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

NetParams read_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    const std::vector<unsigned char> bytes(std::istreambuf_iterator<char>(in), {});
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kScnpMagic, 4) != 0)
        throw FormatError(path.string() + ": bad magic bytes");
    Reader r{bytes, 4, path.string()};
    const auto version = r.get<std::uint16_t>();
    if (version != kScnpVersion) throw FormatError(path.string() + ": unsupported SCNP version");
    const auto count = r.get<std::uint32_t>();
    NetParams params;
    for (std::uint32_t t = 0; t < count; ++t) {
        ParamTensor tensor;
        tensor.name = "tensor_" + std::to_string(t);
        const auto rank = r.get<std::uint32_t>();
        if (rank > 8) throw FormatError(path.string() + ": implausible tensor rank");
        for (std::uint32_t k = 0; k < rank; ++k) tensor.shape.push_back(r.get<std::uint32_t>());
        const std::size_t n = volume(tensor.shape);
        if ((bytes.size() - r.pos) / 8 < n) throw FormatError(path.string() + ": truncated payload");
        tensor.values.resize(n);
        for (auto& v : tensor.values) v = std::bit_cast<double>(r.get<std::uint64_t>());
        params.tensors.push_back(std::move(tensor));
    }
    if (r.pos != bytes.size()) throw FormatError(path.string() + ": trailing bytes");
    return params;
}

Network::Network(NetConfig config) : config_(std::move(config)) {
    config_.validate();
    const std::size_t k = config_.kernel;
    auto add_conv = [&](std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
                        const std::string& name, bool second_in_block) {
        Op op{OpKind::Conv, ConvGeometry{in, out, kernel, stride}, layout_.size()};
        ops_.push_back(op);
        layout_.push_back({name + ".weight", {out, in, kernel, kernel, kernel}, {}});
        layout_.push_back({name + ".bias", {out}, {}});
        second_in_block_.push_back(second_in_block);
        second_in_block_.push_back(false);
    };
    auto add_block = [&](std::size_t width, const std::string& name) {
        ops_.push_back({OpKind::Save});
        add_conv(width, width, k, 1, name + ".conv1", false);
        ops_.push_back({OpKind::Softplus});
        add_conv(width, width, k, 1, name + ".conv2", true);
        ops_.push_back({OpKind::AddSaved});
    };

    const auto& widths = config_.encoder_widths;
    const std::size_t stages = widths.size();
    std::size_t channels = 1;
    for (std::size_t s = 0; s < stages; ++s) {
        const std::string name = "enc" + std::to_string(s);
        add_conv(channels, widths[s], k, 2, name + ".down", false);
        ops_.push_back({OpKind::Softplus});
        channels = widths[s];
        if (s + 1 < stages) {
            for (std::size_t b = 0; b < config_.blocks_per_stage; ++b)
                add_block(channels, name + ".res" + std::to_string(b));
        }
    }
    for (std::size_t s = stages; s-- > 0;) {
        const std::string name = "dec" + std::to_string(s);
        const std::size_t out = s > 0 ? widths[s - 1] : config_.head_width;
        ops_.push_back({OpKind::Upsample});
        add_conv(channels, out, k, 1, name + ".up", false);
        ops_.push_back({OpKind::Softplus});
        channels = out;
        if (s > 0) {
            for (std::size_t b = 0; b < config_.blocks_per_stage; ++b)
                add_block(channels, name + ".res" + std::to_string(b));
        }
    }
    add_conv(channels, 1, 1, 1, "head", false);
    if (config_.output == OutputActivation::Softplus) ops_.push_back({OpKind::Softplus});
}

NetParams Network::zero_params() const {
    NetParams p;
    for (const auto& t : layout_) {
        ParamTensor z = t;
        z.values.assign(volume(t.shape), 0.0);
        p.tensors.push_back(std::move(z));
    }
    return p;
}

NetParams Network::init_params(Rng& rng) const {
    NetParams p = zero_params();
    for (std::size_t t = 0; t < p.tensors.size(); ++t) {
        auto& tensor = p.tensors[t];
        if (tensor.shape.size() != 5) continue;  // biases stay zero
        const std::size_t fan_in = tensor.shape[1] * tensor.shape[2] * tensor.shape[3] * tensor.shape[4];
        double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        if (second_in_block_[t]) stddev *= config_.residual_init_scale;
        for (double& v : tensor.values) v = stddev * rng.normal();
    }
    return p;
}

bool Network::matches(const NetParams& params) const {
    if (params.tensors.size() != layout_.size()) return false;
    for (std::size_t k = 0; k < layout_.size(); ++k) {
        if (params.tensors[k].shape != layout_[k].shape) return false;
        if (params.tensors[k].values.size() != volume(layout_[k].shape)) return false;
    }
    return true;
}

void Network::check_input(const Tensor& input) const {
    if (input.channels != 1) throw DimensionError("network input must have one channel");
    if (input.d0 != config_.height || input.d1 != config_.width || input.d2 != config_.bands)
        throw DimensionError("network input dims do not match the network config");
}

Tensor Network::run(const NetParams& params, const Tensor& input, Trace* trace) const {
    check_input(input);
    if (!matches(params)) throw DimensionError("parameters do not match the network layout");
    Tensor x = input;
    std::vector<Tensor> saved;
    if (trace) {
        trace->inputs.clear();
        trace->caches.assign(ops_.size(), {});
    }
    for (std::size_t k = 0; k < ops_.size(); ++k) {
        const Op& op = ops_[k];
        if (trace) trace->inputs.push_back(x);
        switch (op.kind) {
            case OpKind::Conv:
                x = conv3d_forward(x, params.tensors[op.weight_index].values,
                                   params.tensors[op.weight_index + 1].values, op.geometry,
                                   trace ? &trace->caches[k] : nullptr);
                break;
            case OpKind::Softplus: x = softplus_forward(x); break;
            case OpKind::Upsample: x = upsample2_forward(x); break;
            case OpKind::Save: saved.push_back(x); break;
            case OpKind::AddSaved: {
                const Tensor& skip = saved.back();
                for (std::size_t q = 0; q < x.data.size(); ++q) x.data[q] += skip.data[q];
                saved.pop_back();
                break;
            }
        }
    }
    return x;
}

Tensor Network::forward_tensor(const NetParams& params, const Tensor& input) const {
    return run(params, input, nullptr);
}

WhiteRefImage Network::forward(const NetParams& params, const HsiCube& raw) const {
    Tensor y = run(params, to_tensor(raw), nullptr);
    if (config_.output == OutputActivation::Softplus) {
        for (double& v : y.data) v = std::max(v, kWhiteEpsilon);
    }
    return WhiteRefImage(HsiCube(raw.height(), raw.width(), raw.grid(), std::move(y.data)));
}

double Network::accumulate_gradient(const NetParams& params, const HsiCube& raw,
                                    const WhiteRefImage& target, NetParams& grad,
                                    double weight) const {
    if (!raw.congruent(target.cube())) throw DimensionError("input and target shapes differ");
    return accumulate_gradient(params, to_tensor(raw), to_tensor(target.cube()), grad, weight);
}

double Network::accumulate_gradient(const NetParams& params, const Tensor& input,
                                    const Tensor& target, NetParams& grad, double weight) const {
    if (!grad.same_layout(params)) throw DimensionError("gradient buffer layout mismatch");
    Trace trace;
    const Tensor y = run(params, input, &trace);
    if (!y.same_shape(target)) throw DimensionError("target shape does not match network output");

    const double n = static_cast<double>(y.size());
    double loss = 0.0;
    Tensor g = y;
    for (std::size_t q = 0; q < y.size(); ++q) {
        const double e = y.data[q] - target.data[q];
        loss += e * e;
        g.data[q] = weight * 2.0 * e / n;
    }
    loss /= n;

    std::vector<Tensor> skip_grads;
    for (std::size_t k = ops_.size(); k-- > 0;) {
        const Op& op = ops_[k];
        const Tensor& in = trace.inputs[k];
        switch (op.kind) {
            case OpKind::Conv: {
                Tensor gin;
                conv3d_backward(in, trace.caches[k], g, params.tensors[op.weight_index].values,
                                op.geometry, grad.tensors[op.weight_index].values,
                                grad.tensors[op.weight_index + 1].values, k > 0 ? &gin : nullptr);
                g = std::move(gin);
                break;
            }
            case OpKind::Softplus: g = softplus_backward(in, g); break;
            case OpKind::Upsample: g = upsample2_backward(g); break;
            case OpKind::AddSaved: skip_grads.push_back(g); break;
            case OpKind::Save: {
                const Tensor& s = skip_grads.back();
                for (std::size_t q = 0; q < g.data.size(); ++q) g.data[q] += s.data[q];
                skip_grads.pop_back();
                break;
            }
        }
    }
    return loss;
}

Tensor to_tensor(const HsiCube& cube) {
    Tensor t(1, cube.height(), cube.width(), cube.bands());
    std::copy(cube.values().begin(), cube.values().end(), t.data.begin());
    return t;
}

double mse_loss(const WhiteRefImage& pred, const WhiteRefImage& target) {
    if (!pred.cube().congruent(target.cube())) throw DimensionError("mse_loss: shapes differ");
    const auto p = pred.cube().values();
    const auto t = target.cube().values();
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double e = p[k] - t[k];
        s += e * e;
    }
    return s / static_cast<double>(p.size());
}

HsiCube recalibrate(const Network& network, const NetParams& params, const HsiCube& raw) {
    return calibrate(raw, network.forward(params, raw));
}

}  // namespace spectracal::nn
