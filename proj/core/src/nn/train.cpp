#include "spectracal/nn/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "spectracal/calibration.hpp"
#include "spectracal/errors.hpp"
#include "spectracal/parallel.hpp"

namespace spectracal::nn {

HsiCube apply_transform(const HsiCube& cube, const SpatialTransform& t) {
    const std::size_t h = cube.height();
    const std::size_t w = cube.width();
    const std::size_t bands = cube.bands();
    const int turns = ((t.quarter_turns % 4) + 4) % 4;
    if (turns % 2 == 1 && h != w) throw ParameterError("quarter-turn rotation needs a square cube");

    // Flips first.
    std::vector<double> a(cube.values().begin(), cube.values().end());
    if (t.flip_horizontal || t.flip_vertical) {
        std::vector<double> b(a.size());
        for (std::size_t i = 0; i < h; ++i) {
            const std::size_t si = t.flip_vertical ? h - 1 - i : i;
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t sj = t.flip_horizontal ? w - 1 - j : j;
                std::copy_n(a.begin() + static_cast<std::ptrdiff_t>((si * w + sj) * bands), bands,
                            b.begin() + static_cast<std::ptrdiff_t>((i * w + j) * bands));
            }
        }
        a = std::move(b);
    }
    // Then clockwise quarter turns: (i, j) -> (j, n - 1 - i).
    std::size_t rows = h;
    std::size_t cols = w;
    for (int r = 0; r < turns; ++r) {
        std::vector<double> b(a.size());
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                const std::size_t ni = j;
                const std::size_t nj = rows - 1 - i;
                std::copy_n(a.begin() + static_cast<std::ptrdiff_t>((i * cols + j) * bands), bands,
                            b.begin() + static_cast<std::ptrdiff_t>((ni * rows + nj) * bands));
            }
        }
        std::swap(rows, cols);
        a = std::move(b);
    }
    return HsiCube(rows, cols, cube.grid(), std::move(a));
}

SpatialTransform random_transform(Rng& rng, bool allow_rotation) {
    SpatialTransform t;
    t.quarter_turns = allow_rotation ? static_cast<int>(rng.below(4)) : 0;
    t.flip_horizontal = rng.below(2) == 1;
    t.flip_vertical = rng.below(2) == 1;
    return t;
}

std::pair<HsiCube, WhiteRefImage> augment(const HsiCube& cube, const WhiteRefImage& white, Rng& rng,
                                          bool allow_rotation) {
    if (!cube.congruent(white.cube())) throw DimensionError("augment: cube and white differ in shape");
    if (allow_rotation && cube.height() != cube.width())
        throw ParameterError("augment: rotations need square spatial dims");
    const SpatialTransform t = random_transform(rng, allow_rotation);
    return {apply_transform(cube, t), WhiteRefImage(apply_transform(white.cube(), t))};
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ParameterError("epochs must be >= 1");
    if (batch_size < 1) throw ParameterError("batch size must be >= 1");
    // lr_start == lr_end == 0 is allowed: a frozen run that only measures loss.
    if (!(lr_end >= 0.0 && lr_start >= lr_end) || !std::isfinite(lr_start))
        throw ParameterError("learning rates must satisfy lr_start >= lr_end >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw ParameterError("Adam betas must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw ParameterError("Adam epsilon must be positive");
}

Adam::Adam(const NetParams& like, double beta1, double beta2, double epsilon)
    : m_(like.zeros_like()), v_(like.zeros_like()), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Adam::step(NetParams& params, const NetParams& grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.tensors.size(); ++k) {
        auto& p = params.tensors[k].values;
        const auto& g = grad.tensors[k].values;
        auto& m = m_.tensors[k].values;
        auto& v = v_.tensors[k].values;
        for (std::size_t q = 0; q < p.size(); ++q) {
            m[q] = beta1_ * m[q] + (1.0 - beta1_) * g[q];
            v[q] = beta2_ * v[q] + (1.0 - beta2_) * g[q] * g[q];
            const double mhat = m[q] / c1;
            const double vhat = v[q] / c2;
            p[q] -= lr * mhat / (std::sqrt(vhat) + epsilon_);
        }
    }
}

double learning_rate(const TrainConfig& cfg, std::size_t step, std::size_t total_steps) {
    if (total_steps <= 1) return cfg.lr_start;
    const double t = static_cast<double>(step) / static_cast<double>(total_steps - 1);
    return cfg.lr_start + (cfg.lr_end - cfg.lr_start) * t;
}

TrainResult train(const Network& network, NetParams init, const illum::IlluminantBank& bank,
                  std::span<const illum::SceneTruth> scenes, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    if (bank.empty()) throw ParameterError("training needs a non-empty illuminant bank");
    if (scenes.empty()) throw ParameterError("training needs at least one scene");
    if (!network.matches(init)) throw DimensionError("initial parameters do not match the network");
    for (const auto& s : scenes) {
        if (!s.cube.congruent(bank[0].white.cube()))
            throw DimensionError("scenes and bank must share grid and spatial size");
    }

    const std::size_t n = scenes.size();
    const std::size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = batches_per_epoch * cfg.epochs;
    const bool square = scenes[0].cube.height() == scenes[0].cube.width();

    TrainResult result{std::move(init), {}};
    Adam adam(result.params, cfg.beta1, cfg.beta2, cfg.adam_epsilon);
    const Rng root(cfg.seed);
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng = root.fork(epoch);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        shuffle(order.begin(), order.end(), epoch_rng);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, n - start);
            std::vector<NetParams> grads(count);
            std::vector<double> losses(count);
            parallel_for(count, [&](std::size_t b) {
                const std::size_t sample = start + b;
                Rng r = epoch_rng.fork(sample + 1);
                const auto& scene = scenes[order[sample]];
                const auto& white = bank[r.below(bank.size())].white;
                HsiCube raw = simulate_raw(scene.cube, white);
                WhiteRefImage target = white;
                if (cfg.augment) std::tie(raw, target) = augment(raw, target, r, square);
                grads[b] = result.params.zeros_like();
                losses[b] = network.accumulate_gradient(result.params, raw, target, grads[b],
                                                        1.0 / static_cast<double>(count));
            });
            NetParams total = std::move(grads[0]);
            for (std::size_t b = 1; b < count; ++b) total.add_scaled(grads[b], 1.0);
            for (double l : losses) epoch_loss += l;
            const double lr = learning_rate(cfg, step, total_steps);
            if (lr > 0.0) adam.step(result.params, total, lr);
            ++step;
        }
        const double mean = epoch_loss / static_cast<double>(n);
        result.loss_curve.push_back(mean);
        if (on_epoch) on_epoch(epoch + 1, mean);
    }
    return result;
}

void write_loss_csv(const std::vector<double>& curve, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << "epoch,mean_loss\n";
    char buf[64];
    for (std::size_t e = 0; e < curve.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%.17g", curve[e]);
        out << (e + 1) << ',' << buf << '\n';
    }
}

}  // namespace spectracal::nn
