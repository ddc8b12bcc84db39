#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "spectracal/illum/bank.hpp"
#include "spectracal/illum/scene.hpp"
#include "spectracal/nn/network.hpp"

namespace spectracal::nn {

/// Element of the square's symmetry group: optional horizontal flip
/// (mirror columns), optional vertical flip (mirror rows), then
/// `quarter_turns` clockwise 90-degree rotations. With (row, col) indexing a
/// clockwise quarter turn of an n x n image maps (i, j) to (j, n - 1 - i).
struct SpatialTransform {
    int quarter_turns = 0;
    bool flip_horizontal = false;
    bool flip_vertical = false;

    bool is_identity() const noexcept {
        return quarter_turns % 4 == 0 && !flip_horizontal && !flip_vertical;
    }
};

/// Applies `t` to the spatial axes; spectra move with their pixels.
/// Rotations by an odd number of quarter turns need a square cube.
HsiCube apply_transform(const HsiCube& cube, const SpatialTransform& t);

SpatialTransform random_transform(Rng& rng, bool allow_rotation = true);

/// Draws one transform and applies it to the cube and the white reference alike.
std::pair<HsiCube, WhiteRefImage> augment(const HsiCube& cube, const WhiteRefImage& white, Rng& rng,
                                          bool allow_rotation = true);

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 5;
    double lr_start = 1e-4;
    double lr_end = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    bool augment = true;

    void validate() const;
};

/// Adam with externally supplied step sizes.
class Adam {
public:
    Adam(const NetParams& like, double beta1, double beta2, double epsilon);
    void step(NetParams& params, const NetParams& grad, double lr);
    std::size_t steps() const noexcept { return t_; }

private:
    NetParams m_;
    NetParams v_;
    double beta1_;
    double beta2_;
    double epsilon_;
    std::size_t t_ = 0;
};

/// Linear decay from lr_start at step 0 to lr_end at the last step.
double learning_rate(const TrainConfig& cfg, std::size_t step, std::size_t total_steps);

struct TrainResult {
    NetParams params;
    /// Mean training loss per epoch, measured before each update.
    std::vector<double> loss_curve;
};

// epoch is 1-based.
using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Trains the white-reference estimator. Every sample pairs a calibrated scene
/// with a white reference drawn from `bank`; the input is their product and
/// the target is the white reference itself. The calibrated image never
/// enters the loss. Scenes are visited in a fresh random order each epoch.
/// Per-sample gradients are summed in batch order, so results do not depend
/// on the thread count.
TrainResult train(const Network& network, NetParams init, const illum::IlluminantBank& bank,
                  std::span<const illum::SceneTruth> scenes, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Loss curve as "epoch,mean_loss" CSV (epochs numbered from 1).
void write_loss_csv(const std::vector<double>& curve, const std::filesystem::path& path);

}  // namespace spectracal::nn
