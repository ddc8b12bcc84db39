#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "config.hpp"
#include "spectracal/illum/bank.hpp"
#include "spectracal/illum/scene.hpp"

namespace spectracal::app {

struct Split {
    std::vector<std::size_t> train_scenes;
    std::vector<std::size_t> test_scenes;
    std::vector<std::size_t> train_illuminants;
    std::vector<std::size_t> test_illuminants;
};

/// Seeded partition of scene ids and illuminant ids; each list is sorted.
Split make_split(const RunConfig& config);

struct Dataset {
    RunConfig config;
    std::vector<illum::SceneTruth> scenes;
    illum::IlluminantBank bank;
    Split split;

    std::vector<illum::SceneTruth> scenes_for(const std::vector<std::size_t>& ids) const;
};

/// Scenes, bank and split for a config. Deterministic in the config alone.
Dataset synthesize(const RunConfig& config);

/// Layout: dataset.json, chromophores.csv, scenes/scene_NNNN.hsic with a
/// .meta.json ground-truth sidecar, bank/ (see write_bank).
void write_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

nlohmann::json truth_to_json(const illum::SceneTruth& truth);
illum::SceneTruth truth_from_json(HsiCube cube, const nlohmann::json& j);

}  // namespace spectracal::app
