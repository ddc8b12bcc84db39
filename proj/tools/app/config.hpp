#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "spectracal/eval/benchmark.hpp"
#include "spectracal/illum/bank.hpp"
#include "spectracal/illum/halogen.hpp"
#include "spectracal/illum/scene.hpp"
#include "spectracal/nn/network.hpp"
#include "spectracal/nn/train.hpp"

namespace spectracal::app {

struct GridSpec {
    double start_nm = 500.0;
    double step_nm = 30.0;
    std::size_t bands = 16;

    WavelengthGrid grid() const { return WavelengthGrid::uniform(start_nm, step_nm, bands); }
};

struct SplitSpec {
    std::size_t test_scenes = 40;
    std::size_t test_illuminants = 40;
};

/// Everything a run depends on. Geometry (grid, scene size) is stated once
/// and copied into the scene, bank and network sections by resolve().
struct RunConfig {
    std::uint64_t seed = 2024;
    GridSpec grid{};
    std::size_t scene_count = 200;
    illum::SceneConfig scene{};
    illum::BankConfig bank{};
    SplitSpec split{};
    nn::NetConfig net{};
    /// Desk schedule; the library default is the slower 1e-4 -> 1e-5.
    nn::TrainConfig train = [] {
        nn::TrainConfig t;
        t.lr_start = 2e-3;
        t.lr_end = 2e-5;
        return t;
    }();
    illum::FitOptions fit{};
    eval::BenchmarkConfig benchmark{};
    std::filesystem::path output = "run";

    /// Propagates grid and scene size into the other sections.
    void resolve();
    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
    std::size_t bank_size() const;
};

/// Parses a config document. Missing keys take their defaults; unknown keys,
/// wrong types and invalid values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

RunConfig load_config(const std::filesystem::path& path);

/// Named sub-streams of the root seed.
Rng stream(const RunConfig& config, const char* name);

}  // namespace spectracal::app
