#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spectracal/eval/segment.hpp"
#include "spectracal/illum/bank.hpp"
#include "spectracal/illum/scene.hpp"
#include "spectracal/nn/network.hpp"

namespace spectracal::eval {

enum class Method { None, WhiteTile, Grayworld, Maxrgb, Specular, Neural };

std::string to_string(Method m);
/// Accepts none, whitetile, grayworld, maxrgb, specular, neural.
Method method_from_string(const std::string& s);
std::vector<Method> all_methods();

/// Pseudo-method name of the rows scored on the stray-light-free cube.
inline constexpr const char* kReferenceMethod = "reference";
inline constexpr const char* kReferenceScenario = "clean";
inline constexpr const char* kAllScenarios = "all";

struct BenchmarkConfig {
    std::vector<Method> methods = all_methods();
    double tau = 1.0;
    double top_fraction = 0.01;
    double path_length = 1.0;
    /// Illuminants evaluated per scene; 0 uses every test illuminant.
    std::size_t illuminants_per_scene = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CaseRow {
    std::int64_t scene_id = 0;
    /// -1 for reference rows.
    std::int64_t illuminant_id = -1;
    std::string scenario;
    std::string method;
    double cosine_sim = 0.0;
    std::vector<double> dsc;
    std::vector<double> nsd;
    double mae_oxy = 0.0;
    double mae_total_absorber = 0.0;
    double mae_water = 0.0;

    double dsc_mean() const;
    double nsd_mean() const;
    friend bool operator==(const CaseRow&, const CaseRow&) = default;
};

/// Aggregated metrics for one (method, scenario) group: per-scene means, then
/// the mean over scenes.
struct GroupSummary {
    std::string method;
    std::string scenario;
    std::size_t scenes = 0;
    std::size_t cases = 0;
    double cosine_sim = 0.0;
    std::vector<double> dsc;
    std::vector<double> nsd;
    double dsc_mean = 0.0;
    double nsd_mean = 0.0;
    double mae_oxy = 0.0;
    double mae_total_absorber = 0.0;
    double mae_water = 0.0;
    friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

struct EvalReport {
    std::size_t n_classes = 0;
    double tau = 1.0;
    std::vector<CaseRow> cases;
    std::vector<GroupSummary> groups;

    /// Group for (method, scenario); throws std::out_of_range if absent.
    const GroupSummary& group(const std::string& method,
                              const std::string& scenario = kAllScenarios) const;
};

/// Groups rows by (method, scenario) and additionally (method, "all"), in
/// order of first appearance.
std::vector<GroupSummary> aggregate(std::span<const CaseRow> rows, std::size_t n_classes);

struct BenchmarkInputs {
    /// Held-out scenes with their ground truth.
    std::span<const illum::SceneTruth> scenes;
    /// Identifiers of the scenes, parallel to `scenes`.
    std::vector<std::int64_t> scene_ids;
    /// Held-out illuminants.
    const illum::IlluminantBank* test_bank = nullptr;
    /// Ids of the illuminants used for training; must not overlap the test bank.
    std::vector<std::size_t> train_illuminant_ids;
    std::vector<Spectrum> centroids;
    const illum::ChromophoreBasis* basis = nullptr;
    const nn::Network* network = nullptr;
    const nn::NetParams* params = nullptr;
};

/// For every scene x test illuminant the raw image is simulated, recalibrated
/// by each method, segmented and unmixed. Cosine similarity and parameter
/// MAEs are measured against the stray-light-free scene; DSC and NSD against
/// the ground-truth labels. Each scene also gets one reference row scored on
/// its clean cube. Throws ConfigError on train/test id overlap or when the
/// neural method is requested without a model.
EvalReport run_benchmark(const BenchmarkInputs& inputs, const BenchmarkConfig& config);

/// Columns: scene_id, illuminant_id, scenario, method, cosine_sim,
/// dsc_class_k..., nsd_class_k..., mae_oxy, mae_total_absorber, mae_water,
/// dsc_mean, nsd_mean. Numbers are written with 17 significant digits.
void write_cases_csv(std::span<const CaseRow> rows, std::size_t n_classes,
                     const std::filesystem::path& path);
/// Returns the rows and the number of classes found in the header.
std::pair<std::vector<CaseRow>, std::size_t> read_cases_csv(const std::filesystem::path& path);

nlohmann::json report_to_json(const EvalReport& report);
/// Groups only; cases are not part of the summary document.
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace spectracal::eval
