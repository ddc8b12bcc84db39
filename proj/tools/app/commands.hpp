#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"
#include "dataset.hpp"
#include "spectracal/eval/benchmark.hpp"
#include "spectracal/illum/halogen.hpp"
#include "spectracal/nn/train.hpp"

namespace spectracal::app {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// Writes the synthetic dataset for `config` into `out`.
Dataset cmd_synth(const RunConfig& config, const std::filesystem::path& out);

/// Reads (wavelength_nm, intensity) rows, fits the halogen model and writes
/// the parameters as JSON when `out_json` is non-empty.
illum::FitResult cmd_fit(const std::filesystem::path& csv, const RunConfig& config,
                         const std::filesystem::path& out_json, std::ostream& log);

struct TrainOutputs {
    nn::TrainResult result;
    std::filesystem::path model;
    std::filesystem::path loss_csv;
};

/// Trains on the training scenes and illuminants of the dataset. Writes
/// model.scnp (+ model.meta.json) and loss.csv into `out`.
TrainOutputs cmd_train(const std::filesystem::path& dataset, const RunConfig& config,
                       const std::filesystem::path& out, std::ostream& log);

/// Parses "neural", "grayworld", "maxrgb", "specular" or "whitetile:PATH".
struct CalibrationMethod {
    eval::Method method = eval::Method::Neural;
    std::filesystem::path white;
};
CalibrationMethod parse_calibration_method(const std::string& text);

void cmd_calibrate(const CalibrationMethod& method, const std::filesystem::path& input,
                   const std::filesystem::path& output, const std::filesystem::path& model,
                   double top_fraction);

/// Benchmark on the held-out scenes and illuminants; writes cases.csv and
/// report.json into `out`. `model` may be empty if neural is not requested.
eval::EvalReport cmd_evaluate(const std::filesystem::path& dataset, const std::filesystem::path& model,
                              const RunConfig& config, const std::filesystem::path& out,
                              std::ostream& log);

/// Re-aggregates a cases CSV (or a directory holding cases.csv). If a
/// report.json sits next to it, the recomputed groups must match it exactly.
eval::EvalReport cmd_report(const std::filesystem::path& input, const std::filesystem::path& output,
                            std::ostream& log);

void print_summary(const eval::EvalReport& report, std::ostream& out);

/// Model loading shared by calibrate and evaluate.
struct LoadedModel {
    nn::Network network;
    nn::NetParams params;
    nlohmann::json meta;
};
LoadedModel load_model(const std::filesystem::path& path);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace spectracal::app
