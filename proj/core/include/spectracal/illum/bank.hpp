#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spectracal/cube.hpp"
#include "spectracal/illum/halogen.hpp"
#include "spectracal/rng.hpp"

namespace spectracal::illum {

enum class Provenance { MeasuredSurrogate, SimulatedHalogen, SimulatedLedMix };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct BankItem {
    std::size_t id = 0;
    WhiteRefImage white;
    Provenance provenance = Provenance::MeasuredSurrogate;
    std::optional<int> cluster;
    /// Free-form record of how the item was made (parameters, parents, alpha).
    nlohmann::json generation = nlohmann::json::object();
};

/// White references sharing one wavelength grid and one spatial size.
class IlluminantBank {
public:
    IlluminantBank() = default;

    /// Throws DimensionError if the item does not match the bank's grid and size.
    void add(BankItem item);

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    const BankItem& operator[](std::size_t k) const { return items_[k]; }
    BankItem& operator[](std::size_t k) { return items_[k]; }
    const std::vector<BankItem>& items() const noexcept { return items_; }

    /// Items whose ids are listed, in the listed order.
    IlluminantBank subset(const std::vector<std::size_t>& ids) const;
    const BankItem& by_id(std::size_t id) const;

private:
    std::vector<BankItem> items_;
};

/// I_s(i,j,l) = f(l) * donor(i,j,l) / mean_spectrum(donor)(l).
/// The result has f as its mean spectrum and the donor's spatial pattern.
WhiteRefImage transfer_spatial(const Spectrum& f, const WhiteRefImage& donor);

/// alpha * w1 + (1 - alpha) * w2, floored at kWhiteEpsilon. alpha outside
/// [0, 1] extrapolates.
WhiteRefImage mix_illuminants(const WhiteRefImage& w1, const WhiteRefImage& w2, double alpha);

struct KMeansResult {
    std::vector<int> assignment;
    std::vector<std::vector<double>> centroids;
    int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Every point ends up assigned to
/// its nearest returned centroid (ties go to the lower cluster id).
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, int max_iterations = 100);

/// Features used for clustering: L1-normalized mean spectrum of each item.
std::vector<std::vector<double>> cluster_features(const IlluminantBank& bank);

/// Copy of the bank with cluster ids in [0, k) from k-means on cluster_features.
IlluminantBank cluster_illuminants(const IlluminantBank& bank, std::size_t k, std::uint64_t seed);

/// Synthetic spatial-variation donor standing in for a white tile imaged in
/// the operating room: the camera light (center-bright separable quadratic
/// vignetting with a wavelength-dependent fall-off, times a smooth base
/// spectrum) plus a localized stray-light spot with its own spectral tint.
struct DonorConfig {
    double falloff_min = 0.10;
    double falloff_max = 0.40;
    /// Vignetting center offset as a fraction of the half extent.
    double center_jitter = 0.8;
    /// Relative change of the fall-off from the first to the last band.
    double spectral_tilt = 0.2;
    /// Peak stray-light intensity relative to the mean camera light, drawn
    /// uniformly from [0, stray_peak_max].
    double stray_peak_max = 2.0;
    /// Gaussian spot radius as a fraction of the image diagonal.
    double stray_radius_min = 0.2;
    double stray_radius_max = 0.6;
    /// Stray spectrum 1 + t * (2x - 1) over normalized wavelength x, t in
    /// [-stray_tint, stray_tint].
    double stray_tint = 0.8;
};

WhiteRefImage make_donor(std::size_t height, std::size_t width, const WavelengthGrid& grid,
                         const DonorConfig& config, Rng& rng);

/// LED-like spectra: a pedestal plus 2-3 Gaussian emission peaks.
struct LedConfig {
    std::size_t min_peaks = 2;
    std::size_t max_peaks = 3;
    double width_min_nm = 20.0;
    double width_max_nm = 80.0;
    double amplitude_min = 0.3;
    double amplitude_max = 1.0;
    double pedestal = 0.08;
};

Spectrum led_spectrum(const WavelengthGrid& grid, const LedConfig& config, Rng& rng);

struct BankConfig {
    std::size_t height = 32;
    std::size_t width = 32;
    WavelengthGrid grid = WavelengthGrid::desk_scale();
    std::size_t n_sim = 100;
    std::size_t n_mix = 100;
    /// LED measurement surrogates that seed the mixing pool.
    std::size_t n_led_pool = 24;
    bool emit_measured = false;
    std::size_t clusters = 6;
    ParamRanges ranges{};
    double kappa = kDefaultStrayWidening;
    double stray_min = 0.0;
    double stray_max = 1.0;
    double alpha_lo = -0.5;
    double alpha_hi = 1.5;
    /// Generated items must satisfy min(value) >= this * mean(value).
    double min_relative_intensity = 0.05;
    int max_attempts = 1000;
    DonorConfig donor{};
    LedConfig led{};

    void validate() const;
};

/// Builds n_sim halogen simulations (sampled curve moved onto a donor's
/// spatial pattern) and n_mix inter/extrapolations between items of distinct
/// clusters of the LED-surrogate + halogen pool. Every item is scaled so its
/// mean spectrum averages 1, and rounded to float32.
IlluminantBank generate_bank(const BankConfig& config, Rng& rng);

/// Directory of illum_NNNN.hsic files plus a bank.json index.
void write_bank(const IlluminantBank& bank, const std::filesystem::path& dir,
                const nlohmann::json& extra = nlohmann::json::object());
IlluminantBank read_bank(const std::filesystem::path& dir);

}  // namespace spectracal::illum
