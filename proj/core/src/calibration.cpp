#include "spectracal/calibration.hpp"

#include <cmath>

#include "spectracal/errors.hpp"

namespace spectracal {

namespace {

void require_congruent(const HsiCube& a, const HsiCube& b, const char* op) {
    if (!a.congruent(b))
        throw DimensionError(std::string(op) + ": cube shapes or wavelength grids differ");
}

}  // namespace

HsiCube calibrate(const HsiCube& raw, const WhiteRefImage& white) {
    require_congruent(raw, white.cube(), "calibrate");
    const auto r = raw.values();
    const auto w = white.cube().values();
    std::vector<double> out(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) out[k] = r[k] / w[k];
    return HsiCube(raw.height(), raw.width(), raw.grid(), std::move(out));
}

HsiCube simulate_raw(const HsiCube& calibrated, const WhiteRefImage& white) {
    require_congruent(calibrated, white.cube(), "simulate_raw");
    const auto c = calibrated.values();
    const auto w = white.cube().values();
    std::vector<double> out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k] * w[k];
    return HsiCube(calibrated.height(), calibrated.width(), calibrated.grid(), std::move(out));
}

Spectrum mean_spectrum(const HsiCube& cube) {
    const std::size_t bands = cube.bands();
    std::vector<double> sum(bands, 0.0);
    for (std::size_t p = 0; p < cube.pixels(); ++p) {
        const auto px = cube.pixel(p);
        for (std::size_t l = 0; l < bands; ++l) sum[l] += px[l];
    }
    const double n = static_cast<double>(cube.pixels());
    for (double& v : sum) v /= n;
    return Spectrum(std::move(sum), cube.grid());
}

Spectrum l1_normalize(const Spectrum& s) {
    double norm = 0.0;
    for (double v : s.values()) norm += std::abs(v);
    if (!(norm > 0.0)) throw DomainError("cannot L1-normalize a zero spectrum");
    std::vector<double> out(s.values().begin(), s.values().end());
    for (double& v : out) v /= norm;
    return Spectrum(std::move(out), s.grid());
}

HsiCube quantize_to_float(const HsiCube& cube) {
    std::vector<double> out(cube.values().begin(), cube.values().end());
    for (double& v : out) v = static_cast<double>(static_cast<float>(v));
    return HsiCube(cube.height(), cube.width(), cube.grid(), std::move(out));
}

}  // namespace spectracal
