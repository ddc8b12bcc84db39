#include "spectracal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectracal/calibration.hpp"
#include "spectracal/errors.hpp"

namespace spectracal::baselines {

Spectrum grayworld(const HsiCube& raw) {
    const Spectrum mean = mean_spectrum(raw);
    return l1_normalize(mean);
}

Spectrum maxrgb(const HsiCube& raw) {
    std::vector<double> peak(raw.bands(), 0.0);
    for (std::size_t p = 0; p < raw.pixels(); ++p) {
        const auto px = raw.pixel(p);
        for (std::size_t l = 0; l < px.size(); ++l) peak[l] = std::max(peak[l], px[l]);
    }
    for (double v : peak) {
        if (!(v > 0.0)) throw DomainError("maxrgb: a band has zero maximum");
    }
    return l1_normalize(Spectrum(std::move(peak), raw.grid()));
}

std::vector<std::size_t> highlight_pixels(const HsiCube& raw, double top_fraction) {
    if (!(top_fraction > 0.0 && top_fraction <= 1.0))
        throw ParameterError("top_fraction must lie in (0, 1]");
    const std::size_t n = raw.pixels();
    std::vector<double> intensity(n);
    for (std::size_t p = 0; p < n; ++p) {
        const auto px = raw.pixel(p);
        intensity[p] = std::accumulate(px.begin(), px.end(), 0.0);
    }
    const auto want = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n)));
    const std::size_t count = std::clamp<std::size_t>(want, 1, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return intensity[a] > intensity[b]; });
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

Spectrum specular_highlight(const HsiCube& raw, double top_fraction) {
    const auto selected = highlight_pixels(raw, top_fraction);
    std::vector<double> mean(raw.bands(), 0.0);
    for (std::size_t p : selected) {
        const auto px = raw.pixel(p);
        for (std::size_t l = 0; l < px.size(); ++l) mean[l] += px[l];
    }
    for (double& v : mean) v /= static_cast<double>(selected.size());
    return l1_normalize(Spectrum(std::move(mean), raw.grid()));
}

HsiCube apply_global(const HsiCube& raw, const Spectrum& illuminant) {
    if (!(illuminant.grid() == raw.grid())) throw DimensionError("apply_global: grids differ");
    for (double v : illuminant.values()) {
        if (!(v > 0.0)) throw DomainError("apply_global: illuminant must be strictly positive");
    }
    const std::size_t bands = raw.bands();
    std::vector<double> out(raw.values().begin(), raw.values().end());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] /= illuminant[k % bands];
    return HsiCube(raw.height(), raw.width(), raw.grid(), std::move(out));
}

}  // namespace spectracal::baselines
