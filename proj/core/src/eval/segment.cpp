#include "spectracal/eval/segment.hpp"

#include <cmath>

#include "spectracal/errors.hpp"

namespace spectracal::eval {

LabelMask centroid_segment(const HsiCube& cube, const std::vector<Spectrum>& centroids) {
    if (centroids.empty()) throw ParameterError("centroid_segment needs at least one centroid");
    std::vector<double> norms;
    for (const auto& c : centroids) {
        if (!(c.grid() == cube.grid())) throw DimensionError("centroid grid does not match cube");
        double n2 = 0.0;
        for (double v : c.values()) n2 += v * v;
        if (!(n2 > 0.0)) throw DomainError("centroid spectra must be nonzero");
        norms.push_back(n2);
    }
    LabelMask mask(cube.height(), cube.width(), kBackgroundLabel);
    const std::size_t bands = cube.bands();
    for (std::size_t p = 0; p < cube.pixels(); ++p) {
        const auto px = cube.pixel(p);
        double pn2 = 0.0;
        for (double v : px) pn2 += v * v;
        if (!(pn2 > 0.0)) continue;
        int best = 0;
        double best_cos = -2.0;
        for (std::size_t k = 0; k < centroids.size(); ++k) {
            double dot = 0.0;
            const auto c = centroids[k].values();
            for (std::size_t l = 0; l < bands; ++l) dot += px[l] * c[l];
            const double cs = dot / std::sqrt(pn2 * norms[k]);
            if (cs > best_cos) {
                best_cos = cs;
                best = static_cast<int>(k);
            }
        }
        mask.labels[p] = best;
    }
    return mask;
}

std::vector<Spectrum> class_centroids(std::span<const illum::SceneTruth> scenes) {
    if (scenes.empty()) throw ParameterError("class_centroids needs scenes");
    const std::size_t k = scenes[0].n_classes;
    const auto& grid = scenes[0].cube.grid();
    const std::size_t bands = grid.size();
    std::vector<std::vector<double>> sums(k, std::vector<double>(bands, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (const auto& s : scenes) {
        if (s.n_classes != k || !(s.cube.grid() == grid))
            throw DimensionError("scenes disagree on classes or grid");
        for (std::size_t p = 0; p < s.cube.pixels(); ++p) {
            const auto c = static_cast<std::size_t>(s.labels.labels[p]);
            const auto px = s.cube.pixel(p);
            for (std::size_t l = 0; l < bands; ++l) sums[c][l] += px[l];
            ++counts[c];
        }
    }
    std::vector<Spectrum> out;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw DomainError("class " + std::to_string(c) + " never appears");
        for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
        out.emplace_back(std::move(sums[c]), grid);
    }
    return out;
}

}  // namespace spectracal::eval
