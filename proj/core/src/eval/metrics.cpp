#include "spectracal/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "spectracal/errors.hpp"

namespace spectracal::eval {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("cosine_similarity: length mismatch");
    double dot = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    if (!(aa > 0.0) || !(bb > 0.0)) throw DomainError("cosine_similarity of a zero vector");
    return std::clamp(dot / std::sqrt(aa * bb), -1.0, 1.0);
}

double cosine_similarity(const Spectrum& a, const Spectrum& b) {
    return cosine_similarity(a.values(), b.values());
}

double mean_pixel_cosine(const HsiCube& a, const HsiCube& b) {
    if (!a.congruent(b)) throw DimensionError("mean_pixel_cosine: shapes differ");
    double sum = 0.0;
    for (std::size_t p = 0; p < a.pixels(); ++p) sum += cosine_similarity(a.pixel(p), b.pixel(p));
    return sum / static_cast<double>(a.pixels());
}

namespace {

void require_same_dims(const LabelMask& a, const LabelMask& b) {
    if (a.height != b.height || a.width != b.width) throw DimensionError("mask dimensions differ");
}

}  // namespace

double dsc(const LabelMask& pred, const LabelMask& ref, int class_id) {
    require_same_dims(pred, ref);
    std::size_t inter = 0;
    std::size_t na = 0;
    std::size_t nb = 0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const bool a = pred.labels[k] == class_id;
        const bool b = ref.labels[k] == class_id;
        na += a;
        nb += b;
        inter += a && b;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

std::vector<std::size_t> class_boundary(const LabelMask& mask, int class_id) {
    std::vector<std::size_t> out;
    const std::size_t h = mask.height;
    const std::size_t w = mask.width;
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            if (mask.at(i, j) != class_id) continue;
            const bool edge = i == 0 || j == 0 || i + 1 == h || j + 1 == w ||
                              mask.at(i - 1, j) != class_id || mask.at(i + 1, j) != class_id ||
                              mask.at(i, j - 1) != class_id || mask.at(i, j + 1) != class_id;
            if (edge) out.push_back(i * w + j);
        }
    }
    return out;
}

namespace {

// Counts points of `from` whose nearest point of `to` lies within tau.
// `to_map` marks boundary pixels of the other mask; the search stays inside
// the (2r+1)^2 window around each point.
std::size_t within_tolerance(const std::vector<std::size_t>& from, const std::vector<bool>& to_map,
                             std::size_t h, std::size_t w, double tau) {
    const auto r = static_cast<std::ptrdiff_t>(std::floor(tau));
    const double tau2 = tau * tau;
    std::size_t hits = 0;
    for (std::size_t p : from) {
        const auto pi = static_cast<std::ptrdiff_t>(p / w);
        const auto pj = static_cast<std::ptrdiff_t>(p % w);
        bool found = false;
        for (std::ptrdiff_t di = -r; di <= r && !found; ++di) {
            const std::ptrdiff_t i = pi + di;
            if (i < 0 || i >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::ptrdiff_t dj = -r; dj <= r; ++dj) {
                const std::ptrdiff_t j = pj + dj;
                if (j < 0 || j >= static_cast<std::ptrdiff_t>(w)) continue;
                if (static_cast<double>(di * di + dj * dj) > tau2) continue;
                if (to_map[static_cast<std::size_t>(i) * w + static_cast<std::size_t>(j)]) {
                    found = true;
                    break;
                }
            }
        }
        hits += found;
    }
    return hits;
}

}  // namespace

double nsd(const LabelMask& pred, const LabelMask& ref, int class_id, double tau) {
    require_same_dims(pred, ref);
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ParameterError("nsd tolerance must be >= 0");
    const auto bp = class_boundary(pred, class_id);
    const auto br = class_boundary(ref, class_id);
    if (bp.empty() && br.empty()) return 1.0;
    if (bp.empty() || br.empty()) return 0.0;
    std::vector<bool> map_p(pred.size(), false);
    std::vector<bool> map_r(ref.size(), false);
    for (auto p : bp) map_p[p] = true;
    for (auto p : br) map_r[p] = true;
    const std::size_t hits = within_tolerance(bp, map_r, pred.height, pred.width, tau) +
                             within_tolerance(br, map_p, pred.height, pred.width, tau);
    return static_cast<double>(hits) / static_cast<double>(bp.size() + br.size());
}

double mae(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("mae: length mismatch");
    if (x.empty()) throw DimensionError("mae of empty maps");
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += std::abs(x[k] - y[k]);
    return s / static_cast<double>(x.size());
}

double mae(std::span<const double> x, std::span<const double> y, const LabelMask& mask,
           int class_id) {
    if (x.size() != y.size() || x.size() != mask.size()) throw DimensionError("mae: length mismatch");
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (mask.labels[k] != class_id) continue;
        s += std::abs(x[k] - y[k]);
        ++n;
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

}  // namespace spectracal::eval
