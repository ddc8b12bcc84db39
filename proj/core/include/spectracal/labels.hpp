#pragma once

#include <cstddef>
#include <vector>

namespace spectracal {

/// Label assigned to pixels that cannot be classified (zero spectrum).
inline constexpr int kBackgroundLabel = -1;

/// H x W integer class map, row-major.
struct LabelMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<int> labels;

    LabelMask() = default;
    LabelMask(std::size_t h, std::size_t w, int fill = 0) : height(h), width(w), labels(h * w, fill) {}
    LabelMask(std::size_t h, std::size_t w, std::vector<int> values);

    int at(std::size_t i, std::size_t j) const { return labels[i * width + j]; }
    int& at(std::size_t i, std::size_t j) { return labels[i * width + j]; }
    std::size_t size() const noexcept { return labels.size(); }

    friend bool operator==(const LabelMask&, const LabelMask&) = default;
};

}  // namespace spectracal
