#include "spectracal/labels.hpp"

#include "spectracal/errors.hpp"

namespace spectracal {

LabelMask::LabelMask(std::size_t h, std::size_t w, std::vector<int> values)
    : height(h), width(w), labels(std::move(values)) {
    if (labels.size() != h * w) throw DimensionError("label count does not match mask dimensions");
}

}  // namespace spectracal
