#pragma once

#include <cstddef>
#include <vector>

namespace ags {

// Row-major H x W x RGB float buffer, components in [0, 1].
struct Image {
    int width = 0, height = 0;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h) : width(w), height(h), data(std::size_t(w) * h * 3, 0.0f) {}

    float& at(int x, int y, int c) {
        return data[(std::size_t(y) * width + x) * 3 + c];
    }
    float at(int x, int y, int c) const {
        return data[(std::size_t(y) * width + x) * 3 + c];
    }
    std::size_t pixel_count() const { return std::size_t(width) * height; }
};

}  // namespace ags
