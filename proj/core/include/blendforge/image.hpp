#pragma once

#include <cstdint>
#include <vector>

namespace blendforge {

/// 8-bit RGB image, row-major, 3 bytes per pixel.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size = width * height * 3

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0) {}

    std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<size_t>(y) * width + x) * 3; }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }

    bool empty() const { return width <= 0 || height <= 0 || pixels.empty(); }
};

/// Per-pixel object ids, row-major; 0 is background.
struct SegMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> ids;  // size = width * height

    SegMap() = default;
    SegMap(int w, int h) : width(w), height(h), ids(static_cast<size_t>(w) * h, 0) {}

    std::uint16_t& at(int x, int y) { return ids[static_cast<size_t>(y) * width + x]; }
    std::uint16_t at(int x, int y) const { return ids[static_cast<size_t>(y) * width + x]; }
};

}  // namespace blendforge
