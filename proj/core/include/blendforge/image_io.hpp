#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blendforge/image.hpp"

namespace blendforge {

// PNG codecs. RGB images are 8-bit color, segmentation maps 16-bit grayscale.
// Encoding uses a fixed zlib level so identical inputs give identical files.

void write_rgb_png(const RgbImage& image, const std::string& path);
RgbImage read_rgb_png(const std::string& path);

void write_seg_png(const SegMap& seg, const std::string& path);
SegMap read_seg_png(const std::string& path);

/// In-memory PNG encode of an RGB image (for HTTP payloads).
std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image);

}  // namespace blendforge
