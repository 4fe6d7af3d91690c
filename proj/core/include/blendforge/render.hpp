#pragma once

#include <utility>

#include "blendforge/camera.hpp"
#include "blendforge/image.hpp"
#include "blendforge/scene.hpp"

namespace blendforge {

/// Renders one view with a pinhole camera: nearest-hit ray casting over the
/// scene's sphere/box primitives, direct lighting with hard shadow rays, then
/// gamma 2.2 encoding to 8 bits. The segmentation map holds the nearest-hit
/// object id per pixel (0 = background). Fully deterministic.
///
/// Shading: albedo * (sum of ambient intensities + per-light max(0, n.l) *
/// intensity when unshadowed). Background pixels show the summed ambient
/// term directly. Linear values are clamped to [0,1], encoded with
/// c^(1/2.2), and quantized as floor(255 * c).
std::pair<RgbImage, SegMap> render_view(const Scene& scene, const CameraPose& pose);

}  // namespace blendforge
