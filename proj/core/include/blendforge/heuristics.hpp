#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blendforge/image.hpp"

namespace blendforge {

struct HeuristicThresholds {
    double min_brightness = 30.0;    // grayscale units [0, 255]
    double min_variance = 300.0;     // grayscale^2
    double max_dark_fraction = 0.3;  // fraction of near-black pixels
    double black_level = 5.0;        // gray <= black_level counts as dark (inclusive)
};

struct ImageStatistics {
    double mean = 0.0;
    double variance = 0.0;  // population variance
    double dark_fraction = 0.0;
};

enum class RejectReason { ZeroFill, Brightness, Variance, DarkFraction };

std::string reject_reason_name(RejectReason r);

struct FilterDecision {
    bool passed = false;
    std::vector<RejectReason> reasons;  // empty iff passed; every violation listed
    double fill = 0.0;                  // -1 when no segmap was given
    ImageStatistics stats;
};

/// Grayscale statistics over the stored (gamma-encoded) 8-bit values:
/// gray = 0.299 R + 0.587 G + 0.114 B, kept real-valued. Mean and population
/// variance over all pixels; dark_fraction counts gray <= black_level.
ImageStatistics image_statistics(const RgbImage& image, double black_level);

/// Fraction of segmentation pixels carrying object_id.
double object_fill_fraction(const SegMap& segmap, int object_id);

/// Threshold comparison on precomputed statistics. Rejections are gathered,
/// not short-circuited: zero_fill (fill == 0; skipped when fill < 0),
/// brightness (mean < min), variance (variance < min), dark_fraction
/// (fraction > max). Boundary values pass: mean == min_brightness and
/// dark_fraction == max_dark_fraction are keeps.
FilterDecision decide_from_stats(const ImageStatistics& stats, double fill,
                                 const HeuristicThresholds& t);

/// Composite first-pass filter over an image (and optionally the segmentation
/// map of the targeted object; the fill check is skipped when absent).
FilterDecision heuristic_decide(const RgbImage& image, const SegMap* segmap,
                                std::optional<int> object_id, const HeuristicThresholds& t);

}  // namespace blendforge
