#include "blendforge/heuristics.hpp"

#include "blendforge/errors.hpp"

namespace blendforge {

std::string reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::ZeroFill: return "zero_fill";
        case RejectReason::Brightness: return "brightness";
        case RejectReason::Variance: return "variance";
        case RejectReason::DarkFraction: return "dark_fraction";
    }
    return "unknown";
}

ImageStatistics image_statistics(const RgbImage& image, double black_level) {
    if (image.empty()) throw EmptyImage("image_statistics: empty image");
    const size_t n = static_cast<size_t>(image.width) * image.height;
    double sum = 0.0;
    double sum_sq = 0.0;
    size_t dark = 0;
    for (size_t i = 0; i < n; ++i) {
        const std::uint8_t* px = image.pixels.data() + i * 3;
        const double gray = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
        sum += gray;
        sum_sq += gray * gray;
        if (gray <= black_level) ++dark;
    }
    ImageStatistics s;
    s.mean = sum / static_cast<double>(n);
    s.variance = sum_sq / static_cast<double>(n) - s.mean * s.mean;
    if (s.variance < 0.0) s.variance = 0.0;  // rounding guard for constant images
    s.dark_fraction = static_cast<double>(dark) / static_cast<double>(n);
    return s;
}

double object_fill_fraction(const SegMap& segmap, int object_id) {
    if (object_id <= 0) throw InvalidConfig("object_fill_fraction: object_id must be > 0");
    if (segmap.ids.empty()) return 0.0;
    size_t count = 0;
    for (std::uint16_t id : segmap.ids)
        if (id == object_id) ++count;
    return static_cast<double>(count) / static_cast<double>(segmap.ids.size());
}

FilterDecision decide_from_stats(const ImageStatistics& stats, double fill,
                                 const HeuristicThresholds& t) {
    FilterDecision d;
    d.stats = stats;
    d.fill = fill;
    if (fill == 0.0) d.reasons.push_back(RejectReason::ZeroFill);
    if (stats.mean < t.min_brightness) d.reasons.push_back(RejectReason::Brightness);
    if (stats.variance < t.min_variance) d.reasons.push_back(RejectReason::Variance);
    if (stats.dark_fraction > t.max_dark_fraction) d.reasons.push_back(RejectReason::DarkFraction);
    d.passed = d.reasons.empty();
    return d;
}

FilterDecision heuristic_decide(const RgbImage& image, const SegMap* segmap,
                                std::optional<int> object_id, const HeuristicThresholds& t) {
    if (static_cast<bool>(segmap) != object_id.has_value())
        throw InvalidConfig("heuristic_decide: segmap and object_id must be given together");

    const ImageStatistics stats = image_statistics(image, t.black_level);
    const double fill = segmap ? object_fill_fraction(*segmap, *object_id) : -1.0;
    return decide_from_stats(stats, fill, t);
}

}  // namespace blendforge
