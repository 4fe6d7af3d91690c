#pragma once

#include <optional>
#include <string>
#include <vector>

namespace blendforge {

enum class StageStatus { Pending, Passed, Rejected, Error };

std::string stage_status_name(StageStatus s);
StageStatus stage_status_from_name(const std::string& name);

struct StageResult {
    StageStatus status = StageStatus::Pending;
    std::vector<std::string> reasons;  // rejection reasons; empty otherwise
    std::string note;                  // verdict reason / error message

    bool pending() const { return status == StageStatus::Pending; }
    bool passed() const { return status == StageStatus::Passed; }
};

struct HeuristicStats {
    double fill = -1.0;  // -1 when no segmentation check applied
    double mean = 0.0;
    double variance = 0.0;
    double dark_fraction = 0.0;
};

/// One pipeline record per rendered image. Stage statuses run
/// heuristic -> vlm -> caption -> quality; a rejection at one stage leaves
/// all later stages pending, and error records are excluded downstream.
struct ManifestRecord {
    std::string image_id;
    std::string scene;
    std::optional<int> object_id;
    std::string method;  // "object_centric" | "random_view" | "anchor_sweep"
    std::optional<std::string> spatial;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double distance = 0.0;
    std::string rgb_path;  // relative to the manifest's directory
    std::optional<std::string> seg_path;

    StageResult heuristic;
    StageResult vlm;
    StageResult caption_stage;
    StageResult quality;

    std::optional<HeuristicStats> heuristic_stats;
    std::optional<std::string> caption;
    std::optional<int> caption_word_count;
    std::optional<bool> caption_length_warning;
    std::optional<double> clip_score;
    std::optional<double> aesthetic_score;
    std::optional<std::string> split;
};

/// JSONL with a stable key order, so identical records give identical bytes.
void write_manifest(const std::vector<ManifestRecord>& records, const std::string& path);
std::vector<ManifestRecord> read_manifest(const std::string& path);

std::string manifest_record_to_json(const ManifestRecord& record);

/// Checks the funnel invariants of a single record: a rejection leaves later
/// stages pending, captions require a passed vlm stage, splits require a
/// passed quality stage. Throws ValidationError on violation.
void validate_funnel(const ManifestRecord& record);

}  // namespace blendforge
