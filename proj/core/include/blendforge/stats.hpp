#pragma once

#include <string>
#include <vector>

#include "blendforge/manifest.hpp"

namespace blendforge {

struct SceneStats {
    std::string scene;
    size_t total = 0;
    size_t heuristic_passed = 0;
    size_t vlm_passed = 0;
    double heuristic_pct = 0.0;
    double vlm_pct = 0.0;
    // Mean and population std of the scores over vlm-passed records that
    // carry them.
    size_t scored = 0;
    double clip_mean = 0.0;
    double clip_std = 0.0;
    double aesthetic_mean = 0.0;
    double aesthetic_std = 0.0;
    // Records that errored at any stage; excluded from the funnel counts
    // above and reported on their own.
    size_t errors = 0;
};

/// Per-scene funnel counts and score statistics, scenes in first-appearance
/// order.
std::vector<SceneStats> scene_stats(const std::vector<ManifestRecord>& records);

/// Aligned text table: Scene | Total | Heuristic Passed | VLM Passed |
/// CLIP Score | Aesthetic.
std::string render_stats_table(const std::vector<SceneStats>& stats);

std::string stats_to_json(const std::vector<SceneStats>& stats);

struct AblationRow {
    std::string method;
    std::string spatial;  // empty for object_centric
    size_t total = 0;
    size_t heuristic_passed = 0;
    size_t vlm_passed = 0;
    double heuristic_pct = 0.0;
    double vlm_pct = 0.0;
    bool best_heuristic = false;
    bool best_vlm = false;
};

struct AblationReport {
    std::string scene;
    std::vector<AblationRow> rows;
};

/// Compares camera-placement strategies over one scene. Each manifest must
/// hold records of a single (method, spatial) pair; all manifests must share
/// the scene and provide at least two distinct methods. The highest value per
/// percentage column is flagged; ties flag every holder.
AblationReport ablation_report(const std::vector<std::vector<ManifestRecord>>& manifests);

/// Text rendering: an object-centric row followed by a methods x
/// {Uniform, Grid} block, best values marked with '*'.
std::string render_ablation_table(const AblationReport& report);

std::string ablation_to_json(const AblationReport& report);

}  // namespace blendforge
