#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blendforge/camera.hpp"
#include "blendforge/config.hpp"
#include "blendforge/heuristics.hpp"
#include "blendforge/manifest.hpp"
#include "blendforge/quality.hpp"
#include "blendforge/sampler.hpp"
#include "blendforge/scene.hpp"
#include "blendforge/vlm.hpp"

namespace blendforge {

/// Image ids follow <scene>/<object_id>/<view_index> for object-centric poses
/// and <scene>/<method>_<spatial>/<sample_index> for baselines; scene names
/// are sanitized to [A-Za-z0-9_-]. Ids double as image paths (id + ".png").
std::string sanitize_id_component(const std::string& raw);

struct PoseGenerationResult {
    std::vector<std::pair<std::string, CameraPose>> poses;  // (image id, pose)
    std::vector<std::string> skipped;  // human-readable skip log, never silent
};

PoseGenerationResult generate_object_poses(const Scene& scene, const CameraConfig& config);
PoseGenerationResult generate_baseline_poses(const Scene& scene, const BaselineConfig& config);

/// Renders every pose into images_root (id-derived relative paths, rgb +
/// segmentation) and returns the initial manifest, one pending record per
/// pose, ordered by image id. Deterministic for any job count.
std::vector<ManifestRecord> render_stage(const Scene& scene,
                                         const std::vector<std::pair<std::string, CameraPose>>& poses,
                                         const std::string& images_root, int jobs);

/// First-pass heuristics over records whose heuristic stage is pending.
/// Object-centric records check their segmentation fill; baseline records
/// skip the fill check. Missing image files become per-record errors.
/// Segmentation maps resolve against segmaps_root when given, images_root
/// otherwise.
void heuristic_stage(std::vector<ManifestRecord>& records, const std::string& images_root,
                     const HeuristicThresholds& thresholds, int jobs,
                     const std::string& segmaps_root = {});

void vlm_filter_stage(std::vector<ManifestRecord>& records, const std::string& images_root,
                      VlmGateway& gateway, const std::string& prompt, const RetryPolicy& policy,
                      int max_in_flight, const std::string& model_name);

void caption_stage(std::vector<ManifestRecord>& records, const std::string& images_root,
                   VlmGateway& gateway, const std::string& prompt, const RetryPolicy& policy,
                   int max_in_flight, const std::string& model_name);

/// Attaches clip/aesthetic scores to captioned records. A record missing from
/// either embedding file or the aesthetic sidecar becomes a quality-stage
/// error (missing scores are never silent passes).
void score_stage(std::vector<ManifestRecord>& records, const EmbeddingFile& image_emb,
                 const EmbeddingFile& text_emb, const std::map<std::string, double>& aesthetic,
                 double clip_scale = 100.0);

void quality_stage(std::vector<ManifestRecord>& records, const QualityThresholds& thresholds);

/// Farthest-point split assignment over the quality-passed pool (manifest
/// order). Embedding rows are looked up by image id and l2-normalized.
SplitAssignment sample_stage(std::vector<ManifestRecord>& records, const EmbeddingFile& image_emb,
                             const SplitPlan& plan);

/// Deterministic scripted stand-in for the external embedding / aesthetic
/// providers (CLIP, DinoV2, LAION predictor are out of process). Rows are
/// seeded from image ids and captions; scores spread over both sides of the
/// default thresholds. Tests and demos only.
struct StubScores {
    EmbeddingFile image_emb;
    EmbeddingFile text_emb;
    std::map<std::string, double> aesthetic;
};

StubScores make_stub_scores(const std::vector<ManifestRecord>& records, int dim = 16);

// ---------------------------------------------------------------------------
// Full pipeline

struct PipelineOptions {
    std::string scene_path;
    std::string out_dir;
    int jobs = 0;  // 0 = hardware concurrency

    CameraConfig camera = CameraConfig::defaults();
    HeuristicThresholds heuristics;

    // VLM stages: a scripted stub file or an HTTP endpoint (stub wins).
    std::string vlm_endpoint;
    std::string filter_stub_path;
    std::string caption_stub_path;
    std::string filter_prompt_file;   // empty = stock prompt
    std::string caption_prompt_file;  // empty = stock prompt
    std::string model_name = "Qwen3-VL-8B-Instruct";
    int max_in_flight = 8;
    RetryPolicy retry;

    // Score stage: "files" reads the three paths below; "stub" generates
    // deterministic scores into <out_dir>/scores and ingests them.
    std::string score_provider = "files";
    std::string image_emb_prefix;
    std::string text_emb_prefix;
    std::string aesthetic_path;
    int stub_dim = 16;
    double clip_scale = 100.0;

    QualityThresholds quality;

    std::vector<std::string> split_names{"train", "val", "test"};
    std::vector<double> split_ratios{0.6, 0.2, 0.2};
    size_t sample_total = 0;
};

/// Reads PipelineOptions from a config file ([pipeline] + [stage.*] tables;
/// angles in degrees).
PipelineOptions load_pipeline_options(const ConfigFile& config);

/// Runs poses -> render -> filter-heuristic -> filter-vlm -> caption -> score
/// -> filter-quality -> sample, one manifest file per stage under out_dir.
/// A stage whose output manifest already exists is skipped, so an interrupted
/// run resumes from the manifests alone. Returns the final manifest.
std::vector<ManifestRecord> run_pipeline(const PipelineOptions& options);

/// Stage-output naming used by run_pipeline and the resume logic.
std::string stage_manifest_name(const std::string& stage);

}  // namespace blendforge
