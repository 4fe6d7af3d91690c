#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blendforge/camera.hpp"
#include "blendforge/config.hpp"
#include "blendforge/errors.hpp"
#include "blendforge/manifest.hpp"
#include "blendforge/pipeline.hpp"
#include "blendforge/quality.hpp"
#include "blendforge/sampler.hpp"
#include "blendforge/scene.hpp"
#include "blendforge/stats.hpp"
#include "blendforge/util.hpp"
#include "blendforge/vlm.hpp"

namespace fs = std::filesystem;
using namespace blendforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitStageFailure = 2;

/// Flags not given on the command line fall back to the config file, so the
/// config is loaded first (pre-scanned from argv) and CLI values override it.
std::string prescan_config_path(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") return argv[i + 1];
    return {};
}

std::unique_ptr<VlmGateway> gateway_from_flags(const std::string& stub, const std::string& endpoint) {
    if (!stub.empty()) return StubVlmGateway::from_json_file(stub);
    if (!endpoint.empty()) return std::make_unique<HttpVlmGateway>(endpoint);
    throw InvalidConfig("need --stub or --endpoint (or the config twin)");
}

void parse_splits_arg(const std::string& arg, std::vector<std::string>& names,
                      std::vector<double>& ratios) {
    names.clear();
    ratios.clear();
    std::istringstream stream(arg);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InvalidConfig("--splits must be name:ratio,...");
        names.push_back(trim(item.substr(0, colon)));
        ratios.push_back(std::stod(item.substr(colon + 1)));
    }
}

struct VlmStageFlags {
    std::string manifest_in, images, manifest_out, prompt_file, stub, endpoint, model;
    int max_in_flight = 8;
    int retries = 2;
    double backoff_base_s = 1.0;
};

void add_vlm_flags(CLI::App* cmd, VlmStageFlags& f, const PipelineOptions& defaults, bool caption) {
    f.stub = caption ? defaults.caption_stub_path : defaults.filter_stub_path;
    f.endpoint = defaults.vlm_endpoint;
    f.prompt_file = caption ? defaults.caption_prompt_file : defaults.filter_prompt_file;
    f.model = defaults.model_name;
    f.max_in_flight = defaults.max_in_flight;
    f.retries = defaults.retry.semantic_retries;
    f.backoff_base_s = defaults.retry.backoff_base_s;

    cmd->add_option("--manifest", f.manifest_in, "Input manifest JSONL")->required();
    cmd->add_option("--images", f.images, "Images root directory")->required();
    cmd->add_option("--out", f.manifest_out, "Output manifest JSONL")->required();
    cmd->add_option("--prompt-file", f.prompt_file, "Prompt override file");
    cmd->add_option("--stub", f.stub, "Scripted stub responses (JSON)");
    cmd->add_option("--endpoint", f.endpoint, "OpenAI-compatible endpoint")
        ->envname("BLENDFORGE_VLM_ENDPOINT");
    cmd->add_option("--vlm-endpoint", f.endpoint, "Alias of --endpoint");
    cmd->add_option("--model", f.model, "Model name");
    cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent request cap");
    cmd->add_option("--retries", f.retries, "Retries for unparseable responses");
    cmd->add_option("--backoff-base", f.backoff_base_s, "Transport retry backoff base (s)");
}

int dispatch(int argc, char** argv) {
    CLI::App app{"blendforge: object-centric render dataset curation"};
    app.require_subcommand(1);

    // The config file is pre-scanned from argv so its values can serve as
    // defaults that explicit flags then override; the option itself is
    // registered on every subcommand below just for parsing and help.
    std::string config_path = prescan_config_path(argc, argv);
    PipelineOptions defaults;
    if (!config_path.empty()) defaults = load_pipeline_options(ConfigFile::load(config_path));
    std::string config_sink;

    // ----- poses
    auto* poses = app.add_subcommand("poses", "Generate camera poses");
    struct {
        std::string scene, out, baseline, spatial = "uniform";
        int grid_n = 4, count = 0, width = 0, height = 0;
        std::uint64_t seed = 0;
        double fov_y_deg = 0, fill = 0, min_diag = 0;
        std::vector<double> azimuths_deg, elevations_deg;
    } p;
    poses->add_option("--scene", p.scene, "Scene JSON file")->required();
    poses->add_option("--out", p.out, "Output poses JSONL")->required();
    poses->add_option("--baseline", p.baseline, "random_view | anchor_sweep");
    poses->add_option("--spatial", p.spatial, "uniform | grid");
    poses->add_option("--grid-n", p.grid_n, "Grid cells per axis");
    poses->add_option("--count", p.count, "Baseline pose count");
    poses->add_option("--seed", p.seed, "Baseline RNG seed");
    poses->add_option("--fov-y-deg", p.fov_y_deg, "Vertical field of view (deg)");
    poses->add_option("--fill-fraction", p.fill, "Target vertical fill fraction");
    poses->add_option("--width", p.width, "Image width");
    poses->add_option("--height", p.height, "Image height");
    poses->add_option("--azimuths-deg", p.azimuths_deg, "Azimuth set (deg)");
    poses->add_option("--elevations-deg", p.elevations_deg, "Elevation set (deg)");
    poses->add_option("--min-bbox-diagonal", p.min_diag, "Skip objects below this diagonal");

    poses->callback([&] {
        const Scene scene = load_scene(p.scene);
        CameraConfig camera = defaults.camera;
        if (poses->count("--fov-y-deg")) camera.fov_y = deg_to_rad(p.fov_y_deg);
        if (poses->count("--fill-fraction")) camera.fill_fraction = p.fill;
        if (poses->count("--width")) camera.width = p.width;
        if (poses->count("--height")) camera.height = p.height;
        if (poses->count("--min-bbox-diagonal")) camera.min_bbox_diagonal = p.min_diag;
        if (poses->count("--azimuths-deg")) {
            camera.azimuths.clear();
            for (double a : p.azimuths_deg) camera.azimuths.push_back(deg_to_rad(a));
        }
        if (poses->count("--elevations-deg")) {
            camera.elevations.clear();
            for (double e : p.elevations_deg) camera.elevations.push_back(deg_to_rad(e));
        }

        PoseGenerationResult result;
        if (!p.baseline.empty()) {
            BaselineConfig baseline;
            if (p.baseline == "random_view")
                baseline.method = BaselineMethod::RandomView;
            else if (p.baseline == "anchor_sweep")
                baseline.method = BaselineMethod::AnchorSweep;
            else
                throw InvalidConfig("--baseline must be random_view or anchor_sweep");
            if (p.spatial == "uniform")
                baseline.spatial = SpatialSampling::Uniform;
            else if (p.spatial == "grid")
                baseline.spatial = SpatialSampling::Grid;
            else
                throw InvalidConfig("--spatial must be uniform or grid");
            baseline.grid_n = p.grid_n;
            baseline.count = p.count;
            baseline.seed = p.seed;
            baseline.fov_y = camera.fov_y;
            baseline.width = camera.width;
            baseline.height = camera.height;
            result = generate_baseline_poses(scene, baseline);
        } else {
            result = generate_object_poses(scene, camera);
        }
        write_poses_jsonl(result.poses, p.out);
        for (const auto& skip : result.skipped) std::cerr << "skip: " << skip << "\n";
        std::cout << result.poses.size() << " poses -> " << p.out << "\n";
    });

    // ----- render
    auto* render = app.add_subcommand("render", "Render poses to RGB + segmentation PNGs");
    struct {
        std::string scene, poses, out_dir, manifest;
        int jobs = 0;
    } r;
    render->add_option("--scene", r.scene, "Scene JSON file")->required();
    render->add_option("--poses", r.poses, "Poses JSONL")->required();
    render->add_option("--out-dir", r.out_dir, "Output image directory")->required();
    render->add_option("--manifest", r.manifest, "Manifest output (default <out-dir>/manifest.jsonl)");
    render->add_option("--jobs", r.jobs, "Worker threads");
    render->callback([&] {
        const Scene scene = load_scene(r.scene);
        const auto poses_list = read_poses_jsonl(r.poses);
        const auto records = render_stage(scene, poses_list, r.out_dir, r.jobs);
        const std::string manifest_path =
            r.manifest.empty() ? (fs::path(r.out_dir) / "manifest.jsonl").string() : r.manifest;
        write_manifest(records, manifest_path);
        std::cout << records.size() << " images -> " << r.out_dir << "\n";
    });

    // ----- filter-heuristic
    auto* heuristic = app.add_subcommand("filter-heuristic", "First-pass heuristic filters");
    struct {
        std::string images, segmaps, manifest_in, manifest_out;
        double min_brightness, min_variance, max_dark_fraction, black_level;
        int jobs = 0;
    } fh;
    fh.min_brightness = defaults.heuristics.min_brightness;
    fh.min_variance = defaults.heuristics.min_variance;
    fh.max_dark_fraction = defaults.heuristics.max_dark_fraction;
    fh.black_level = defaults.heuristics.black_level;
    heuristic->add_option("--images", fh.images, "Images root")->required();
    heuristic->add_option("--segmaps", fh.segmaps, "Segmentation root (default: --images)");
    heuristic->add_option("--manifest", fh.manifest_in, "Input manifest")->required();
    heuristic->add_option("--out", fh.manifest_out, "Output manifest")->required();
    heuristic->add_option("--min-brightness", fh.min_brightness, "Minimum grayscale mean");
    heuristic->add_option("--min-variance", fh.min_variance, "Minimum grayscale variance");
    heuristic->add_option("--max-dark-fraction", fh.max_dark_fraction, "Maximum near-black fraction");
    heuristic->add_option("--black-level", fh.black_level, "Near-black gray level (inclusive)");
    heuristic->add_option("--jobs", fh.jobs, "Worker threads");
    heuristic->callback([&] {
        auto records = read_manifest(fh.manifest_in);
        const HeuristicThresholds thresholds{fh.min_brightness, fh.min_variance,
                                             fh.max_dark_fraction, fh.black_level};
        heuristic_stage(records, fh.images, thresholds, fh.jobs, fh.segmaps);
        write_manifest(records, fh.manifest_out);
        size_t passed = 0;
        for (const auto& record : records)
            if (record.heuristic.passed()) ++passed;
        std::cout << passed << "/" << records.size() << " passed -> " << fh.manifest_out << "\n";
    });

    // ----- filter-vlm / caption
    auto* filter_vlm = app.add_subcommand("filter-vlm", "VLM captionability filter");
    VlmStageFlags fv;
    add_vlm_flags(filter_vlm, fv, defaults, false);
    filter_vlm->callback([&] {
        auto records = read_manifest(fv.manifest_in);
        const auto gateway = gateway_from_flags(fv.stub, fv.endpoint);
        RetryPolicy policy = defaults.retry;
        policy.semantic_retries = fv.retries;
        policy.backoff_base_s = fv.backoff_base_s;
        const std::string prompt =
            fv.prompt_file.empty() ? default_filter_prompt() : read_text_file(fv.prompt_file);
        vlm_filter_stage(records, fv.images, *gateway, prompt, policy, fv.max_in_flight, fv.model);
        write_manifest(records, fv.manifest_out);
        size_t passed = 0;
        for (const auto& record : records)
            if (record.vlm.passed()) ++passed;
        std::cout << passed << "/" << records.size() << " passed -> " << fv.manifest_out << "\n";
    });

    auto* caption = app.add_subcommand("caption", "Caption VLM-passed images");
    VlmStageFlags fc;
    add_vlm_flags(caption, fc, defaults, true);
    caption->callback([&] {
        auto records = read_manifest(fc.manifest_in);
        const auto gateway = gateway_from_flags(fc.stub, fc.endpoint);
        RetryPolicy policy = defaults.retry;
        policy.semantic_retries = fc.retries;
        policy.backoff_base_s = fc.backoff_base_s;
        const std::string prompt =
            fc.prompt_file.empty() ? default_caption_prompt() : read_text_file(fc.prompt_file);
        caption_stage(records, fc.images, *gateway, prompt, policy, fc.max_in_flight, fc.model);
        write_manifest(records, fc.manifest_out);
        size_t captioned = 0;
        for (const auto& record : records)
            if (record.caption) ++captioned;
        std::cout << captioned << " captions -> " << fc.manifest_out << "\n";
    });

    // ----- score
    auto* score = app.add_subcommand("score", "Attach clip/aesthetic scores");
    struct {
        std::string manifest_in, image_emb, text_emb, aesthetic, manifest_out;
        double clip_scale;
    } sc;
    sc.clip_scale = defaults.clip_scale;
    score->add_option("--manifest", sc.manifest_in, "Input manifest")->required();
    score->add_option("--image-emb", sc.image_emb, "Image embedding prefix")->required();
    score->add_option("--text-emb", sc.text_emb, "Text embedding prefix")->required();
    score->add_option("--aesthetic", sc.aesthetic, "Aesthetic sidecar JSONL")->required();
    score->add_option("--out", sc.manifest_out, "Output manifest")->required();
    score->add_option("--clip-scale", sc.clip_scale, "Clip score multiplier");
    score->callback([&] {
        auto records = read_manifest(sc.manifest_in);
        score_stage(records, read_embedding_file(sc.image_emb), read_embedding_file(sc.text_emb),
                    read_aesthetic_sidecar(sc.aesthetic), sc.clip_scale);
        write_manifest(records, sc.manifest_out);
        std::cout << "scores -> " << sc.manifest_out << "\n";
    });

    // ----- filter-quality
    auto* quality = app.add_subcommand("filter-quality", "Threshold clip/aesthetic scores");
    struct {
        std::string manifest_in, manifest_out;
        double min_clip, min_aesthetic;
    } fq;
    fq.min_clip = defaults.quality.min_clip;
    fq.min_aesthetic = defaults.quality.min_aesthetic;
    quality->add_option("--manifest", fq.manifest_in, "Input manifest")->required();
    quality->add_option("--out", fq.manifest_out, "Output manifest")->required();
    quality->add_option("--min-clip", fq.min_clip, "Minimum clip score");
    quality->add_option("--min-aesthetic", fq.min_aesthetic, "Minimum aesthetic score");
    quality->callback([&] {
        auto records = read_manifest(fq.manifest_in);
        quality_stage(records, QualityThresholds{fq.min_clip, fq.min_aesthetic});
        write_manifest(records, fq.manifest_out);
        size_t passed = 0;
        for (const auto& record : records)
            if (record.quality.passed()) ++passed;
        std::cout << passed << "/" << records.size() << " passed -> " << fq.manifest_out << "\n";
    });

    // ----- sample
    auto* sample = app.add_subcommand("sample", "Diversity-aware split selection");
    struct {
        std::string manifest_in, emb, splits = "train:0.6,val:0.2,test:0.2", out_dir, manifest_out;
        size_t total = 0;
    } sm;
    sample->add_option("--manifest", sm.manifest_in, "Input manifest")->required();
    sample->add_option("--emb", sm.emb, "Image embedding prefix")->required();
    sample->add_option("--splits", sm.splits, "name:ratio,... (ratios sum to 1)");
    sample->add_option("--total", sm.total, "Total images to select")->required();
    sample->add_option("--out-dir", sm.out_dir, "Split manifest directory")->required();
    sample->add_option("--out", sm.manifest_out, "Updated full manifest (optional)");
    sample->callback([&] {
        auto records = read_manifest(sm.manifest_in);
        std::vector<std::string> names;
        std::vector<double> ratios;
        parse_splits_arg(sm.splits, names, ratios);
        const SplitPlan plan = SplitPlan::make(names, ratios, sm.total);
        const SplitAssignment assignment =
            sample_stage(records, read_embedding_file(sm.emb), plan);
        fs::create_directories(sm.out_dir);
        std::unordered_map<std::string, const ManifestRecord*> by_id;
        for (const auto& record : records) by_id[record.image_id] = &record;
        for (size_t s = 0; s < assignment.names.size(); ++s) {
            std::vector<ManifestRecord> split_records;
            for (const auto& id : assignment.ids[s]) split_records.push_back(*by_id.at(id));
            write_manifest(split_records,
                           (fs::path(sm.out_dir) / ("split_" + assignment.names[s] + ".jsonl"))
                               .string());
        }
        if (!sm.manifest_out.empty()) write_manifest(records, sm.manifest_out);
        std::cout << "splits -> " << sm.out_dir << "\n";
    });

    // ----- stats
    auto* stats_cmd = app.add_subcommand("stats", "Scene-wise funnel statistics");
    struct {
        std::string manifest_in, json_out;
    } st;
    stats_cmd->add_option("--manifest", st.manifest_in, "Input manifest")->required();
    stats_cmd->add_option("--json", st.json_out, "Machine-readable output file");
    stats_cmd->callback([&] {
        const auto records = read_manifest(st.manifest_in);
        const auto stats = scene_stats(records);
        std::cout << render_stats_table(stats);
        if (!st.json_out.empty()) write_text_file(st.json_out, stats_to_json(stats));
    });

    // ----- ablate
    auto* ablate = app.add_subcommand("ablate", "Compare camera placement strategies");
    struct {
        std::vector<std::string> manifests;
        std::string json_out;
    } ab;
    ablate->add_option("--manifest", ab.manifests, "Per-method manifest (repeatable)")
        ->required()
        ->expected(-1);
    ablate->add_option("--json", ab.json_out, "Machine-readable output file");
    ablate->callback([&] {
        std::vector<std::vector<ManifestRecord>> manifests;
        for (const auto& path : ab.manifests) manifests.push_back(read_manifest(path));
        const AblationReport report = ablation_report(manifests);
        std::cout << render_ablation_table(report);
        if (!ab.json_out.empty()) write_text_file(ab.json_out, ablation_to_json(report));
    });

    // ----- run
    auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
    struct {
        std::string scene, out_dir;
        int jobs = -1;
    } rn;
    run->add_option("--scene", rn.scene, "Scene override");
    run->add_option("--out-dir", rn.out_dir, "Output directory override");
    run->add_option("--jobs", rn.jobs, "Worker threads");
    run->callback([&] {
        PipelineOptions options = defaults;
        if (!rn.scene.empty()) options.scene_path = rn.scene;
        if (!rn.out_dir.empty()) options.out_dir = rn.out_dir;
        if (rn.jobs >= 0) options.jobs = rn.jobs;
        const auto records = run_pipeline(options);
        std::cout << render_stats_table(scene_stats(records));
    });

    for (auto* cmd : app.get_subcommands([](const CLI::App*) { return true; }))
        cmd->add_option("--config", config_sink, "Pipeline config file (TOML)");

    CLI11_PARSE(app, argc, argv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return kExitStageFailure;
    } catch (const std::exception& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return kExitStageFailure;
    }
}
