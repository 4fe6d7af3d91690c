#include "blendforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "blendforge/errors.hpp"
#include "blendforge/image_io.hpp"
#include "blendforge/render.hpp"
#include "blendforge/rng.hpp"
#include "blendforge/stats.hpp"
#include "blendforge/util.hpp"

namespace blendforge {

namespace fs = std::filesystem;

std::string sanitize_id_component(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "unnamed" : out;
}

PoseGenerationResult generate_object_poses(const Scene& scene, const CameraConfig& config) {
    PoseGenerationResult result;
    const std::string scene_tag = sanitize_id_component(scene.name);

    std::vector<const SceneObject*> objects;
    for (const auto& obj : scene.objects) objects.push_back(&obj);
    std::sort(objects.begin(), objects.end(),
              [](const SceneObject* a, const SceneObject* b) { return a->id < b->id; });

    for (const SceneObject* obj : objects) {
        ObjectPlacement placement;
        try {
            placement = place_object_cameras(*obj, config);
        } catch (const ObjectSkipped& e) {
            result.skipped.push_back(e.what());
            continue;
        }
        for (const auto& view : placement.skipped_views)
            result.skipped.push_back("object " + std::to_string(obj->id) + " view az=" +
                                     std::to_string(rad_to_deg(view.azimuth)) + " el=" +
                                     std::to_string(rad_to_deg(view.elevation)) + ": " +
                                     view.reason);
        for (auto& pose : placement.poses) {
            const auto& prov = std::get<ObjectViewProvenance>(pose.provenance);
            const std::string id = scene_tag + "/" + std::to_string(obj->id) + "/" +
                                   std::to_string(prov.view_index);
            result.poses.emplace_back(id, std::move(pose));
        }
    }
    return result;
}

PoseGenerationResult generate_baseline_poses(const Scene& scene, const BaselineConfig& config) {
    PoseGenerationResult result;
    const std::string scene_tag = sanitize_id_component(scene.name);
    auto poses = sample_baseline_poses(scene.scene_aabb, scene.name, config);
    const std::string method_tag =
        baseline_method_name(config.method) + "_" + spatial_name(config.spatial);
    for (auto& pose : poses) {
        const auto& prov = std::get<BaselineProvenance>(pose.provenance);
        const std::string id =
            scene_tag + "/" + method_tag + "/" + std::to_string(prov.sample_index);
        result.poses.emplace_back(id, std::move(pose));
    }
    return result;
}

namespace {

ManifestRecord make_record(const Scene& scene, const std::string& id, const CameraPose& pose) {
    ManifestRecord r;
    r.image_id = id;
    r.scene = sanitize_id_component(scene.name);
    r.rgb_path = id + ".png";
    if (const auto* ov = std::get_if<ObjectViewProvenance>(&pose.provenance)) {
        r.object_id = ov->object_id;
        r.method = "object_centric";
        r.azimuth_deg = rad_to_deg(ov->azimuth);
        r.elevation_deg = rad_to_deg(ov->elevation);
        r.distance = ov->distance;
        r.seg_path = id + ".seg.png";
    } else {
        const auto& b = std::get<BaselineProvenance>(pose.provenance);
        r.method = b.method;
        r.spatial = b.spatial;
        r.azimuth_deg = rad_to_deg(b.azimuth);
        r.elevation_deg = rad_to_deg(b.elevation);
        r.distance = 0.0;
        r.seg_path = id + ".seg.png";
    }
    return r;
}

}  // namespace

std::vector<ManifestRecord> render_stage(const Scene& scene,
                                         const std::vector<std::pair<std::string, CameraPose>>& poses,
                                         const std::string& images_root, int jobs) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;

    fs::create_directories(images_root);
    for (const auto& [id, pose] : poses)
        fs::create_directories(fs::path(images_root) / fs::path(id).parent_path());

    std::vector<ManifestRecord> records = parallel_map<ManifestRecord>(
        poses.size(), jobs, [&](size_t i) {
            const auto& [id, pose] = poses[i];
            auto [rgb, seg] = render_view(scene, pose);
            ManifestRecord record = make_record(scene, id, pose);
            write_rgb_png(rgb, (fs::path(images_root) / record.rgb_path).string());
            write_seg_png(seg, (fs::path(images_root) / *record.seg_path).string());
            return record;
        });

    std::sort(records.begin(), records.end(),
              [](const ManifestRecord& a, const ManifestRecord& b) {
                  return a.image_id < b.image_id;
              });
    return records;
}

void heuristic_stage(std::vector<ManifestRecord>& records, const std::string& images_root,
                     const HeuristicThresholds& thresholds, int jobs,
                     const std::string& segmaps_root) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
    const std::string seg_root = segmaps_root.empty() ? images_root : segmaps_root;

    std::vector<size_t> pending;
    for (size_t i = 0; i < records.size(); ++i)
        if (records[i].heuristic.pending()) pending.push_back(i);

    parallel_map<int>(pending.size(), jobs, [&](size_t p) {
        ManifestRecord& r = records[pending[p]];
        try {
            const RgbImage image = read_rgb_png((fs::path(images_root) / r.rgb_path).string());
            std::optional<SegMap> seg;
            if (r.object_id && r.seg_path)
                seg = read_seg_png((fs::path(seg_root) / *r.seg_path).string());
            const FilterDecision decision =
                heuristic_decide(image, seg ? &*seg : nullptr,
                                 seg ? r.object_id : std::nullopt, thresholds);
            r.heuristic_stats = HeuristicStats{decision.fill, decision.stats.mean,
                                               decision.stats.variance,
                                               decision.stats.dark_fraction};
            if (decision.passed) {
                r.heuristic.status = StageStatus::Passed;
            } else {
                r.heuristic.status = StageStatus::Rejected;
                for (const auto reason : decision.reasons)
                    r.heuristic.reasons.push_back(reject_reason_name(reason));
            }
        } catch (const Error& e) {
            r.heuristic.status = StageStatus::Error;
            r.heuristic.note = e.what();
        }
        return 0;
    });
}

void vlm_filter_stage(std::vector<ManifestRecord>& records, const std::string& images_root,
                      VlmGateway& gateway, const std::string& prompt, const RetryPolicy& policy,
                      int max_in_flight, const std::string& model_name) {
    std::vector<size_t> pending;
    for (size_t i = 0; i < records.size(); ++i)
        if (records[i].heuristic.passed() && records[i].vlm.pending()) pending.push_back(i);

    parallel_map<int>(pending.size(), std::max(1, max_in_flight), [&](size_t p) {
        ManifestRecord& r = records[pending[p]];
        try {
            const RgbImage image = read_rgb_png((fs::path(images_root) / r.rgb_path).string());
            const Verdict verdict =
                filter_image(gateway, image, prompt, policy, r.image_id, model_name);
            if (verdict.accepted) {
                r.vlm.status = StageStatus::Passed;
                r.vlm.note = verdict.reason;
            } else {
                r.vlm.status = StageStatus::Rejected;
                r.vlm.reasons.push_back(verdict.reason);
            }
        } catch (const Error& e) {
            r.vlm.status = StageStatus::Error;
            r.vlm.note = e.what();
        }
        return 0;
    });
}

void caption_stage(std::vector<ManifestRecord>& records, const std::string& images_root,
                   VlmGateway& gateway, const std::string& prompt, const RetryPolicy& policy,
                   int max_in_flight, const std::string& model_name) {
    std::vector<size_t> pending;
    for (size_t i = 0; i < records.size(); ++i)
        if (records[i].vlm.passed() && records[i].caption_stage.pending()) pending.push_back(i);

    parallel_map<int>(pending.size(), std::max(1, max_in_flight), [&](size_t p) {
        ManifestRecord& r = records[pending[p]];
        try {
            const RgbImage image = read_rgb_png((fs::path(images_root) / r.rgb_path).string());
            const Caption caption =
                caption_image(gateway, image, prompt, policy, r.image_id, model_name);
            r.caption = caption.text;
            r.caption_word_count = caption.word_count;
            if (caption.length_warning) r.caption_length_warning = true;
            r.caption_stage.status = StageStatus::Passed;
        } catch (const Error& e) {
            r.caption_stage.status = StageStatus::Error;
            r.caption_stage.note = e.what();
        }
        return 0;
    });
}

void score_stage(std::vector<ManifestRecord>& records, const EmbeddingFile& image_emb,
                 const EmbeddingFile& text_emb, const std::map<std::string, double>& aesthetic,
                 double clip_scale) {
    std::unordered_map<std::string, size_t> image_index, text_index;
    for (size_t i = 0; i < image_emb.ids.size(); ++i) image_index[image_emb.ids[i]] = i;
    for (size_t i = 0; i < text_emb.ids.size(); ++i) text_index[text_emb.ids[i]] = i;

    for (auto& r : records) {
        if (!r.caption_stage.passed() || r.clip_score) continue;
        const auto img_it = image_index.find(r.image_id);
        const auto txt_it = text_index.find(r.image_id);
        const auto aes_it = aesthetic.find(r.image_id);
        if (img_it == image_index.end() || txt_it == text_index.end() ||
            aes_it == aesthetic.end()) {
            r.quality.status = StageStatus::Error;
            r.quality.note = "missing embedding or aesthetic score";
            continue;
        }
        const auto img_row = image_emb.row(img_it->second);
        const auto txt_row = text_emb.row(txt_it->second);
        const std::vector<double> img(img_row.begin(), img_row.end());
        const std::vector<double> txt(txt_row.begin(), txt_row.end());
        r.clip_score = clip_score(img, txt, clip_scale);
        r.aesthetic_score = aes_it->second;
    }
}

void quality_stage(std::vector<ManifestRecord>& records, const QualityThresholds& thresholds) {
    for (auto& r : records) {
        if (!r.caption_stage.passed() || !r.quality.pending()) continue;
        if (!r.clip_score || !r.aesthetic_score) {
            r.quality.status = StageStatus::Error;
            r.quality.note = "missing embedding or aesthetic score";
            continue;
        }
        const QualityDecision decision =
            quality_decide({r.image_id, *r.clip_score, *r.aesthetic_score}, thresholds);
        if (decision.passed) {
            r.quality.status = StageStatus::Passed;
        } else {
            r.quality.status = StageStatus::Rejected;
            for (const auto reason : decision.reasons)
                r.quality.reasons.push_back(quality_reason_name(reason));
        }
    }
}

SplitAssignment sample_stage(std::vector<ManifestRecord>& records, const EmbeddingFile& image_emb,
                             const SplitPlan& plan) {
    std::unordered_map<std::string, size_t> image_index;
    for (size_t i = 0; i < image_emb.ids.size(); ++i) image_index[image_emb.ids[i]] = i;

    std::vector<std::string> pool_ids;
    std::vector<double> rows;
    std::vector<size_t> pool_records;
    for (size_t i = 0; i < records.size(); ++i) {
        if (!records[i].quality.passed()) continue;
        const auto it = image_index.find(records[i].image_id);
        if (it == image_index.end())
            throw MissingScore("no embedding for id '" + records[i].image_id + "'");
        pool_ids.push_back(records[i].image_id);
        const auto row = image_emb.row(it->second);
        rows.insert(rows.end(), row.begin(), row.end());
        pool_records.push_back(i);
    }

    const EmbeddingMatrix matrix =
        normalize_embeddings(pool_ids, image_emb.dim, std::move(rows));
    SplitAssignment assignment = multi_split_assign(matrix, plan);

    std::unordered_map<std::string, std::string> split_of;
    for (size_t s = 0; s < assignment.names.size(); ++s)
        for (const auto& id : assignment.ids[s]) split_of[id] = assignment.names[s];
    for (size_t i : pool_records) {
        const auto it = split_of.find(records[i].image_id);
        if (it != split_of.end()) records[i].split = it->second;
    }
    return assignment;
}

StubScores make_stub_scores(const std::vector<ManifestRecord>& records, int dim) {
    if (dim < 2) throw InvalidConfig("stub scores need dim >= 2");
    StubScores out;
    out.image_emb.dim = dim;
    out.text_emb.dim = dim;

    auto unit_row = [dim](Rng& rng) {
        std::vector<double> row(dim);
        double sum = 0.0;
        for (double& v : row) {
            v = rng.uniform(-1.0, 1.0);
            sum += v * v;
        }
        const double inv = 1.0 / std::sqrt(sum > 0 ? sum : 1.0);
        for (double& v : row) v *= inv;
        return row;
    };

    for (const auto& r : records) {
        if (!r.caption_stage.passed() || !r.caption) continue;
        Rng img_rng(Rng::fnv1a64("img/" + r.image_id));
        const auto img = unit_row(img_rng);

        // Text row = image row nudged by caption-seeded noise; the nudge
        // magnitude spreads cosine similarity across the clip threshold
        // (most rows pass the default 20, a tail falls below).
        Rng txt_rng(Rng::fnv1a64("txt/" + r.image_id + "/" + *r.caption));
        const double nudge = 0.2 + 2.3 * txt_rng.next_double();
        std::vector<double> txt(dim);
        double sum = 0.0;
        for (int d = 0; d < dim; ++d) {
            txt[d] = img[d] + nudge * txt_rng.uniform(-1.0, 1.0);
            sum += txt[d] * txt[d];
        }
        const double inv = 1.0 / std::sqrt(sum > 0 ? sum : 1.0);
        for (double& v : txt) v *= inv;

        out.image_emb.ids.push_back(r.image_id);
        for (double v : img) out.image_emb.data.push_back(static_cast<float>(v));
        out.text_emb.ids.push_back(r.image_id);
        for (double v : txt) out.text_emb.data.push_back(static_cast<float>(v));

        Rng aes_rng(Rng::fnv1a64("aes/" + r.image_id));
        out.aesthetic[r.image_id] = 2.0 + 4.0 * aes_rng.next_double();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Orchestration

std::string stage_manifest_name(const std::string& stage) {
    return "manifest." + stage + ".jsonl";
}

PipelineOptions load_pipeline_options(const ConfigFile& config) {
    PipelineOptions o;
    o.scene_path = config.get_string("pipeline.scene").value_or("");
    o.out_dir = config.get_string("pipeline.out_dir").value_or("");
    o.jobs = static_cast<int>(config.get_integer("pipeline.jobs").value_or(0));

    if (const auto azimuths = config.get_number_list("stage.poses.azimuths_deg")) {
        o.camera.azimuths.clear();
        for (double a : *azimuths) o.camera.azimuths.push_back(deg_to_rad(a));
    }
    if (const auto elevations = config.get_number_list("stage.poses.elevations_deg")) {
        o.camera.elevations.clear();
        for (double e : *elevations) o.camera.elevations.push_back(deg_to_rad(e));
    }
    if (const auto fov = config.get_number("stage.poses.fov_y_deg"))
        o.camera.fov_y = deg_to_rad(*fov);
    if (const auto fill = config.get_number("stage.poses.fill_fraction"))
        o.camera.fill_fraction = *fill;
    if (const auto width = config.get_integer("stage.poses.width"))
        o.camera.width = static_cast<int>(*width);
    if (const auto height = config.get_integer("stage.poses.height"))
        o.camera.height = static_cast<int>(*height);
    if (const auto min_diag = config.get_number("stage.poses.min_bbox_diagonal"))
        o.camera.min_bbox_diagonal = *min_diag;

    if (const auto v = config.get_number("stage.filter-heuristic.min_brightness"))
        o.heuristics.min_brightness = *v;
    if (const auto v = config.get_number("stage.filter-heuristic.min_variance"))
        o.heuristics.min_variance = *v;
    if (const auto v = config.get_number("stage.filter-heuristic.max_dark_fraction"))
        o.heuristics.max_dark_fraction = *v;
    if (const auto v = config.get_number("stage.filter-heuristic.black_level"))
        o.heuristics.black_level = *v;

    o.vlm_endpoint = config.get_string("stage.filter-vlm.endpoint").value_or("");
    o.filter_stub_path = config.get_string("stage.filter-vlm.stub").value_or("");
    o.filter_prompt_file = config.get_string("stage.filter-vlm.prompt_file").value_or("");
    o.caption_stub_path = config.get_string("stage.caption.stub").value_or("");
    o.caption_prompt_file = config.get_string("stage.caption.prompt_file").value_or("");
    if (const auto v = config.get_string("stage.filter-vlm.model")) o.model_name = *v;
    if (const auto v = config.get_integer("stage.filter-vlm.max_in_flight"))
        o.max_in_flight = static_cast<int>(*v);
    if (const auto v = config.get_integer("stage.filter-vlm.retries"))
        o.retry.semantic_retries = static_cast<int>(*v);
    if (const auto v = config.get_number("stage.filter-vlm.backoff_base_s"))
        o.retry.backoff_base_s = *v;

    if (const auto v = config.get_string("stage.score.provider")) o.score_provider = *v;
    o.image_emb_prefix = config.get_string("stage.score.image_emb").value_or("");
    o.text_emb_prefix = config.get_string("stage.score.text_emb").value_or("");
    o.aesthetic_path = config.get_string("stage.score.aesthetic").value_or("");
    if (const auto v = config.get_integer("stage.score.stub_dim"))
        o.stub_dim = static_cast<int>(*v);
    if (const auto v = config.get_number("stage.score.clip_scale")) o.clip_scale = *v;

    if (const auto v = config.get_number("stage.filter-quality.min_clip")) o.quality.min_clip = *v;
    if (const auto v = config.get_number("stage.filter-quality.min_aesthetic"))
        o.quality.min_aesthetic = *v;

    if (const auto splits = config.get_string("stage.sample.splits")) {
        o.split_names.clear();
        o.split_ratios.clear();
        std::string item;
        std::istringstream stream(*splits);
        while (std::getline(stream, item, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw InvalidConfig("stage.sample.splits must be name:ratio,...");
            o.split_names.push_back(trim(item.substr(0, colon)));
            o.split_ratios.push_back(std::stod(item.substr(colon + 1)));
        }
    }
    if (const auto v = config.get_integer("stage.sample.total"))
        o.sample_total = static_cast<size_t>(*v);
    return o;
}

namespace {

std::unique_ptr<VlmGateway> make_gateway(const std::string& stub_path,
                                         const std::string& endpoint) {
    if (!stub_path.empty()) return StubVlmGateway::from_json_file(stub_path);
    if (!endpoint.empty()) return std::make_unique<HttpVlmGateway>(endpoint);
    throw InvalidConfig("vlm stage needs either a stub file or an endpoint");
}

std::string resolve_prompt(const std::string& prompt_file, const std::string& stock) {
    return prompt_file.empty() ? stock : read_text_file(prompt_file);
}

}  // namespace

std::vector<ManifestRecord> run_pipeline(const PipelineOptions& options) {
    if (options.scene_path.empty() || options.out_dir.empty())
        throw InvalidConfig("run_pipeline needs a scene path and an output directory");
    if (options.sample_total == 0)
        throw InvalidConfig("run_pipeline needs stage.sample.total > 0");

    const Scene scene = load_scene(options.scene_path);
    const fs::path out_dir(options.out_dir);
    const fs::path images_root = out_dir / "images";
    fs::create_directories(out_dir);

    auto manifest_path = [&](const std::string& stage) {
        return (out_dir / stage_manifest_name(stage)).string();
    };
    auto done = [&](const std::string& stage) { return fs::exists(manifest_path(stage)); };

    // poses + render
    if (!done("render")) {
        const PoseGenerationResult gen = generate_object_poses(scene, options.camera);
        write_poses_jsonl(gen.poses, (out_dir / "poses.jsonl").string());
        for (const auto& skip : gen.skipped) std::cerr << "skip: " << skip << "\n";
        const auto records = render_stage(scene, gen.poses, images_root.string(), options.jobs);
        write_manifest(records, manifest_path("render"));
    }

    // filter-heuristic
    if (!done("heuristic")) {
        auto records = read_manifest(manifest_path("render"));
        heuristic_stage(records, images_root.string(), options.heuristics, options.jobs);
        write_manifest(records, manifest_path("heuristic"));
    }

    // filter-vlm
    if (!done("vlm")) {
        auto records = read_manifest(manifest_path("heuristic"));
        const auto gateway = make_gateway(options.filter_stub_path, options.vlm_endpoint);
        vlm_filter_stage(records, images_root.string(), *gateway,
                         resolve_prompt(options.filter_prompt_file, default_filter_prompt()),
                         options.retry, options.max_in_flight, options.model_name);
        write_manifest(records, manifest_path("vlm"));
    }

    // caption
    if (!done("caption")) {
        auto records = read_manifest(manifest_path("vlm"));
        const auto gateway = make_gateway(options.caption_stub_path, options.vlm_endpoint);
        caption_stage(records, images_root.string(), *gateway,
                      resolve_prompt(options.caption_prompt_file, default_caption_prompt()),
                      options.retry, options.max_in_flight, options.model_name);
        write_manifest(records, manifest_path("caption"));
    }

    // score
    if (!done("score")) {
        auto records = read_manifest(manifest_path("caption"));
        std::string image_prefix = options.image_emb_prefix;
        std::string text_prefix = options.text_emb_prefix;
        std::string aesthetic_path = options.aesthetic_path;
        if (options.score_provider == "stub") {
            const StubScores stub = make_stub_scores(records, options.stub_dim);
            fs::create_directories(out_dir / "scores");
            image_prefix = (out_dir / "scores" / "image_emb").string();
            text_prefix = (out_dir / "scores" / "text_emb").string();
            aesthetic_path = (out_dir / "scores" / "aesthetic.jsonl").string();
            write_embedding_file(stub.image_emb, image_prefix);
            write_embedding_file(stub.text_emb, text_prefix);
            write_aesthetic_sidecar(stub.aesthetic, aesthetic_path);
        } else if (options.score_provider != "files") {
            throw InvalidConfig("unknown score provider '" + options.score_provider + "'");
        }
        score_stage(records, read_embedding_file(image_prefix), read_embedding_file(text_prefix),
                    read_aesthetic_sidecar(aesthetic_path), options.clip_scale);
        write_manifest(records, manifest_path("score"));
    }

    // filter-quality
    if (!done("quality")) {
        auto records = read_manifest(manifest_path("score"));
        quality_stage(records, options.quality);
        write_manifest(records, manifest_path("quality"));
    }

    // sample
    if (!done("final")) {
        auto records = read_manifest(manifest_path("quality"));
        const std::string image_prefix = options.score_provider == "stub"
                                             ? (out_dir / "scores" / "image_emb").string()
                                             : options.image_emb_prefix;
        const SplitPlan plan =
            SplitPlan::make(options.split_names, options.split_ratios, options.sample_total);
        const SplitAssignment assignment =
            sample_stage(records, read_embedding_file(image_prefix), plan);
        write_manifest(records, manifest_path("final"));

        std::unordered_map<std::string, const ManifestRecord*> by_id;
        for (const auto& r : records) by_id[r.image_id] = &r;
        for (size_t s = 0; s < assignment.names.size(); ++s) {
            std::vector<ManifestRecord> split_records;
            for (const auto& id : assignment.ids[s]) split_records.push_back(*by_id.at(id));
            write_manifest(split_records,
                           (out_dir / ("split_" + assignment.names[s] + ".jsonl")).string());
        }

        const auto stats = scene_stats(records);
        write_text_file((out_dir / "stats.txt").string(), render_stats_table(stats));
        write_text_file((out_dir / "stats.json").string(), stats_to_json(stats));
    }

    return read_manifest(manifest_path("final"));
}

}  // namespace blendforge
