#include "blendforge/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "blendforge/errors.hpp"

namespace blendforge {

using nlohmann::ordered_json;

std::string stage_status_name(StageStatus s) {
    switch (s) {
        case StageStatus::Pending: return "pending";
        case StageStatus::Passed: return "passed";
        case StageStatus::Rejected: return "rejected";
        case StageStatus::Error: return "error";
    }
    return "pending";
}

StageStatus stage_status_from_name(const std::string& name) {
    if (name == "pending") return StageStatus::Pending;
    if (name == "passed") return StageStatus::Passed;
    if (name == "rejected") return StageStatus::Rejected;
    if (name == "error") return StageStatus::Error;
    throw ParseError("unknown stage status '" + name + "'");
}

namespace {

ordered_json stage_to_json(const StageResult& s) {
    ordered_json j;
    j["status"] = stage_status_name(s.status);
    if (!s.reasons.empty()) j["reasons"] = s.reasons;
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

StageResult stage_from_json(const ordered_json& j) {
    StageResult s;
    s.status = stage_status_from_name(j.at("status").get<std::string>());
    if (j.contains("reasons")) s.reasons = j.at("reasons").get<std::vector<std::string>>();
    if (j.contains("note")) s.note = j.at("note").get<std::string>();
    return s;
}

ordered_json record_to_json(const ManifestRecord& r) {
    ordered_json j;
    j["image_id"] = r.image_id;
    j["scene"] = r.scene;
    if (r.object_id) j["object_id"] = *r.object_id;
    j["method"] = r.method;
    if (r.spatial) j["spatial"] = *r.spatial;
    j["azimuth_deg"] = r.azimuth_deg;
    j["elevation_deg"] = r.elevation_deg;
    j["distance"] = r.distance;
    j["rgb_path"] = r.rgb_path;
    if (r.seg_path) j["seg_path"] = *r.seg_path;
    j["stages"] = ordered_json{{"heuristic", stage_to_json(r.heuristic)},
                               {"vlm", stage_to_json(r.vlm)},
                               {"caption", stage_to_json(r.caption_stage)},
                               {"quality", stage_to_json(r.quality)}};
    if (r.heuristic_stats) {
        ordered_json s;
        if (r.heuristic_stats->fill >= 0.0) s["fill"] = r.heuristic_stats->fill;
        s["mean"] = r.heuristic_stats->mean;
        s["variance"] = r.heuristic_stats->variance;
        s["dark_fraction"] = r.heuristic_stats->dark_fraction;
        j["heuristic_stats"] = std::move(s);
    }
    if (r.caption) j["caption"] = *r.caption;
    if (r.caption_word_count) j["caption_word_count"] = *r.caption_word_count;
    if (r.caption_length_warning) j["caption_length_warning"] = *r.caption_length_warning;
    if (r.clip_score) j["clip_score"] = *r.clip_score;
    if (r.aesthetic_score) j["aesthetic_score"] = *r.aesthetic_score;
    if (r.split) j["split"] = *r.split;
    return j;
}

ManifestRecord record_from_json(const ordered_json& j) {
    ManifestRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.scene = j.at("scene").get<std::string>();
    if (j.contains("object_id")) r.object_id = j.at("object_id").get<int>();
    r.method = j.at("method").get<std::string>();
    if (j.contains("spatial")) r.spatial = j.at("spatial").get<std::string>();
    r.azimuth_deg = j.at("azimuth_deg").get<double>();
    r.elevation_deg = j.at("elevation_deg").get<double>();
    r.distance = j.at("distance").get<double>();
    r.rgb_path = j.at("rgb_path").get<std::string>();
    if (j.contains("seg_path")) r.seg_path = j.at("seg_path").get<std::string>();
    const auto& stages = j.at("stages");
    r.heuristic = stage_from_json(stages.at("heuristic"));
    r.vlm = stage_from_json(stages.at("vlm"));
    r.caption_stage = stage_from_json(stages.at("caption"));
    r.quality = stage_from_json(stages.at("quality"));
    if (j.contains("heuristic_stats")) {
        const auto& s = j.at("heuristic_stats");
        HeuristicStats stats;
        stats.fill = s.value("fill", -1.0);
        stats.mean = s.at("mean").get<double>();
        stats.variance = s.at("variance").get<double>();
        stats.dark_fraction = s.at("dark_fraction").get<double>();
        r.heuristic_stats = stats;
    }
    if (j.contains("caption")) r.caption = j.at("caption").get<std::string>();
    if (j.contains("caption_word_count"))
        r.caption_word_count = j.at("caption_word_count").get<int>();
    if (j.contains("caption_length_warning"))
        r.caption_length_warning = j.at("caption_length_warning").get<bool>();
    if (j.contains("clip_score")) r.clip_score = j.at("clip_score").get<double>();
    if (j.contains("aesthetic_score")) r.aesthetic_score = j.at("aesthetic_score").get<double>();
    if (j.contains("split")) r.split = j.at("split").get<std::string>();
    return r;
}

}  // namespace

std::string manifest_record_to_json(const ManifestRecord& record) {
    return record_to_json(record).dump();
}

void write_manifest(const std::vector<ManifestRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + path);
    for (const auto& record : records) out << record_to_json(record).dump() << "\n";
}

std::vector<ManifestRecord> read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest: " + path);
    std::vector<ManifestRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void validate_funnel(const ManifestRecord& r) {
    auto fail = [&](const std::string& msg) {
        throw ValidationError("funnel violation in record '" + r.image_id + "': " + msg);
    };
    const StageResult* stages[] = {&r.heuristic, &r.vlm, &r.caption_stage, &r.quality};
    bool blocked = false;
    for (const auto* stage : stages) {
        if (blocked && !stage->pending()) fail("stage ran after an earlier rejection/error");
        if (stage->status == StageStatus::Rejected || stage->status == StageStatus::Error)
            blocked = true;
    }
    for (const auto* stage : stages) {
        if (stage->status == StageStatus::Rejected && stage->reasons.empty())
            fail("rejected stage without reasons");
        if (stage->status != StageStatus::Rejected && !stage->reasons.empty())
            fail("reasons on a non-rejected stage");
    }
    if (r.caption && !r.vlm.passed()) fail("caption present without a passed vlm stage");
    if (r.split && !r.quality.passed()) fail("split present without a passed quality stage");
}

}  // namespace blendforge
