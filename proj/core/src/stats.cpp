#include "blendforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blendforge/errors.hpp"

namespace blendforge {

using nlohmann::ordered_json;

namespace {

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std_dev = std::sqrt(sq / static_cast<double>(values.size()));
    return out;
}

std::string pct(double value) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << value << "%";
    return s.str();
}

std::string count_pct(size_t count, double percent) {
    return std::to_string(count) + " (" + pct(percent) + ")";
}

std::string mean_pm_std(double mean, double std_dev, size_t n) {
    if (n == 0) return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << mean << " ± " << std_dev;
    return s.str();
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths(header.size());
    for (size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : rows)
        for (size_t c = 0; c < row.size(); ++c) {
            // Column width in display characters; the ± sign is 2 UTF-8 bytes.
            size_t display = row[c].size();
            for (size_t i = 0; i + 1 < row[c].size(); ++i)
                if (static_cast<unsigned char>(row[c][i]) == 0xc2 &&
                    static_cast<unsigned char>(row[c][i + 1]) == 0xb1)
                    --display;
            widths[c] = std::max(widths[c], display);
        }

    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (size_t c = 0; c < row.size(); ++c) {
            size_t display = row[c].size();
            for (size_t i = 0; i + 1 < row[c].size(); ++i)
                if (static_cast<unsigned char>(row[c][i]) == 0xc2 &&
                    static_cast<unsigned char>(row[c][i + 1]) == 0xb1)
                    --display;
            out << row[c] << std::string(widths[c] - display, ' ');
            if (c + 1 < row.size()) out << "  ";
        }
        out << "\n";
    };
    emit_row(header);
    size_t rule = 0;
    for (size_t c = 0; c < widths.size(); ++c) rule += widths[c] + (c + 1 < widths.size() ? 2 : 0);
    out << std::string(rule, '-') << "\n";
    for (const auto& row : rows) emit_row(row);
    return out.str();
}

}  // namespace

std::vector<SceneStats> scene_stats(const std::vector<ManifestRecord>& records) {
    if (records.empty()) return {};
    std::vector<std::string> order;
    std::map<std::string, SceneStats> by_scene;
    std::map<std::string, std::vector<double>> clips, aesthetics;

    for (const auto& r : records) {
        if (!by_scene.count(r.scene)) {
            order.push_back(r.scene);
            by_scene[r.scene].scene = r.scene;
        }
        auto& s = by_scene[r.scene];
        ++s.total;
        if (r.heuristic.passed()) ++s.heuristic_passed;
        if (r.vlm.passed()) ++s.vlm_passed;
        if (r.heuristic.status == StageStatus::Error || r.vlm.status == StageStatus::Error ||
            r.caption_stage.status == StageStatus::Error ||
            r.quality.status == StageStatus::Error)
            ++s.errors;
        if (r.vlm.passed() && r.clip_score && r.aesthetic_score) {
            clips[r.scene].push_back(*r.clip_score);
            aesthetics[r.scene].push_back(*r.aesthetic_score);
        }
    }

    std::vector<SceneStats> out;
    for (const auto& scene : order) {
        auto s = by_scene[scene];
        s.heuristic_pct = 100.0 * static_cast<double>(s.heuristic_passed) / s.total;
        s.vlm_pct = 100.0 * static_cast<double>(s.vlm_passed) / s.total;
        const auto clip = mean_std(clips[scene]);
        const auto aesthetic = mean_std(aesthetics[scene]);
        s.scored = clips[scene].size();
        s.clip_mean = clip.mean;
        s.clip_std = clip.std_dev;
        s.aesthetic_mean = aesthetic.mean;
        s.aesthetic_std = aesthetic.std_dev;
        out.push_back(std::move(s));
    }
    return out;
}

std::string render_stats_table(const std::vector<SceneStats>& stats) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : stats)
        rows.push_back({s.scene, std::to_string(s.total),
                        count_pct(s.heuristic_passed, s.heuristic_pct),
                        count_pct(s.vlm_passed, s.vlm_pct),
                        mean_pm_std(s.clip_mean, s.clip_std, s.scored),
                        mean_pm_std(s.aesthetic_mean, s.aesthetic_std, s.scored)});
    return render_table({"Scene", "Total", "Heuristic Passed", "VLM Passed", "CLIP Score",
                         "Aesthetic"},
                        rows);
}

std::string stats_to_json(const std::vector<SceneStats>& stats) {
    ordered_json out = ordered_json::array();
    for (const auto& s : stats) {
        ordered_json j;
        j["scene"] = s.scene;
        j["total"] = s.total;
        j["heuristic_passed"] = s.heuristic_passed;
        j["heuristic_pct"] = s.heuristic_pct;
        j["vlm_passed"] = s.vlm_passed;
        j["vlm_pct"] = s.vlm_pct;
        j["scored"] = s.scored;
        j["clip_mean"] = s.clip_mean;
        j["clip_std"] = s.clip_std;
        j["aesthetic_mean"] = s.aesthetic_mean;
        j["aesthetic_std"] = s.aesthetic_std;
        j["errors"] = s.errors;
        out.push_back(std::move(j));
    }
    return out.dump(2) + "\n";
}

AblationReport ablation_report(const std::vector<std::vector<ManifestRecord>>& manifests) {
    if (manifests.size() < 2)
        throw MismatchedScenes("ablation needs at least two method manifests");

    AblationReport report;
    std::set<std::pair<std::string, std::string>> seen_methods;
    for (const auto& records : manifests) {
        if (records.empty()) throw MismatchedScenes("ablation manifest is empty");
        AblationRow row;
        row.method = records.front().method;
        row.spatial = records.front().spatial.value_or("");
        const std::string scene = records.front().scene;
        if (report.scene.empty()) report.scene = scene;
        if (scene != report.scene)
            throw MismatchedScenes("ablation manifests span different scenes: '" + report.scene +
                                   "' vs '" + scene + "'");
        for (const auto& r : records) {
            if (r.scene != scene || r.method != row.method ||
                r.spatial.value_or("") != row.spatial)
                throw MismatchedScenes("ablation manifest mixes methods or scenes");
            ++row.total;
            if (r.heuristic.passed()) ++row.heuristic_passed;
            if (r.vlm.passed()) ++row.vlm_passed;
        }
        if (!seen_methods.insert({row.method, row.spatial}).second)
            throw MismatchedScenes("duplicate method '" + row.method + "/" + row.spatial +
                                   "' in ablation input");
        row.heuristic_pct = 100.0 * static_cast<double>(row.heuristic_passed) / row.total;
        row.vlm_pct = 100.0 * static_cast<double>(row.vlm_passed) / row.total;
        report.rows.push_back(std::move(row));
    }

    std::set<std::string> distinct_methods;
    for (const auto& row : report.rows) distinct_methods.insert(row.method);
    if (distinct_methods.size() < 2)
        throw MismatchedScenes("ablation needs at least two distinct methods");

    double best_h = -1.0, best_v = -1.0;
    for (const auto& row : report.rows) {
        best_h = std::max(best_h, row.heuristic_pct);
        best_v = std::max(best_v, row.vlm_pct);
    }
    for (auto& row : report.rows) {
        row.best_heuristic = row.heuristic_pct == best_h;
        row.best_vlm = row.vlm_pct == best_v;
    }
    return report;
}

std::string render_ablation_table(const AblationReport& report) {
    auto fmt = [&](double value, bool best) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(1) << value;
        if (best) s << "*";
        return s.str();
    };

    std::ostringstream out;
    out << "Scene: " << report.scene << "\n\n";

    std::vector<std::vector<std::string>> top_rows;
    for (const auto& row : report.rows)
        if (row.spatial.empty())
            top_rows.push_back({row.method, fmt(row.heuristic_pct, row.best_heuristic),
                                fmt(row.vlm_pct, row.best_vlm)});
    if (!top_rows.empty())
        out << render_table({"Method", "Heuristic (%)", "VLM (%)"}, top_rows) << "\n";

    // Methods x {Uniform, Grid} block.
    std::vector<std::string> methods;
    for (const auto& row : report.rows)
        if (!row.spatial.empty() &&
            std::find(methods.begin(), methods.end(), row.method) == methods.end())
            methods.push_back(row.method);
    if (!methods.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& method : methods) {
            std::vector<std::string> cells{method, "-", "-", "-", "-"};
            for (const auto& row : report.rows) {
                if (row.method != method || row.spatial.empty()) continue;
                const size_t offset = row.spatial == "grid" ? 1 : 0;
                cells[1 + offset] = fmt(row.heuristic_pct, row.best_heuristic);
                cells[3 + offset] = fmt(row.vlm_pct, row.best_vlm);
            }
            rows.push_back(std::move(cells));
        }
        out << render_table({"Method", "Heuristic Uniform (%)", "Heuristic Grid (%)",
                             "VLM Uniform (%)", "VLM Grid (%)"},
                            rows);
    }
    out << "\n* best value in its column\n";
    return out.str();
}

std::string ablation_to_json(const AblationReport& report) {
    ordered_json out;
    out["scene"] = report.scene;
    out["rows"] = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json j;
        j["method"] = row.method;
        if (!row.spatial.empty()) j["spatial"] = row.spatial;
        j["total"] = row.total;
        j["heuristic_passed"] = row.heuristic_passed;
        j["heuristic_pct"] = row.heuristic_pct;
        j["vlm_passed"] = row.vlm_passed;
        j["vlm_pct"] = row.vlm_pct;
        j["best_heuristic"] = row.best_heuristic;
        j["best_vlm"] = row.best_vlm;
        out["rows"].push_back(std::move(j));
    }
    return out.dump(2) + "\n";
}

}  // namespace blendforge
