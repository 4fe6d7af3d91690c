#include "blendforge/quality.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "blendforge/errors.hpp"
#include "blendforge/util.hpp"

namespace blendforge {

using nlohmann::ordered_json;

std::string quality_reason_name(QualityReason r) {
    return r == QualityReason::Clip ? "clip" : "aesthetic";
}

double clip_score(std::span<const double> image_embedding, std::span<const double> text_embedding,
                  double scale) {
    if (image_embedding.size() != text_embedding.size() || image_embedding.empty())
        throw DimensionMismatch("clip_score: embeddings must share a dimension >= 1");
    double dot = 0.0, norm_img = 0.0, norm_txt = 0.0;
    for (size_t i = 0; i < image_embedding.size(); ++i) {
        dot += image_embedding[i] * text_embedding[i];
        norm_img += image_embedding[i] * image_embedding[i];
        norm_txt += text_embedding[i] * text_embedding[i];
    }
    if (norm_img == 0.0 || norm_txt == 0.0) throw ZeroVector("clip_score: zero embedding");
    const double cosine = dot / (std::sqrt(norm_img) * std::sqrt(norm_txt));
    return scale * std::max(0.0, cosine);
}

QualityDecision quality_decide(const ScoredPair& pair, const QualityThresholds& t) {
    if (!std::isfinite(pair.clip_score) || !std::isfinite(pair.aesthetic_score))
        throw MissingScore("quality_decide: non-finite score for " + pair.image_id);
    QualityDecision d;
    if (pair.clip_score < t.min_clip) d.reasons.push_back(QualityReason::Clip);
    if (pair.aesthetic_score < t.min_aesthetic) d.reasons.push_back(QualityReason::Aesthetic);
    d.passed = d.reasons.empty();
    return d;
}

std::vector<double> EmbeddingFile::row_for(const std::string& id) const {
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == id) {
            const auto r = row(i);
            return {r.begin(), r.end()};
        }
    }
    throw MissingScore("no embedding for id '" + id + "'");
}

bool EmbeddingFile::contains(const std::string& id) const {
    for (const auto& existing : ids)
        if (existing == id) return true;
    return false;
}

EmbeddingFile read_embedding_file(const std::string& prefix) {
    ordered_json header;
    try {
        header = ordered_json::parse(read_text_file(prefix + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(prefix + ".json: " + e.what());
    }
    EmbeddingFile emb;
    emb.dim = header.at("dim").get<int>();
    const size_t count = header.at("count").get<size_t>();
    emb.ids = header.at("ids").get<std::vector<std::string>>();
    if (emb.dim <= 0) throw ParseError(prefix + ".json: dim must be >= 1");
    if (emb.ids.size() != count)
        throw ParseError(prefix + ".json: count does not match the ids list");

    std::ifstream in(prefix + ".bin", std::ios::binary);
    if (!in) throw IoError("cannot open: " + prefix + ".bin");
    emb.data.resize(count * static_cast<size_t>(emb.dim));
    in.read(reinterpret_cast<char*>(emb.data.data()),
            static_cast<std::streamsize>(emb.data.size() * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != emb.data.size() * sizeof(float))
        throw ParseError(prefix + ".bin: payload shorter than count * dim floats");
    return emb;
}

void write_embedding_file(const EmbeddingFile& emb, const std::string& prefix) {
    if (emb.data.size() != emb.ids.size() * static_cast<size_t>(emb.dim))
        throw InvalidConfig("write_embedding_file: data size does not match ids * dim");
    ordered_json header;
    header["dim"] = emb.dim;
    header["count"] = emb.ids.size();
    header["ids"] = emb.ids;
    write_text_file(prefix + ".json", header.dump(2) + "\n");

    std::ofstream out(prefix + ".bin", std::ios::binary);
    if (!out) throw IoError("cannot write: " + prefix + ".bin");
    out.write(reinterpret_cast<const char*>(emb.data.data()),
              static_cast<std::streamsize>(emb.data.size() * sizeof(float)));
}

std::map<std::string, double> read_aesthetic_sidecar(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::map<std::string, double> scores;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = ordered_json::parse(line);
            scores[j.at("id").get<std::string>()] = j.at("aesthetic").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return scores;
}

void write_aesthetic_sidecar(const std::map<std::string, double>& scores,
                             const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    for (const auto& [id, value] : scores) {
        ordered_json j;
        j["id"] = id;
        j["aesthetic"] = value;
        out << j.dump() << "\n";
    }
}

}  // namespace blendforge
