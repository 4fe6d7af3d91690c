#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace blendforge {

struct ScoredPair {
    std::string image_id;
    double clip_score = 0.0;
    double aesthetic_score = 0.0;
};

struct QualityThresholds {
    double min_clip = 20.0;
    double min_aesthetic = 3.0;
};

enum class QualityReason { Clip, Aesthetic };

std::string quality_reason_name(QualityReason r);

struct QualityDecision {
    bool passed = false;
    std::vector<QualityReason> reasons;
};

/// scale * max(0, cosine(image_embedding, text_embedding)). The conventional
/// reporting scale here is 100 (scores land around 20-30 for typical
/// image-caption pairs); the multiplier is configurable.
double clip_score(std::span<const double> image_embedding, std::span<const double> text_embedding,
                  double scale = 100.0);

/// Strict thresholds: a score below its minimum rejects; exact equality keeps.
QualityDecision quality_decide(const ScoredPair& pair, const QualityThresholds& t);

/// Embedding store: "<prefix>.json" header {"dim", "count", "ids": [...]}
/// plus "<prefix>.bin" holding little-endian float32, row-major count x dim.
struct EmbeddingFile {
    int dim = 0;
    std::vector<std::string> ids;
    std::vector<float> data;  // ids.size() * dim

    std::span<const float> row(size_t index) const {
        return {data.data() + index * static_cast<size_t>(dim), static_cast<size_t>(dim)};
    }

    /// Row for an id, widened to double. Throws MissingScore when absent.
    std::vector<double> row_for(const std::string& id) const;

    bool contains(const std::string& id) const;
};

EmbeddingFile read_embedding_file(const std::string& prefix);
void write_embedding_file(const EmbeddingFile& emb, const std::string& prefix);

/// Aesthetic sidecar: JSONL lines {"id": ..., "aesthetic": ...}.
std::map<std::string, double> read_aesthetic_sidecar(const std::string& path);
void write_aesthetic_sidecar(const std::map<std::string, double>& scores, const std::string& path);

}  // namespace blendforge
