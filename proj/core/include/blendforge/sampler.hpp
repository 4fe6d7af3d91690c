#pragma once

#include <string>
#include <vector>

namespace blendforge {

/// Unit-normalized embedding rows keyed to image ids.
struct EmbeddingMatrix {
    std::vector<std::string> ids;  // size N, no duplicates
    int dim = 0;
    std::vector<double> vectors;  // N x dim, row-major

    size_t count() const { return ids.size(); }
    const double* row(size_t i) const { return vectors.data() + i * static_cast<size_t>(dim); }
};

/// Divides every row by its Euclidean norm. Throws ZeroVectorRow (with the
/// row index) when a row has norm 0, and ValidationError on duplicate ids.
EmbeddingMatrix normalize_embeddings(const std::vector<std::string>& ids, int dim,
                                     std::vector<double> raw);

/// Farthest point sampling: the seed is the row farthest from the dataset
/// centroid, then each step takes the row maximizing its minimum Euclidean
/// distance to the already-selected set. All ties break to the lowest index.
/// O(N*k) via an incrementally maintained min-distance array.
std::vector<size_t> fps_select(const EmbeddingMatrix& emb, size_t k);

struct SplitPlan {
    std::vector<std::string> names;
    std::vector<double> ratios;  // positive, summing to 1
    size_t total = 0;
    std::vector<size_t> sizes;  // derived; sum == total

    /// Largest-remainder rounding of ratios * total (floors first, then +1 to
    /// the splits with the largest remainders; remainder ties go to the
    /// earlier split).
    static SplitPlan make(std::vector<std::string> names, std::vector<double> ratios, size_t total);
};

struct SplitAssignment {
    std::vector<std::string> names;
    std::vector<std::vector<size_t>> indices;      // selection order per split
    std::vector<std::vector<std::string>> ids;     // same, resolved to image ids
};

/// Multi-split farthest point sampling. Seeds = fps_select(emb, #splits),
/// handed one per split in descending-ratio order. Turns then follow a
/// smooth weighted round-robin over the ratios (each turn every open split
/// accrues its ratio as credit; the highest credit takes the turn and pays
/// 1; ties to the lowest split index), realizing an evenly interleaved
/// largest-remainder schedule. On its turn a split takes the pool element
/// farthest (max-min distance) from that split's current members. Full
/// splits stop accruing credit and are skipped.
SplitAssignment multi_split_assign(const EmbeddingMatrix& emb, const SplitPlan& plan);

}  // namespace blendforge
