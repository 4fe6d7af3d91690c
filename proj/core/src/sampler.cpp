#include "blendforge/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "blendforge/errors.hpp"

namespace blendforge {

namespace {

double squared_distance(const double* a, const double* b, int dim) {
    double sum = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

// Strictly-greater comparison keeps the lowest index on ties.
size_t argmax(const std::vector<double>& values, const std::vector<bool>& eligible) {
    size_t best = std::numeric_limits<size_t>::max();
    double best_value = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < values.size(); ++i) {
        if (!eligible[i]) continue;
        if (values[i] > best_value) {
            best_value = values[i];
            best = i;
        }
    }
    return best;
}

size_t centroid_farthest(const EmbeddingMatrix& emb) {
    const size_t n = emb.count();
    std::vector<double> centroid(emb.dim, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double* r = emb.row(i);
        for (int d = 0; d < emb.dim; ++d) centroid[d] += r[d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    size_t best = 0;
    double best_dist = -1.0;
    for (size_t i = 0; i < n; ++i) {
        const double dist = squared_distance(emb.row(i), centroid.data(), emb.dim);
        if (dist > best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    return best;
}

}  // namespace

EmbeddingMatrix normalize_embeddings(const std::vector<std::string>& ids, int dim,
                                     std::vector<double> raw) {
    if (dim <= 0) throw InvalidConfig("normalize_embeddings: dim must be >= 1");
    if (raw.size() != ids.size() * static_cast<size_t>(dim))
        throw InvalidConfig("normalize_embeddings: matrix size does not match ids * dim");
    std::set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second)
            throw ValidationError("normalize_embeddings: duplicate id '" + id + "'");

    for (size_t i = 0; i < ids.size(); ++i) {
        double* row = raw.data() + i * static_cast<size_t>(dim);
        double sum = 0.0;
        for (int d = 0; d < dim; ++d) sum += row[d] * row[d];
        if (sum == 0.0)
            throw ZeroVectorRow("normalize_embeddings: zero row at index " + std::to_string(i));
        const double inv = 1.0 / std::sqrt(sum);
        for (int d = 0; d < dim; ++d) row[d] *= inv;
    }
    return {ids, dim, std::move(raw)};
}

std::vector<size_t> fps_select(const EmbeddingMatrix& emb, size_t k) {
    const size_t n = emb.count();
    if (k < 1 || k > n) throw InvalidK("fps_select: k must be in [1, N]");

    std::vector<size_t> selected;
    selected.reserve(k);
    std::vector<bool> remaining(n, true);
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());

    size_t current = centroid_farthest(emb);
    selected.push_back(current);
    remaining[current] = false;

    while (selected.size() < k) {
        const double* row = emb.row(current);
        for (size_t i = 0; i < n; ++i)
            if (remaining[i])
                min_dist[i] = std::min(min_dist[i], squared_distance(emb.row(i), row, emb.dim));
        current = argmax(min_dist, remaining);
        selected.push_back(current);
        remaining[current] = false;
    }
    return selected;
}

SplitPlan SplitPlan::make(std::vector<std::string> names, std::vector<double> ratios,
                          size_t total) {
    if (names.empty() || names.size() != ratios.size())
        throw InvalidPlan("split plan needs matching, nonempty names and ratios");
    double sum = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0)) throw InvalidPlan("split ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidPlan("split ratios must sum to 1");

    SplitPlan plan;
    plan.names = std::move(names);
    plan.ratios = std::move(ratios);
    plan.total = total;
    plan.sizes.resize(plan.ratios.size());

    std::vector<double> remainders(plan.ratios.size());
    size_t assigned = 0;
    for (size_t i = 0; i < plan.ratios.size(); ++i) {
        const double exact = plan.ratios[i] * static_cast<double>(total);
        plan.sizes[i] = static_cast<size_t>(std::floor(exact));
        remainders[i] = exact - std::floor(exact);
        assigned += plan.sizes[i];
    }
    // Hand out the leftover units by descending remainder, earlier split on ties.
    std::vector<size_t> order(plan.ratios.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return remainders[a] > remainders[b]; });
    for (size_t i = 0; assigned < total; ++i, ++assigned) ++plan.sizes[order[i % order.size()]];
    return plan;
}

SplitAssignment multi_split_assign(const EmbeddingMatrix& emb, const SplitPlan& plan) {
    const size_t n = emb.count();
    const size_t n_splits = plan.names.size();
    if (plan.total > n) throw InvalidPlan("split plan total exceeds the pool size");
    if (plan.sizes.size() != n_splits ||
        std::accumulate(plan.sizes.begin(), plan.sizes.end(), size_t{0}) != plan.total)
        throw InvalidPlan("split plan sizes are not derived from the plan");
    for (size_t size : plan.sizes)
        if (size == 0) throw InvalidPlan("every split needs at least one slot");

    // Splits take their seed (and their turns) in descending ratio order.
    std::vector<size_t> split_order(n_splits);
    std::iota(split_order.begin(), split_order.end(), 0);
    std::stable_sort(split_order.begin(), split_order.end(),
                     [&](size_t a, size_t b) { return plan.ratios[a] > plan.ratios[b]; });

    SplitAssignment out;
    out.names = plan.names;
    out.indices.resize(n_splits);
    out.ids.resize(n_splits);

    std::vector<bool> in_pool(n, true);
    // Per-split min squared distance from each pool element to the split members.
    std::vector<std::vector<double>> min_dist(
        n_splits, std::vector<double>(n, std::numeric_limits<double>::infinity()));

    auto assign = [&](size_t split, size_t element) {
        out.indices[split].push_back(element);
        in_pool[element] = false;
        const double* row = emb.row(element);
        auto& dist = min_dist[split];
        for (size_t i = 0; i < n; ++i)
            if (in_pool[i])
                dist[i] = std::min(dist[i], squared_distance(emb.row(i), row, emb.dim));
    };

    const std::vector<size_t> seeds = fps_select(emb, n_splits);
    for (size_t j = 0; j < n_splits; ++j) assign(split_order[j], seeds[j]);

    // Smooth weighted round-robin: every open split accrues its ratio, the
    // highest credit takes the turn (ties to the lowest split index).
    std::vector<double> credit(n_splits, 0.0);
    size_t assigned = n_splits;
    while (assigned < plan.total) {
        size_t turn = n_splits;
        double best_credit = -std::numeric_limits<double>::infinity();
        for (size_t s = 0; s < n_splits; ++s) {
            if (out.indices[s].size() >= plan.sizes[s]) continue;  // full: skipped
            credit[s] += plan.ratios[s];
            if (credit[s] > best_credit) {
                best_credit = credit[s];
                turn = s;
            }
        }
        credit[turn] -= 1.0;

        const size_t pick = argmax(min_dist[turn], in_pool);
        assign(turn, pick);
        ++assigned;
    }

    for (size_t s = 0; s < n_splits; ++s)
        for (size_t index : out.indices[s]) out.ids[s].push_back(emb.ids[index]);
    return out;
}

}  // namespace blendforge
