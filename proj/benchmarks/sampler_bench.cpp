#include <benchmark/benchmark.h>

#include "blendforge/rng.hpp"
#include "blendforge/sampler.hpp"

using namespace blendforge;

namespace {

EmbeddingMatrix bench_matrix(size_t n, int dim) {
    Rng rng(1234);
    std::vector<std::string> ids;
    std::vector<double> raw(n * dim);
    for (size_t i = 0; i < n; ++i) {
        ids.push_back("b" + std::to_string(i));
        for (int d = 0; d < dim; ++d) raw[i * dim + d] = rng.uniform(-1, 1);
    }
    return normalize_embeddings(ids, dim, std::move(raw));
}

}  // namespace

static void BM_FpsSelect(benchmark::State& state) {
    const auto emb = bench_matrix(state.range(0), 64);
    const size_t k = state.range(0) / 4;
    for (auto _ : state) {
        auto order = fps_select(emb, k);
        benchmark::DoNotOptimize(order.data());
    }
    state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(BM_FpsSelect)->Range(512, 4096);

static void BM_MultiSplitAssign(benchmark::State& state) {
    const auto emb = bench_matrix(state.range(0), 64);
    const auto plan =
        SplitPlan::make({"train", "val", "test"}, {0.6, 0.2, 0.2}, state.range(0) / 2);
    for (auto _ : state) {
        auto assignment = multi_split_assign(emb, plan);
        benchmark::DoNotOptimize(assignment.indices.data());
    }
    state.SetItemsProcessed(state.iterations() * plan.total);
}
BENCHMARK(BM_MultiSplitAssign)->Range(512, 4096);
