#include <benchmark/benchmark.h>

#include "blendforge/camera.hpp"

using namespace blendforge;

static void BM_PlaceObjectCameras(benchmark::State& state) {
    SceneObject obj;
    obj.id = 1;
    obj.aabb = {{-1.3, -0.7, 0.0}, {0.9, 1.1, 2.4}};
    CameraConfig config = CameraConfig::defaults();
    config.elevations.resize(state.range(0), 0.1);
    for (auto _ : state) {
        auto placement = place_object_cameras(obj, config);
        benchmark::DoNotOptimize(placement.poses.data());
    }
    state.SetItemsProcessed(state.iterations() * config.elevations.size() * 8);
}
BENCHMARK(BM_PlaceObjectCameras)->Arg(1)->Arg(4)->Arg(16);

static void BM_BaselinePoses(benchmark::State& state) {
    const Aabb box{{-10, -10, 0}, {10, 10, 5}};
    BaselineConfig config;
    config.method = BaselineMethod::RandomView;
    config.spatial = SpatialSampling::Grid;
    config.count = static_cast<int>(state.range(0));
    config.seed = 7;
    for (auto _ : state) {
        auto poses = sample_baseline_poses(box, "bench", config);
        benchmark::DoNotOptimize(poses.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BaselinePoses)->Range(512, 8192);
