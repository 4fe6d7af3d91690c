#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "blendforge/camera.hpp"
#include "blendforge/geometry.hpp"
#include "blendforge/sampler.hpp"

namespace bftest {

/// Scratch directory under the system temp root, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("blendforge_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& rel = {}) const {
        return rel.empty() ? path_.string() : (path_ / rel).string();
    }

  private:
    std::filesystem::path path_;
};

/// Independent pinhole projection: returns the pixel offset of `point` from
/// the image center along the camera-up axis (positive = up), derived from
/// first principles rather than the renderer's ray setup.
inline double project_vertical_offset_px(const blendforge::CameraPose& pose,
                                         const blendforge::Vec3& point) {
    using namespace blendforge;
    const Vec3 rel = point - pose.position;
    const double depth = dot(rel, pose.rotation.forward);
    const double y = dot(rel, pose.rotation.up);
    return y / (depth * std::tan(pose.fov_y / 2.0)) * (pose.height / 2.0);
}

/// Brute-force FPS oracle step: scans every remaining candidate and computes
/// its min distance to the selected set from scratch (ties -> lowest index).
inline size_t fps_oracle_step(const blendforge::EmbeddingMatrix& emb,
                              const std::vector<size_t>& selected,
                              const std::vector<bool>& remaining) {
    size_t best = std::numeric_limits<size_t>::max();
    double best_dist = -1.0;
    for (size_t i = 0; i < emb.count(); ++i) {
        if (!remaining[i]) continue;
        double min_dist = std::numeric_limits<double>::infinity();
        for (size_t s : selected) {
            double sum = 0.0;
            for (int d = 0; d < emb.dim; ++d) {
                const double diff = emb.row(i)[d] - emb.row(s)[d];
                sum += diff * diff;
            }
            min_dist = std::min(min_dist, sum);
        }
        if (min_dist > best_dist) {
            best_dist = min_dist;
            best = i;
        }
    }
    return best;
}

/// Random unit-vector matrix for sampler tests (std::mt19937 is fine here;
/// the platform-stable generator is only required in the library itself).
inline blendforge::EmbeddingMatrix random_unit_matrix(size_t n, int dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::string> ids;
    std::vector<double> raw(n * dim);
    for (size_t i = 0; i < n; ++i) {
        ids.push_back("img" + std::to_string(i));
        double sum = 0.0;
        for (int d = 0; d < dim; ++d) {
            raw[i * dim + d] = gauss(rng);
            sum += raw[i * dim + d] * raw[i * dim + d];
        }
        if (sum == 0.0) raw[i * dim] = 1.0;
    }
    return blendforge::normalize_embeddings(ids, dim, std::move(raw));
}

}  // namespace bftest
