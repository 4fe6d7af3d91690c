#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blendforge/geometry.hpp"
#include "blendforge/scene.hpp"

namespace blendforge {

/// Orthonormal camera basis. forward points at the target; the exported
/// world-from-camera matrix for -Z-looking renderers is [right, up, -forward].
struct Basis {
    Vec3 right;
    Vec3 up;
    Vec3 forward;
};

struct ObjectViewProvenance {
    int object_id = 0;
    double azimuth = 0.0;    // radians
    double elevation = 0.0;  // radians
    double distance = 0.0;
    int view_index = 0;  // stable index over the elevation x azimuth lattice
};

struct BaselineProvenance {
    std::string method;   // "random_view" | "anchor_sweep"
    std::string spatial;  // "uniform" | "grid"
    int sample_index = 0;
    double azimuth = 0.0;
    double elevation = 0.0;
};

struct CameraPose {
    Vec3 position;
    Basis rotation;
    double fov_y = kPi / 2;  // radians
    int width = 256;
    int height = 256;
    std::variant<ObjectViewProvenance, BaselineProvenance> provenance;
};

struct CameraConfig {
    std::vector<double> azimuths;    // radians; default 8 values every 45 deg
    std::vector<double> elevations;  // radians; default {0}
    double fov_y = kPi / 2;
    double fill_fraction = 2.0 / 3.0;
    int width = 256;
    int height = 256;
    std::optional<double> min_bbox_diagonal;

    static CameraConfig defaults();
};

/// Unit direction from object center toward the camera:
/// (cos(el)cos(az), cos(el)sin(az), sin(el)).
Vec3 viewing_direction(double azimuth, double elevation);

/// Half of the vertical span of the box as seen from view_dir: the eight
/// corners, taken relative to the box center, are projected onto the camera-up
/// axis induced by view_dir. Throws DegenerateObject when the span vanishes
/// (below 1e-9 of the box diagonal).
double projected_half_height(const Aabb& aabb, const Vec3& view_dir);

/// d = h_o / (f * tan(fov_y / 2)).
double camera_distance(double h_o, double fill_fraction, double fov_y);

/// Builds the look-at basis: forward toward target, right/up via world up
/// (+Z), falling back to +Y when forward is within 1e-6 of vertical.
Basis look_at_pose(const Vec3& position, const Vec3& target);

/// Basis for a camera looking along `forward` (same up/fallback rule).
Basis basis_from_forward(const Vec3& forward);

struct SkippedView {
    double azimuth = 0.0;
    double elevation = 0.0;
    std::string reason;
};

struct ObjectPlacement {
    std::vector<CameraPose> poses;
    std::vector<SkippedView> skipped_views;  // per-view degenerate projections
};

/// Orbit placement around the object's AABB center: one pose per
/// (elevation, azimuth) pair at the distance that puts the projected box span
/// at fill_fraction of the image height. Throws ObjectSkipped when the object
/// fails the min_bbox_diagonal filter or its box is fully degenerate;
/// per-view degenerate projections are returned in skipped_views.
ObjectPlacement place_object_cameras(const SceneObject& object, const CameraConfig& config);

enum class BaselineMethod { RandomView, AnchorSweep };
enum class SpatialSampling { Uniform, Grid };

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::RandomView;
    SpatialSampling spatial = SpatialSampling::Uniform;
    int grid_n = 4;
    int count = 0;
    std::uint64_t seed = 0;
    double fov_y = kPi / 2;
    int width = 256;
    int height = 256;
};

std::string baseline_method_name(BaselineMethod m);
std::string spatial_name(SpatialSampling s);

/// Object-agnostic pose sampling inside scene_aabb.
///
/// random_view: `count` positions, each looking along a random direction with
/// elevation in [-30, +30] degrees. anchor_sweep: ceil(count/8) anchor
/// positions with 8 outward views every 45 degrees at elevation 0, truncated
/// to `count`. The grid variant splits the box into n^3 cells (cell index
/// ix + n*(iy + n*iz)) and draws an equal position quota per cell, remainder
/// going to the lowest-index cells.
///
/// Deterministic: positions are drawn first (uniform: sequentially; grid:
/// cell-major, 3 draws each), then for random_view one azimuth in [0, 2pi)
/// and one elevation per pose, all from one stream seeded by
/// (seed, "<method>/<scene_name>").
std::vector<CameraPose> sample_baseline_poses(const Aabb& scene_aabb,
                                              const std::string& scene_name,
                                              const BaselineConfig& config);

/// JSONL export, one pose per line. See docs/pose-format notes in README for
/// the mapping to a world-from-camera 4x4.
void write_poses_jsonl(const std::vector<std::pair<std::string, CameraPose>>& poses,
                       const std::string& path);

std::vector<std::pair<std::string, CameraPose>> read_poses_jsonl(const std::string& path);

}  // namespace blendforge
