#include "blendforge/camera.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blendforge/errors.hpp"
#include "blendforge/rng.hpp"

namespace blendforge {

using nlohmann::ordered_json;

namespace {

constexpr double kUpSingularity = 1.0 - 1e-6;
constexpr double kRelativeSpanEps = 1e-9;

Basis basis_from_forward_unchecked(const Vec3& forward) {
    const Vec3 up_ref = std::abs(dot(forward, kWorldUp)) > kUpSingularity ? Vec3{0, 1, 0} : kWorldUp;
    const Vec3 right = normalized(cross(forward, up_ref));
    const Vec3 up = cross(right, forward);
    return {right, up, forward};
}

}  // namespace

CameraConfig CameraConfig::defaults() {
    CameraConfig c;
    for (int i = 0; i < 8; ++i) c.azimuths.push_back(deg_to_rad(45.0 * i));
    c.elevations = {0.0};
    return c;
}

Vec3 viewing_direction(double azimuth, double elevation) {
    if (!std::isfinite(azimuth) || !std::isfinite(elevation))
        throw InvalidConfig("viewing_direction: angles must be finite");
    const Vec3 v{std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                 std::sin(elevation)};
    return normalized(v);
}

double projected_half_height(const Aabb& aabb, const Vec3& view_dir) {
    if (!aabb.valid()) throw ValidationError("projected_half_height: invalid AABB");
    const double diag = aabb.diagonal();
    if (diag == 0.0) throw DegenerateObject("projected_half_height: fully degenerate box");

    // Camera sits along +view_dir and looks back at the center.
    const Basis basis = basis_from_forward_unchecked(normalized(-view_dir));
    const Vec3 center = aabb.center();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 8; ++i) {
        const double p = dot(aabb.corner(i) - center, basis.up);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    const double h = 0.5 * (hi - lo);
    if (h < kRelativeSpanEps * diag)
        throw DegenerateObject("projected_half_height: zero vertical span for this view");
    return h;
}

double camera_distance(double h_o, double fill_fraction, double fov_y) {
    if (!(h_o > 0.0)) throw DegenerateObject("camera_distance: h_o must be > 0");
    if (!(fill_fraction > 0.0 && fill_fraction <= 1.0))
        throw InvalidConfig("camera_distance: fill fraction must be in (0, 1]");
    if (!(fov_y > 0.0 && fov_y < kPi))
        throw InvalidConfig("camera_distance: fov_y must be in (0, pi)");
    return h_o / (fill_fraction * std::tan(fov_y / 2.0));
}

Basis look_at_pose(const Vec3& position, const Vec3& target) {
    const Vec3 delta = target - position;
    if (norm(delta) < 1e-12) throw DegeneratePose("look_at_pose: position == target");
    return basis_from_forward_unchecked(normalized(delta));
}

Basis basis_from_forward(const Vec3& forward) {
    const double n = norm(forward);
    if (n < 1e-12) throw DegeneratePose("basis_from_forward: zero forward vector");
    return basis_from_forward_unchecked(forward / n);
}

ObjectPlacement place_object_cameras(const SceneObject& object, const CameraConfig& config) {
    if (config.azimuths.empty() || config.elevations.empty())
        throw InvalidConfig("place_object_cameras: empty azimuth or elevation set");
    if (!(config.fill_fraction > 0.0 && config.fill_fraction <= 1.0))
        throw InvalidConfig("place_object_cameras: fill fraction must be in (0, 1]");
    if (config.width <= 0 || config.height <= 0)
        throw InvalidConfig("place_object_cameras: resolution must be positive");

    const double diag = object.aabb.diagonal();
    if (config.min_bbox_diagonal && diag < *config.min_bbox_diagonal)
        throw ObjectSkipped("object " + std::to_string(object.id) + " below min bbox diagonal (" +
                            std::to_string(diag) + " < " +
                            std::to_string(*config.min_bbox_diagonal) + ")");
    if (diag == 0.0)
        throw ObjectSkipped("object " + std::to_string(object.id) + " has a degenerate box");

    const Vec3 center = object.aabb.center();
    ObjectPlacement out;
    int view_index = 0;
    for (double elevation : config.elevations) {
        for (double azimuth : config.azimuths) {
            const int index = view_index++;
            const Vec3 v = viewing_direction(azimuth, elevation);
            double h_o;
            try {
                h_o = projected_half_height(object.aabb, v);
            } catch (const DegenerateObject& e) {
                out.skipped_views.push_back({azimuth, elevation, e.what()});
                continue;
            }
            const double d = camera_distance(h_o, config.fill_fraction, config.fov_y);
            CameraPose pose;
            pose.position = center + d * v;
            pose.rotation = look_at_pose(pose.position, center);
            pose.fov_y = config.fov_y;
            pose.width = config.width;
            pose.height = config.height;
            pose.provenance = ObjectViewProvenance{object.id, azimuth, elevation, d, index};
            out.poses.push_back(std::move(pose));
        }
    }
    return out;
}

std::string baseline_method_name(BaselineMethod m) {
    return m == BaselineMethod::RandomView ? "random_view" : "anchor_sweep";
}

std::string spatial_name(SpatialSampling s) {
    return s == SpatialSampling::Uniform ? "uniform" : "grid";
}

namespace {

Vec3 uniform_in_box(Rng& rng, const Vec3& lo, const Vec3& hi) {
    const double x = rng.uniform(lo.x, hi.x);
    const double y = rng.uniform(lo.y, hi.y);
    const double z = rng.uniform(lo.z, hi.z);
    return {x, y, z};
}

// Equal per-cell quota, remainder to the lowest-index cells; positions drawn
// cell-major so the sequence is independent of how they are consumed.
std::vector<Vec3> sample_positions(Rng& rng, const Aabb& box, SpatialSampling spatial, int grid_n,
                                   int n_positions) {
    std::vector<Vec3> positions;
    positions.reserve(n_positions);
    if (spatial == SpatialSampling::Uniform) {
        for (int i = 0; i < n_positions; ++i)
            positions.push_back(uniform_in_box(rng, box.min, box.max));
        return positions;
    }
    if (grid_n < 1) throw InvalidConfig("grid sampling requires n >= 1");
    const int cells = grid_n * grid_n * grid_n;
    const int base = n_positions / cells;
    const int remainder = n_positions % cells;
    const Vec3 cell_size = box.extent() / static_cast<double>(grid_n);
    for (int cell = 0; cell < cells; ++cell) {
        const int ix = cell % grid_n;
        const int iy = (cell / grid_n) % grid_n;
        const int iz = cell / (grid_n * grid_n);
        const Vec3 lo = box.min + Vec3{ix * cell_size.x, iy * cell_size.y, iz * cell_size.z};
        const Vec3 hi = lo + cell_size;
        const int quota = base + (cell < remainder ? 1 : 0);
        for (int i = 0; i < quota; ++i) positions.push_back(uniform_in_box(rng, lo, hi));
    }
    return positions;
}

}  // namespace

std::vector<CameraPose> sample_baseline_poses(const Aabb& scene_aabb,
                                              const std::string& scene_name,
                                              const BaselineConfig& config) {
    if (config.count <= 0) throw InvalidConfig("baseline sampling requires count > 0");
    if (!scene_aabb.valid()) throw ValidationError("baseline sampling: invalid scene AABB");

    const std::string method = baseline_method_name(config.method);
    Rng rng(config.seed, method + "/" + scene_name);

    std::vector<CameraPose> poses;
    poses.reserve(config.count);

    auto make_pose = [&](const Vec3& position, double azimuth, double elevation, int index) {
        CameraPose pose;
        pose.position = position;
        pose.rotation = basis_from_forward(viewing_direction(azimuth, elevation));
        pose.fov_y = config.fov_y;
        pose.width = config.width;
        pose.height = config.height;
        pose.provenance =
            BaselineProvenance{method, spatial_name(config.spatial), index, azimuth, elevation};
        return pose;
    };

    if (config.method == BaselineMethod::RandomView) {
        const auto positions =
            sample_positions(rng, scene_aabb, config.spatial, config.grid_n, config.count);
        for (int i = 0; i < config.count; ++i) {
            const double azimuth = rng.uniform(0.0, 2.0 * kPi);
            const double elevation = rng.uniform(-kPi / 6.0, kPi / 6.0);
            poses.push_back(make_pose(positions[i], azimuth, elevation, i));
        }
    } else {
        const int anchors = (config.count + 7) / 8;
        const auto positions =
            sample_positions(rng, scene_aabb, config.spatial, config.grid_n, anchors);
        int index = 0;
        for (int a = 0; a < anchors && index < config.count; ++a) {
            for (int k = 0; k < 8 && index < config.count; ++k) {
                poses.push_back(make_pose(positions[a], deg_to_rad(45.0 * k), 0.0, index));
                ++index;
            }
        }
    }
    return poses;
}

namespace {

ordered_json pose_to_json(const std::string& id, const CameraPose& pose) {
    ordered_json j;
    j["id"] = id;
    double azimuth = 0.0, elevation = 0.0, distance = 0.0;
    if (const auto* ov = std::get_if<ObjectViewProvenance>(&pose.provenance)) {
        j["object_id"] = ov->object_id;
        j["method"] = "object_centric";
        azimuth = ov->azimuth;
        elevation = ov->elevation;
        distance = ov->distance;
    } else {
        const auto& b = std::get<BaselineProvenance>(pose.provenance);
        j["method"] = b.method;
        j["spatial"] = b.spatial;
        azimuth = b.azimuth;
        elevation = b.elevation;
    }
    j["azimuth_deg"] = rad_to_deg(azimuth);
    j["elevation_deg"] = rad_to_deg(elevation);
    j["distance"] = distance;
    j["position"] = {pose.position.x, pose.position.y, pose.position.z};
    const Basis& r = pose.rotation;
    j["rotation"] = {r.right.x, r.right.y, r.right.z, r.up.x,      r.up.y,
                     r.up.z,    r.forward.x, r.forward.y, r.forward.z};
    j["fov_y_deg"] = rad_to_deg(pose.fov_y);
    j["width"] = pose.width;
    j["height"] = pose.height;
    return j;
}

}  // namespace

void write_poses_jsonl(const std::vector<std::pair<std::string, CameraPose>>& poses,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write pose file: " + path);
    for (const auto& [id, pose] : poses) out << pose_to_json(id, pose).dump() << "\n";
}

std::vector<std::pair<std::string, CameraPose>> read_poses_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pose file: " + path);
    std::vector<std::pair<std::string, CameraPose>> poses;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        CameraPose pose;
        pose.position = {j.at("position")[0], j.at("position")[1], j.at("position")[2]};
        const auto& r = j.at("rotation");
        pose.rotation = {{r[0], r[1], r[2]}, {r[3], r[4], r[5]}, {r[6], r[7], r[8]}};
        pose.fov_y = deg_to_rad(j.at("fov_y_deg").get<double>());
        pose.width = j.at("width").get<int>();
        pose.height = j.at("height").get<int>();
        const std::string method = j.at("method").get<std::string>();
        const double azimuth = deg_to_rad(j.at("azimuth_deg").get<double>());
        const double elevation = deg_to_rad(j.at("elevation_deg").get<double>());
        if (method == "object_centric") {
            pose.provenance = ObjectViewProvenance{j.at("object_id").get<int>(), azimuth, elevation,
                                                   j.at("distance").get<double>(), 0};
        } else {
            pose.provenance = BaselineProvenance{method, j.value("spatial", std::string{"uniform"}),
                                                 0, azimuth, elevation};
        }
        poses.emplace_back(j.at("id").get<std::string>(), std::move(pose));
    }
    return poses;
}

}  // namespace blendforge
