#include <doctest.h>

#include <cmath>

#include "blendforge/camera.hpp"
#include "blendforge/render.hpp"
#include "blendforge/scene.hpp"
#include "test_util.hpp"

using namespace blendforge;

namespace {

Scene ambient_scene(double level) {
    Scene scene;
    scene.name = "empty";
    scene.scene_aabb = {{-1, -1, -1}, {1, 1, 1}};
    scene.lights.push_back(AmbientLight{{level, level, level}});
    return scene;
}

Scene sphere_scene(double radius) {
    Scene scene;
    scene.name = "sphere";
    SceneObject obj;
    obj.id = 1;
    obj.name = "ball";
    obj.aabb = {{-radius, -radius, -radius}, {radius, radius, radius}};
    obj.primitive = SpherePrimitive{{0, 0, 0}, radius};
    obj.material = Material{{0.8, 0.3, 0.3}};
    scene.objects.push_back(obj);
    scene.scene_aabb = obj.aabb;
    scene.lights.push_back(AmbientLight{{0.3, 0.3, 0.3}});
    scene.lights.push_back(PointLight{{5, 5, 5}, {1, 1, 1}});
    return scene;
}

CameraPose simple_pose(const Vec3& position, const Vec3& target, int res, double fov_deg = 90) {
    CameraPose pose;
    pose.position = position;
    pose.rotation = look_at_pose(position, target);
    pose.fov_y = deg_to_rad(fov_deg);
    pose.width = res;
    pose.height = res;
    return pose;
}

/// Vertical span in pixels of the rows containing `id` in the map.
int seg_vertical_span(const SegMap& seg, int id) {
    int first = -1, last = -1;
    for (int y = 0; y < seg.height; ++y)
        for (int x = 0; x < seg.width; ++x)
            if (seg.at(x, y) == id) {
                if (first < 0) first = y;
                last = y;
            }
    return first < 0 ? 0 : last - first + 1;
}

}  // namespace

TEST_CASE("empty scene renders the ambient background shade") {
    const Scene scene = ambient_scene(0.1);
    const auto [image, seg] = render_view(scene, simple_pose({3, 0, 0}, {0, 0, 0}, 16));
    // 255 * 0.1^(1/2.2) = 89.53..., quantized by truncation.
    for (auto byte : image.pixels) CHECK(byte == 89);
    for (auto id : seg.ids) CHECK(id == 0);
}

TEST_CASE("no lights means black pixels") {
    Scene scene = sphere_scene(1.0);
    scene.lights.clear();
    const auto [image, seg] = render_view(scene, simple_pose({3, 0, 0}, {0, 0, 0}, 32));
    for (auto byte : image.pixels) CHECK(byte == 0);
}

TEST_CASE("center pixel of an aimed camera hits the object") {
    const Scene scene = sphere_scene(1.0);
    const auto placement =
        place_object_cameras(scene.objects[0], CameraConfig::defaults());
    for (const auto& pose : placement.poses) {
        CameraPose small = pose;
        small.width = small.height = 33;
        const auto [image, seg] = render_view(scene, small);
        CHECK(seg.at(16, 16) == 1);
    }
}

TEST_CASE("segmentation ids match ray hits and nothing else") {
    const Scene scene = sphere_scene(1.0);
    const auto [image, seg] = render_view(scene, simple_pose({3, 0, 0}, {0, 0, 0}, 64));
    size_t hits = 0;
    for (auto id : seg.ids) {
        CHECK((id == 0 || id == 1));
        if (id == 1) ++hits;
    }
    CHECK(hits > 0);
    CHECK(hits < seg.ids.size());
}

TEST_CASE("rendering is deterministic") {
    const Scene scene = sphere_scene(0.7);
    const CameraPose pose = simple_pose({2, 1, 0.5}, {0, 0, 0}, 48);
    const auto [a_img, a_seg] = render_view(scene, pose);
    const auto [b_img, b_seg] = render_view(scene, pose);
    CHECK(a_img.pixels == b_img.pixels);
    CHECK(a_seg.ids == b_seg.ids);
}

TEST_CASE("an occluder drives the target's fill to zero") {
    // The shell must contain the sphere while the orbit (d = 1.5 r) stays
    // outside it: r < H and H * sqrt(2) < 1.5 r.
    Scene scene = sphere_scene(0.3);
    SceneObject shell;
    shell.id = 2;
    shell.name = "box";
    shell.aabb = {{-0.306, -0.306, -0.306}, {0.306, 0.306, 0.306}};
    shell.primitive = BoxPrimitive{shell.aabb};
    scene.objects.push_back(shell);
    scene.scene_aabb = Aabb::united(scene.objects[0].aabb, shell.aabb);

    // Cameras orbit the sphere from outside the shell, which swallows every ray.
    const auto placement = place_object_cameras(scene.objects[0], CameraConfig::defaults());
    for (const auto& pose : placement.poses) {
        CameraPose small = pose;
        small.width = small.height = 32;
        const auto [image, seg] = render_view(scene, small);
        for (auto id : seg.ids) CHECK(id != 1);
    }
}

TEST_CASE("rendered sphere span tracks f*height in the narrow-fov regime") {
    // At narrow fov the sphere silhouette approaches the linear projection of
    // its box span, so the rendered span lands within 3% of f * height.
    const Scene scene = sphere_scene(1.0);
    CameraConfig config = CameraConfig::defaults();
    config.fov_y = deg_to_rad(30);
    config.width = config.height = 256;
    const double expected = config.fill_fraction * config.height;

    const auto placement = place_object_cameras(scene.objects[0], config);
    REQUIRE(placement.poses.size() == 8);
    for (const auto& pose : placement.poses) {
        const auto [image, seg] = render_view(scene, pose);
        const int span = seg_vertical_span(seg, 1);
        CHECK(std::abs(span - expected) <= 0.03 * expected);
    }
}
