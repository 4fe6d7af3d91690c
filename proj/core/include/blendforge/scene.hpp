#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blendforge/geometry.hpp"

namespace blendforge {

struct SpherePrimitive {
    Vec3 center;
    double radius = 0.0;
};

struct BoxPrimitive {
    Aabb aabb;
};

using Primitive = std::variant<SpherePrimitive, BoxPrimitive>;

struct Material {
    Vec3 albedo{0.8, 0.8, 0.8};  // RGB in [0,1]
};

struct PointLight {
    Vec3 position;
    Vec3 intensity;
};

struct DirectionalLight {
    Vec3 direction;  // direction the light travels; shading uses -direction
    Vec3 intensity;
};

struct AmbientLight {
    Vec3 intensity;
};

using Light = std::variant<PointLight, DirectionalLight, AmbientLight>;

struct SceneObject {
    int id = 0;  // > 0; 0 is reserved for the segmentation background
    std::string name;
    Aabb aabb;
    std::optional<Primitive> primitive;
    std::optional<Material> material;
};

/// Immutable after load; safe for concurrent reads.
struct Scene {
    std::string name;
    std::vector<SceneObject> objects;
    std::vector<Light> lights;
    Aabb scene_aabb;

    const SceneObject* find_object(int id) const;
};

/// Loads and validates a scene JSON file. scene_aabb falls back to the union
/// of object boxes when the file does not set it explicitly.
///
/// Throws ParseError on malformed JSON / schema violations and ValidationError
/// on semantic violations (duplicate ids, inverted AABBs, non-finite numbers,
/// sphere primitive whose bounds disagree with the declared aabb).
Scene load_scene(const std::string& path);

/// Parses a scene from a JSON string (same contract as load_scene).
Scene parse_scene(const std::string& json_text, const std::string& origin = "<string>");

/// Writes the scene back out as JSON. load(save(s)) == s field-by-field.
void save_scene(const Scene& scene, const std::string& path);

std::string scene_to_json(const Scene& scene);

}  // namespace blendforge
