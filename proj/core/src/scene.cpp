#include "blendforge/scene.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blendforge/errors.hpp"

namespace blendforge {

using nlohmann::ordered_json;

namespace {

// Sphere-vs-declared-aabb tolerance, relative to the box diagonal.
constexpr double kSphereBoundsTol = 1e-6;
constexpr int kMaxObjectId = 65535;  // segmentation maps store 16-bit ids

[[noreturn]] void parse_fail(const std::string& origin, const std::string& msg) {
    throw ParseError(origin + ": " + msg);
}

double as_finite_number(const ordered_json& j, const std::string& origin, const char* where) {
    if (!j.is_number()) parse_fail(origin, std::string(where) + " must be a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(origin + ": " + where + " is not finite");
    return v;
}

Vec3 as_vec3(const ordered_json& j, const std::string& origin, const char* where) {
    if (!j.is_array() || j.size() != 3) parse_fail(origin, std::string(where) + " must be [x,y,z]");
    return {as_finite_number(j[0], origin, where), as_finite_number(j[1], origin, where),
            as_finite_number(j[2], origin, where)};
}

Aabb as_aabb(const ordered_json& j, const std::string& origin, const char* where) {
    if (!j.is_object() || !j.contains("min") || !j.contains("max"))
        parse_fail(origin, std::string(where) + " must be {\"min\":[...],\"max\":[...]}");
    Aabb box{as_vec3(j.at("min"), origin, where), as_vec3(j.at("max"), origin, where)};
    if (!box.valid())
        throw ValidationError(origin + ": " + where + " has min > max (inverted AABB)");
    return box;
}

Primitive parse_primitive(const ordered_json& j, const std::string& origin) {
    if (!j.is_object() || !j.contains("type")) parse_fail(origin, "primitive must have a type");
    const std::string type = j.at("type").get<std::string>();
    if (type == "sphere") {
        SpherePrimitive s;
        s.center = as_vec3(j.at("center"), origin, "primitive.center");
        s.radius = as_finite_number(j.at("radius"), origin, "primitive.radius");
        if (s.radius <= 0) throw ValidationError(origin + ": sphere radius must be > 0");
        return s;
    }
    if (type == "box") {
        return BoxPrimitive{as_aabb(j.at("aabb"), origin, "primitive.aabb")};
    }
    parse_fail(origin, "unknown primitive type '" + type + "'");
}

Light parse_light(const ordered_json& j, const std::string& origin) {
    if (!j.is_object() || !j.contains("type")) parse_fail(origin, "light must have a type");
    const std::string type = j.at("type").get<std::string>();
    if (type == "point")
        return PointLight{as_vec3(j.at("position"), origin, "light.position"),
                          as_vec3(j.at("intensity"), origin, "light.intensity")};
    if (type == "directional")
        return DirectionalLight{as_vec3(j.at("direction"), origin, "light.direction"),
                                as_vec3(j.at("intensity"), origin, "light.intensity")};
    if (type == "ambient") return AmbientLight{as_vec3(j.at("intensity"), origin, "light.intensity")};
    parse_fail(origin, "unknown light type '" + type + "'");
}

void validate_scene(const Scene& scene, const std::string& origin) {
    std::set<int> ids;
    for (const auto& obj : scene.objects) {
        if (obj.id <= 0)
            throw ValidationError(origin + ": object id must be > 0 (0 is the background)");
        if (obj.id > kMaxObjectId)
            throw ValidationError(origin + ": object id exceeds 16-bit segmentation range");
        if (!ids.insert(obj.id).second)
            throw ValidationError(origin + ": duplicate object id " + std::to_string(obj.id));
        if (!obj.aabb.valid())
            throw ValidationError(origin + ": object " + std::to_string(obj.id) +
                                  " has an inverted AABB");
        if (obj.primitive && std::holds_alternative<SpherePrimitive>(*obj.primitive)) {
            const auto& s = std::get<SpherePrimitive>(*obj.primitive);
            const Vec3 r{s.radius, s.radius, s.radius};
            const Aabb sphere_box{s.center - r, s.center + r};
            const double tol = kSphereBoundsTol * std::max(1.0, obj.aabb.diagonal());
            if (norm(sphere_box.min - obj.aabb.min) > tol ||
                norm(sphere_box.max - obj.aabb.max) > tol)
                throw ValidationError(origin + ": object " + std::to_string(obj.id) +
                                      " sphere bounds disagree with its aabb");
        }
        if (obj.material) {
            const Vec3& a = obj.material->albedo;
            if (!a.finite() || a.x < 0 || a.x > 1 || a.y < 0 || a.y > 1 || a.z < 0 || a.z > 1)
                throw ValidationError(origin + ": object " + std::to_string(obj.id) +
                                      " albedo must be in [0,1]^3");
        }
    }
    for (const auto& obj : scene.objects)
        if (!scene.scene_aabb.contains(obj.aabb))
            throw ValidationError(origin + ": scene_aabb does not contain object " +
                                  std::to_string(obj.id));
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

ordered_json aabb_json(const Aabb& b) {
    return ordered_json{{"min", vec3_json(b.min)}, {"max", vec3_json(b.max)}};
}

}  // namespace

const SceneObject* Scene::find_object(int id) const {
    for (const auto& o : objects)
        if (o.id == id) return &o;
    return nullptr;
}

Scene parse_scene(const std::string& json_text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!j.is_object()) parse_fail(origin, "top level must be a JSON object");

    Scene scene;
    try {
        scene.name = j.value("name", std::string{});
        for (const auto& jo : j.value("objects", ordered_json::array())) {
            SceneObject obj;
            if (!jo.contains("id") || !jo.at("id").is_number_integer())
                parse_fail(origin, "object.id must be an integer");
            obj.id = jo.at("id").get<int>();
            obj.name = jo.value("name", std::string{});
            if (!jo.contains("aabb")) parse_fail(origin, "object.aabb is required");
            obj.aabb = as_aabb(jo.at("aabb"), origin, "object.aabb");
            if (jo.contains("primitive")) obj.primitive = parse_primitive(jo.at("primitive"), origin);
            if (jo.contains("material")) {
                if (!jo.at("material").contains("albedo"))
                    parse_fail(origin, "material.albedo is required");
                obj.material =
                    Material{as_vec3(jo.at("material").at("albedo"), origin, "material.albedo")};
            }
            scene.objects.push_back(std::move(obj));
        }
        for (const auto& jl : j.value("lights", ordered_json::array()))
            scene.lights.push_back(parse_light(jl, origin));

        if (j.contains("scene_aabb")) {
            scene.scene_aabb = as_aabb(j.at("scene_aabb"), origin, "scene_aabb");
        } else {
            if (scene.objects.empty())
                throw ValidationError(origin + ": scene_aabb required for a scene with no objects");
            Aabb u = scene.objects.front().aabb;
            for (const auto& o : scene.objects) u = Aabb::united(u, o.aabb);
            scene.scene_aabb = u;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    validate_scene(scene, origin);
    return scene;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scene file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str(), path);
}

std::string scene_to_json(const Scene& scene) {
    ordered_json j;
    j["name"] = scene.name;
    j["objects"] = ordered_json::array();
    for (const auto& obj : scene.objects) {
        ordered_json jo;
        jo["id"] = obj.id;
        jo["name"] = obj.name;
        jo["aabb"] = aabb_json(obj.aabb);
        if (obj.primitive) {
            if (const auto* s = std::get_if<SpherePrimitive>(&*obj.primitive))
                jo["primitive"] = {{"type", "sphere"}, {"center", vec3_json(s->center)},
                                   {"radius", s->radius}};
            else
                jo["primitive"] = {{"type", "box"},
                                   {"aabb", aabb_json(std::get<BoxPrimitive>(*obj.primitive).aabb)}};
        }
        if (obj.material) jo["material"] = {{"albedo", vec3_json(obj.material->albedo)}};
        j["objects"].push_back(std::move(jo));
    }
    j["lights"] = ordered_json::array();
    for (const auto& light : scene.lights) {
        if (const auto* p = std::get_if<PointLight>(&light))
            j["lights"].push_back({{"type", "point"}, {"position", vec3_json(p->position)},
                                   {"intensity", vec3_json(p->intensity)}});
        else if (const auto* d = std::get_if<DirectionalLight>(&light))
            j["lights"].push_back({{"type", "directional"}, {"direction", vec3_json(d->direction)},
                                   {"intensity", vec3_json(d->intensity)}});
        else
            j["lights"].push_back({{"type", "ambient"},
                                   {"intensity", vec3_json(std::get<AmbientLight>(light).intensity)}});
    }
    j["scene_aabb"] = aabb_json(scene.scene_aabb);
    return j.dump(2) + "\n";
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write scene file: " + path);
    out << scene_to_json(scene);
}

}  // namespace blendforge
