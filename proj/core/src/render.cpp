#include "blendforge/render.hpp"

#include <cmath>
#include <limits>

#include "blendforge/errors.hpp"

namespace blendforge {

namespace {

constexpr double kTMin = 1e-4;  // self-intersection offset
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit
};

struct Hit {
    double t = kInf;
    Vec3 point;
    Vec3 normal;
    int object_id = 0;
    Vec3 albedo{0.8, 0.8, 0.8};
};

// Quadratic in the numerically stable q-form.
bool intersect_sphere(const Ray& ray, const SpherePrimitive& s, double t_max, double& t_out) {
    const Vec3 oc = ray.origin - s.center;
    const double b = dot(oc, ray.dir);
    const double c = dot(oc, oc) - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return false;
    const double sqrt_disc = std::sqrt(disc);
    const double q = -(b + std::copysign(sqrt_disc, b));
    double t0 = q;
    double t1 = (q != 0.0) ? c / q : -b;
    if (t0 > t1) std::swap(t0, t1);
    double t = t0;
    if (t <= kTMin) t = t1;
    if (t <= kTMin || t >= t_max) return false;
    t_out = t;
    return true;
}

// Slab method; returns entry t (or exit t when the origin is inside the box).
bool intersect_box(const Ray& ray, const Aabb& box, double t_max, double& t_out) {
    double t_lo = -kInf, t_hi = kInf;
    for (int c = 0; c < 3; ++c) {
        const double o = ray.origin[c];
        const double d = ray.dir[c];
        const double lo = box.min[c];
        const double hi = box.max[c];
        if (std::abs(d) < 1e-300) {
            if (o < lo || o > hi) return false;
            continue;
        }
        double t1 = (lo - o) / d;
        double t2 = (hi - o) / d;
        if (t1 > t2) std::swap(t1, t2);
        t_lo = std::max(t_lo, t1);
        t_hi = std::min(t_hi, t2);
        if (t_lo > t_hi) return false;
    }
    if (t_lo > kTMin && t_lo < t_max) {
        t_out = t_lo;
        return true;
    }
    if (t_hi > kTMin && t_hi < t_max) {
        // Origin inside the box: the exit face is the visible one.
        t_out = t_hi;
        return true;
    }
    return false;
}

Vec3 box_normal(const Aabb& box, const Vec3& point) {
    // Outward normal of the face plane nearest the hit point.
    double best = kInf;
    Vec3 n{1, 0, 0};
    for (int axis = 0; axis < 3; ++axis) {
        const double d_min = std::abs(point[axis] - box.min[axis]);
        const double d_max = std::abs(point[axis] - box.max[axis]);
        if (d_min < best) {
            best = d_min;
            n = Vec3{axis == 0 ? -1.0 : 0.0, axis == 1 ? -1.0 : 0.0, axis == 2 ? -1.0 : 0.0};
        }
        if (d_max < best) {
            best = d_max;
            n = Vec3{axis == 0 ? 1.0 : 0.0, axis == 1 ? 1.0 : 0.0, axis == 2 ? 1.0 : 0.0};
        }
    }
    return n;
}

bool nearest_hit(const Scene& scene, const Ray& ray, double t_max, Hit& hit) {
    bool found = false;
    for (const auto& obj : scene.objects) {
        if (!obj.primitive) continue;
        double t;
        if (const auto* sphere = std::get_if<SpherePrimitive>(&*obj.primitive)) {
            if (intersect_sphere(ray, *sphere, std::min(hit.t, t_max), t)) {
                hit.t = t;
                hit.point = ray.origin + t * ray.dir;
                hit.normal = normalized(hit.point - sphere->center);
                hit.object_id = obj.id;
                hit.albedo = obj.material ? obj.material->albedo : Material{}.albedo;
                found = true;
            }
        } else {
            const auto& box = std::get<BoxPrimitive>(*obj.primitive).aabb;
            if (intersect_box(ray, box, std::min(hit.t, t_max), t)) {
                hit.t = t;
                hit.point = ray.origin + t * ray.dir;
                hit.normal = box_normal(box, hit.point);
                hit.object_id = obj.id;
                hit.albedo = obj.material ? obj.material->albedo : Material{}.albedo;
                found = true;
            }
        }
    }
    return found;
}

bool occluded(const Scene& scene, const Ray& ray, double t_max) {
    Hit hit;
    return nearest_hit(scene, ray, t_max, hit);
}

Vec3 shade(const Scene& scene, const Hit& hit) {
    Vec3 irradiance{0, 0, 0};
    for (const auto& light : scene.lights) {
        if (const auto* ambient = std::get_if<AmbientLight>(&light)) {
            irradiance += ambient->intensity;
        } else if (const auto* point = std::get_if<PointLight>(&light)) {
            const Vec3 to_light = point->position - hit.point;
            const double dist = norm(to_light);
            if (dist <= 0) continue;
            const Vec3 l = to_light / dist;
            const double lambert = dot(hit.normal, l);
            if (lambert <= 0) continue;
            if (occluded(scene, {hit.point, l}, dist)) continue;
            irradiance += point->intensity * lambert;
        } else {
            const auto& dir_light = std::get<DirectionalLight>(light);
            const Vec3 l = normalized(-dir_light.direction);
            const double lambert = dot(hit.normal, l);
            if (lambert <= 0) continue;
            if (occluded(scene, {hit.point, l}, kInf)) continue;
            irradiance += dir_light.intensity * lambert;
        }
    }
    return {hit.albedo.x * irradiance.x, hit.albedo.y * irradiance.y, hit.albedo.z * irradiance.z};
}

Vec3 background_shade(const Scene& scene) {
    Vec3 sum{0, 0, 0};
    for (const auto& light : scene.lights)
        if (const auto* ambient = std::get_if<AmbientLight>(&light)) sum += ambient->intensity;
    return sum;
}

std::uint8_t encode_channel(double linear) {
    const double clamped = std::min(1.0, std::max(0.0, linear));
    const double encoded = std::pow(clamped, 1.0 / 2.2);
    return static_cast<std::uint8_t>(encoded * 255.0);
}

}  // namespace

std::pair<RgbImage, SegMap> render_view(const Scene& scene, const CameraPose& pose) {
    if (pose.width <= 0 || pose.height <= 0)
        throw InvalidConfig("render_view: resolution must be positive");

    const int w = pose.width;
    const int h = pose.height;
    RgbImage image(w, h);
    SegMap seg(w, h);

    const double tan_half_y = std::tan(pose.fov_y / 2.0);
    const double tan_half_x = tan_half_y * static_cast<double>(w) / static_cast<double>(h);
    const Basis& basis = pose.rotation;
    const Vec3 background = background_shade(scene);

    for (int y = 0; y < h; ++y) {
        // Row 0 is the top of the image.
        const double v = 1.0 - 2.0 * (y + 0.5) / h;
        for (int x = 0; x < w; ++x) {
            const double u = 2.0 * (x + 0.5) / w - 1.0;
            const Vec3 dir = normalized(basis.forward + u * tan_half_x * basis.right +
                                        v * tan_half_y * basis.up);
            Hit hit;
            Vec3 color = background;
            if (nearest_hit(scene, {pose.position, dir}, kInf, hit)) {
                color = shade(scene, hit);
                seg.at(x, y) = static_cast<std::uint16_t>(hit.object_id);
            }
            std::uint8_t* px = image.at(x, y);
            px[0] = encode_channel(color.x);
            px[1] = encode_channel(color.y);
            px[2] = encode_channel(color.z);
        }
    }
    return {std::move(image), std::move(seg)};
}

}  // namespace blendforge
