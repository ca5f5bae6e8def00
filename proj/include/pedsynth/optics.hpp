#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pedsynth/errors.hpp"
#include "pedsynth/geometry.hpp"

namespace pedsynth {

struct CameraRig {
    std::string id;
    Vec3 position;
    Vec3 look_at;
    double vertical_fov_deg = 60.0;
    int width = 1920;
    int height = 1080;
    double near_m = 0.1;
    double far_m = 100.0;

    void validate() const {
        if (vertical_fov_deg <= 0 || vertical_fov_deg >= 180)
            throw ValidationError("camera " + id + ": vertical fov must be in (0,180)");
        if (near_m >= far_m)
            throw ValidationError("camera " + id + ": near must be less than far");
        if (width <= 0 || height <= 0)
            throw ValidationError("camera " + id + ": resolution must be positive");
        if (length(look_at - position) == 0)
            throw ValidationError("camera " + id + ": look_at coincides with position");
    }
};

struct ImagePoint {
    double u = 0, v = 0; // pixels, origin top-left
    double depth = 0;    // meters along the optical axis
};

// Camera basis: forward toward look_at, zero roll (up = world +y).
struct CameraBasis {
    Vec3 right, up, forward;
};

inline CameraBasis camera_basis(const CameraRig& rig) {
    const Vec3 forward = normalized(rig.look_at - rig.position);
    Vec3 up{0, 1, 0};
    // x right, y up, z forward, so that u grows toward world +x for a camera
    // facing +z
    Vec3 right = cross(up, forward);
    const double rl = length(right);
    if (rl < 1e-12)
        throw ValidationError("camera " + rig.id + ": looking straight along +y is unsupported");
    right = right / rl;
    up = cross(forward, right);
    return {right, up, forward};
}

inline double focal_length_px(const CameraRig& rig) {
    return (rig.height / 2.0) / std::tan(rig.vertical_fov_deg * M_PI / 360.0);
}

// Pinhole projection. nullopt = point at or behind the camera plane.
inline std::optional<ImagePoint> project(const CameraRig& rig, const Vec3& world_point) {
    const CameraBasis basis = camera_basis(rig);
    const Vec3 d = world_point - rig.position;
    if (length(d) < 1e-12)
        throw ValidationError("cannot project the camera center");
    const double depth = dot(d, basis.forward);
    if (depth <= 0) return std::nullopt;
    const double f = focal_length_px(rig);
    ImagePoint p;
    p.u = rig.width / 2.0 + f * dot(d, basis.right) / depth;
    p.v = rig.height / 2.0 - f * dot(d, basis.up) / depth;
    p.depth = depth;
    return p;
}

inline bool in_frustum(const CameraRig& rig, const Vec3& point) {
    const auto p = project(rig, point);
    if (!p) return false;
    return p->u >= 0 && p->u < rig.width && p->v >= 0 && p->v < rig.height &&
           p->depth >= rig.near_m && p->depth <= rig.far_m;
}

// Vertical capsule approximating an agent body for occlusion queries.
struct BodyCapsule {
    Vec3 foot_center;  // ground point
    double height_m = 1.7;
    double radius_m = 0.2;
};

inline double capsule_radius_for(double weight_norm) {
    return 0.15 + 0.1 * weight_norm;
}

// Fraction of `keypoints` whose sight line to the camera clears every
// occluder capsule.
inline double visibility(const CameraRig& rig, const std::vector<Vec3>& keypoints,
                         const std::vector<BodyCapsule>& occluders) {
    if (keypoints.empty()) return 1.0;
    int clear = 0;
    for (const Vec3& kp : keypoints) {
        bool blocked = false;
        for (const BodyCapsule& cap : occluders) {
            const Vec3 axis_lo = cap.foot_center + Vec3{0, cap.radius_m, 0};
            const Vec3 axis_hi = cap.foot_center + Vec3{0, cap.height_m - cap.radius_m, 0};
            if (segment_segment_distance(rig.position, kp, axis_lo, axis_hi) < cap.radius_m) {
                blocked = true;
                break;
            }
        }
        if (!blocked) ++clear;
    }
    return double(clear) / double(keypoints.size());
}

} // namespace pedsynth
