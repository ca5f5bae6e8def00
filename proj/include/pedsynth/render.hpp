#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "pedsynth/capture.hpp"
#include "pedsynth/geometry.hpp"
#include "pedsynth/image.hpp"
#include "pedsynth/optics.hpp"
#include "pedsynth/world.hpp"

namespace pedsynth {

struct FrameImage {
    Image color;
    std::vector<double> depth; // meters, row-major; infinity = background

    FrameImage() = default;
    FrameImage(int w, int h, Rgb8 clear)
        : color(w, h, clear),
          depth(std::size_t(w) * h, std::numeric_limits<double>::infinity()) {}

    double& depth_at(int x, int y) { return depth[std::size_t(y) * color.width() + x]; }
};

inline const std::array<Rgb8, 8>& skin_tone_colors() {
    static const std::array<Rgb8, 8> tones = {{{255, 224, 196},
                                               {241, 194, 167},
                                               {224, 172, 138},
                                               {198, 134, 94},
                                               {165, 105, 70},
                                               {126, 76, 48},
                                               {96, 57, 34},
                                               {64, 38, 24}}};
    return tones;
}

// Everything the rasterizer needs to draw one agent.
struct RenderAgent {
    AgentPose pose;
    double height_m = 1.7;
    double weight_norm = 0.5;
    Rgb8 skin{224, 172, 138};
    const Image* torso_tex = nullptr; // top or dress texture
    const Image* legs_tex = nullptr;  // bottom or dress texture
    Rgb8 shoe_color{40, 35, 30};
    Rgb8 hair_color{60, 45, 30};
    bool has_hair = true;
};

namespace detail {

struct TexturedQuad {
    // corners in order: top-left, top-right, bottom-right, bottom-left
    std::array<Vec3, 4> corners;
    const Image* tex = nullptr;
    Rgb8 flat{128, 128, 128};
};

inline Rgb8 sample_texture(const Image& tex, double s, double t) {
    const int x = std::clamp(int(s * tex.width()), 0, tex.width() - 1);
    const int y = std::clamp(int(t * tex.height()), 0, tex.height() - 1);
    return tex.at(x, y);
}

inline Rgb8 shade(Rgb8 base, const LightState& light) {
    const double k = light.intensity / kMaxLightIntensity;
    auto ch = [&](double c, double tint) {
        return std::uint8_t(std::clamp(std::lround(c * k * tint), 0l, 255l));
    };
    return {ch(base.r, light.color.x), ch(base.g, light.color.y), ch(base.b, light.color.z)};
}

struct ScreenVertex {
    double u, v, depth, s, t;
};

inline void raster_triangle(FrameImage& frame, const ScreenVertex& a, const ScreenVertex& b,
                            const ScreenVertex& c, const Image* tex, Rgb8 flat,
                            const LightState& light) {
    const int w = frame.color.width();
    const int h = frame.color.height();
    const double area = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
    if (std::abs(area) < 1e-12) return;
    const int x0 = std::max(0, int(std::floor(std::min({a.u, b.u, c.u}))));
    const int x1 = std::min(w - 1, int(std::ceil(std::max({a.u, b.u, c.u}))));
    const int y0 = std::max(0, int(std::floor(std::min({a.v, b.v, c.v}))));
    const int y1 = std::min(h - 1, int(std::ceil(std::max({a.v, b.v, c.v}))));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const double w0 = ((b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u)) / area;
            const double w1 = ((c.u - b.u) * (py - b.v) - (c.v - b.v) * (px - b.u)) / area;
            const double w2 = ((a.u - c.u) * (py - c.v) - (a.v - c.v) * (px - c.u)) / area;
            // barycentric: wa weights vertex c, etc. -- recompute directly
            const double la = w1; // weight of a
            const double lb = w2; // weight of b
            const double lc = w0; // weight of c
            if (la < 0 || lb < 0 || lc < 0) continue;
            const double depth = la * a.depth + lb * b.depth + lc * c.depth;
            if (depth >= frame.depth_at(x, y)) continue;
            Rgb8 base = flat;
            if (tex) {
                const double s = la * a.s + lb * b.s + lc * c.s;
                const double t = la * a.t + lb * b.t + lc * c.t;
                base = sample_texture(*tex, s, t);
            }
            frame.depth_at(x, y) = depth;
            frame.color.at(x, y) = shade(base, light);
        }
    }
}

inline void draw_quad(FrameImage& frame, const CameraRig& rig, const TexturedQuad& quad,
                      const LightState& light) {
    std::array<ScreenVertex, 4> sv;
    static const double tex_s[4] = {0, 1, 1, 0};
    static const double tex_t[4] = {0, 0, 1, 1};
    for (int i = 0; i < 4; ++i) {
        const auto p = project(rig, quad.corners[i]);
        if (!p || p->depth < rig.near_m || p->depth > rig.far_m) return; // clip whole quad
        sv[i] = {p->u, p->v, p->depth, tex_s[i], tex_t[i]};
    }
    raster_triangle(frame, sv[0], sv[1], sv[2], quad.tex, quad.flat, light);
    raster_triangle(frame, sv[0], sv[2], sv[3], quad.tex, quad.flat, light);
}

// Camera-facing body slabs: silhouette stays visible from every rig without
// mesh assets. Limbs swing with the gait phase like the exported keypoints.
inline std::vector<TexturedQuad> body_quads(const RenderAgent& agent, const CameraRig& rig) {
    const double h = agent.height_m;
    const Vec3 base = agent.pose.position;
    Vec3 view = rig.position - base;
    view.y = 0;
    Vec3 right = length(view) > 1e-9 ? normalized(Vec3{-view.z, 0, view.x}) : Vec3{1, 0, 0};
    const double heading_c = std::cos(agent.pose.heading);
    const double heading_s = std::sin(agent.pose.heading);
    const Vec3 forward{heading_c, 0, heading_s};
    const double swing = std::sin(2.0 * M_PI * agent.pose.phase);
    const double width_scale = 0.9 + 0.3 * agent.weight_norm;

    auto quad = [&](double cx_off, double y_top, double y_bot, double half_w,
                    Vec3 fwd_top, Vec3 fwd_bot, const Image* tex, Rgb8 flat) {
        TexturedQuad q;
        const Vec3 cw = right * (half_w * width_scale);
        const Vec3 off = right * cx_off;
        q.corners[0] = base + off + fwd_top + Vec3{0, y_top, 0} - cw;
        q.corners[1] = base + off + fwd_top + Vec3{0, y_top, 0} + cw;
        q.corners[2] = base + off + fwd_bot + Vec3{0, y_bot, 0} + cw;
        q.corners[3] = base + off + fwd_bot + Vec3{0, y_bot, 0} - cw;
        q.tex = tex;
        q.flat = flat;
        return q;
    };

    std::vector<TexturedQuad> quads;
    const Vec3 none{0, 0, 0};
    // torso
    quads.push_back(quad(0, 0.82 * h, 0.50 * h, 0.18 * h, none, none, agent.torso_tex,
                         {150, 150, 150}));
    // legs, swinging fore/aft
    const Vec3 lf = forward * (0.18 * h * swing);
    quads.push_back(quad(-0.07 * h, 0.50 * h, 0.03 * h, 0.06 * h, none, lf, agent.legs_tex,
                         {90, 90, 110}));
    quads.push_back(quad(0.07 * h, 0.50 * h, 0.03 * h, 0.06 * h, none, lf * -1.0,
                         agent.legs_tex, {90, 90, 110}));
    // arms, counter-swinging
    const Vec3 af = forward * (0.12 * h * swing);
    quads.push_back(quad(-0.21 * h, 0.80 * h, 0.45 * h, 0.03 * h, none, af * -1.0,
                         agent.torso_tex, {150, 150, 150}));
    quads.push_back(quad(0.21 * h, 0.80 * h, 0.45 * h, 0.03 * h, none, af, agent.torso_tex,
                         {150, 150, 150}));
    // head and hair cap
    quads.push_back(quad(0, 0.97 * h, 0.82 * h, 0.07 * h, none, none, nullptr, agent.skin));
    if (agent.has_hair)
        quads.push_back(quad(0, 1.0 * h, 0.94 * h, 0.08 * h, none, none, nullptr,
                             agent.hair_color));
    // shoes
    quads.push_back(quad(-0.07 * h, 0.04 * h, 0.0, 0.05 * h, lf, lf, nullptr,
                         agent.shoe_color));
    quads.push_back(quad(0.07 * h, 0.04 * h, 0.0, 0.05 * h, lf * -1.0, lf * -1.0, nullptr,
                         agent.shoe_color));
    return quads;
}

} // namespace detail

inline Rgb8 to_rgb8(const Vec3& c) {
    auto ch = [](double v) {
        return std::uint8_t(std::clamp(std::lround(v * 255.0), 0l, 255l));
    };
    return {ch(c.x), ch(c.y), ch(c.z)};
}

// Deterministic software rasterization of one camera frame: backdrop clear
// color, ground quad, then depth-buffered agent primitives, all scaled by the
// lighting state.
inline FrameImage render_frame(const std::vector<RenderAgent>& agents, const CameraRig& rig,
                               const LightState& light, const Scene& scene) {
    const Rgb8 backdrop = detail::shade(to_rgb8(scene.backdrop_color), light);
    FrameImage frame(rig.width, rig.height, backdrop);

    // ground plane across the walkable grid, tiled so partially-behind tiles
    // clip independently
    const double tile = 4.0 * scene.grid.cell_size();
    const double gw = scene.grid.width() * scene.grid.cell_size();
    const double gd = scene.grid.height() * scene.grid.cell_size();
    const Rgb8 ground_color = to_rgb8(scene.ground_color);
    for (double z = 0; z < gd; z += tile) {
        for (double x = 0; x < gw; x += tile) {
            const double x1 = std::min(x + tile, gw);
            const double z1 = std::min(z + tile, gd);
            detail::TexturedQuad ground;
            ground.corners = {Vec3{x, 0, z}, Vec3{x1, 0, z}, Vec3{x1, 0, z1}, Vec3{x, 0, z1}};
            ground.flat = ground_color;
            detail::draw_quad(frame, rig, ground, light);
        }
    }

    for (const auto& agent : agents)
        for (const auto& q : detail::body_quads(agent, rig))
            detail::draw_quad(frame, rig, q, light);
    return frame;
}

} // namespace pedsynth
