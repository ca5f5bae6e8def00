#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pedsynth/errors.hpp"
#include "pedsynth/geometry.hpp"
#include "pedsynth/image.hpp"
#include "pedsynth/optics.hpp"
#include "pedsynth/persona.hpp"
#include "pedsynth/world.hpp"

namespace pedsynth {

inline constexpr double kVideoFps = 24.0;
inline constexpr double kDefaultSamplingIntervalS = 0.5;

// Frame indices round(k * interval * fps), k = 0,1,..., within the clip.
inline std::vector<long> sample_frames(double duration_s, double fps, double interval_s) {
    if (fps <= 0 || interval_s <= 0)
        throw ValidationError("fps and sampling interval must be positive");
    const long last = std::lround(duration_s * fps);
    std::vector<long> indices;
    for (long k = 0;; ++k) {
        const long idx = std::lround(k * interval_s * fps);
        if (idx > last) break;
        if (indices.empty() || idx > indices.back()) indices.push_back(idx);
    }
    return indices;
}

// --- skeleton ----------------------------------------------------------------

inline constexpr int kFullSkeletonSize = 31;
inline constexpr int kExportedKeypoints = 7;

// Full rig joint names; local coordinates are normalized to body height 1.
inline const std::array<const char*, kFullSkeletonSize>& full_skeleton_names() {
    static const std::array<const char*, kFullSkeletonSize> names = {
        "root",       "pelvis",     "spine_01",   "spine_02",   "spine_03",
        "neck",       "head",       "head_top",   "jaw",        "eye_l",
        "eye_r",      "clavicle_l", "clavicle_r", "shoulder_l", "shoulder_r",
        "elbow_l",    "elbow_r",    "wrist_l",    "wrist_r",    "hand_l",
        "hand_r",     "hip_l",      "hip_r",      "knee_l",     "knee_r",
        "ankle_l",    "ankle_r",    "foot_l",     "foot_r",     "toe_l",
        "toe_r"};
    return names;
}

inline const std::array<const char*, kExportedKeypoints>& exported_keypoint_names() {
    static const std::array<const char*, kExportedKeypoints> names = {
        "head_top", "shoulder_l", "shoulder_r", "hand_l", "hand_r", "foot_l", "foot_r"};
    return names;
}

struct AgentPose {
    Vec3 position;      // feet center on the ground plane
    double heading = 0; // radians
    double phase = 0;   // gait phase in [0,1)
};

// The 7 exported keypoints in world space: body-local skeleton scaled by
// height, limbs swung sinusoidally by gait phase, then rotated to the
// heading and translated to the agent position. Feet stay at ground level so
// the neutral-pose vertical span equals the body height.
inline std::array<Vec3, kExportedKeypoints> keypoints_of(double height_cm,
                                                         const AgentPose& pose) {
    const double h = height_cm / 100.0;
    const double swing = std::sin(2.0 * M_PI * pose.phase);
    // local frame: x right, y up, z forward
    std::array<Vec3, kExportedKeypoints> local = {{
        {0.0, 1.0, 0.0},             // head_top
        {-0.12, 0.82, 0.0},          // shoulder_l
        {0.12, 0.82, 0.0},           // shoulder_r
        {-0.16, 0.45, -0.12 * swing}, // hand_l (opposite to left foot)
        {0.16, 0.45, 0.12 * swing},   // hand_r
        {-0.06, 0.0, 0.18 * swing},   // foot_l
        {0.06, 0.0, -0.18 * swing},   // foot_r
    }};
    const double c = std::cos(pose.heading);
    const double s = std::sin(pose.heading);
    std::array<Vec3, kExportedKeypoints> world;
    for (int i = 0; i < kExportedKeypoints; ++i) {
        const Vec3 p = local[i] * h;
        // heading 0 faces +x; local +z (forward) maps onto the heading
        // direction, local +x onto its right-hand perpendicular.
        const double wx = p.z * c - p.x * s;
        const double wz = p.z * s + p.x * c;
        world[i] = Vec3{wx, p.y, wz} + pose.position;
    }
    return world;
}

// --- crop box -----------------------------------------------------------------

struct CropBox {
    // final box, clamped to the image
    int left = 0, top = 0, width = 0, height = 0;
    // pre-clamp box from the margin rules, outward-rounded
    int pre_left = 0, pre_top = 0, pre_width = 0, pre_height = 0;
    double range_L = 0; // vertical keypoint range in pixels

    double clamped_fraction() const {
        const double pre = double(pre_width) * pre_height;
        return pre > 0 ? double(width) * height / pre : 0.0;
    }
};

struct PixelPoint {
    double u = 0, v = 0;
};

// Margins around the keypoint extent: 0.15L above, 0.05L below (H = 1.2L),
// 0.1L on each side, then symmetric horizontal padding up to W/H = 0.4.
inline CropBox crop_box(const std::vector<PixelPoint>& keypoints, int image_w, int image_h) {
    if (keypoints.size() < 2)
        throw ValidationError("crop_box needs at least 2 keypoints");
    double umin = keypoints[0].u, umax = keypoints[0].u;
    double vmin = keypoints[0].v, vmax = keypoints[0].v;
    for (const auto& k : keypoints) {
        umin = std::min(umin, k.u);
        umax = std::max(umax, k.u);
        vmin = std::min(vmin, k.v);
        vmax = std::max(vmax, k.v);
    }
    const double L = vmax - vmin;
    if (L <= 0) throw ValidationError("crop_box: degenerate keypoint geometry (L = 0)");

    const double top = vmin - 0.15 * L;
    const double bottom = vmax + 0.05 * L;
    double left = umin - 0.1 * L;
    double right = umax + 0.1 * L;
    const double H = bottom - top; // 1.2 L
    if ((right - left) / H < 0.4) {
        const double pad = (0.4 * H - (right - left)) / 2.0;
        left -= pad;
        right += pad;
    }

    CropBox box;
    box.range_L = L;
    box.pre_left = int(std::floor(left));
    box.pre_top = int(std::floor(top));
    box.pre_width = int(std::ceil(right)) - box.pre_left;
    box.pre_height = int(std::ceil(bottom)) - box.pre_top;

    const int cl = std::max(box.pre_left, 0);
    const int ct = std::max(box.pre_top, 0);
    const int cr = std::min(box.pre_left + box.pre_width, image_w);
    const int cb = std::min(box.pre_top + box.pre_height, image_h);
    box.left = std::min(cl, image_w);
    box.top = std::min(ct, image_h);
    box.width = std::max(0, cr - cl);
    box.height = std::max(0, cb - ct);
    return box;
}

inline Image extract_crop(const Image& frame, const CropBox& box) {
    if (box.width <= 0 || box.height <= 0 || box.left >= frame.width() ||
        box.top >= frame.height())
        throw ValidationError("crop box does not intersect the frame");
    Image out(box.width, box.height);
    for (int y = 0; y < box.height; ++y)
        for (int x = 0; x < box.width; ++x)
            out.at(x, y) = frame.at(box.left + x, box.top + y);
    return out;
}

// --- annotations ----------------------------------------------------------------

struct KeypointRecord {
    std::string name;
    Vec3 world;
    double u = 0, v = 0;
    double depth = 0;
    bool visible = false; // within the frustum and unoccluded
};

struct AgentAnnotation {
    int character_id = 0;
    double visibility = 1.0; // unoccluded keypoint fraction
    std::vector<KeypointRecord> keypoints;
};

struct FrameAnnotation {
    long frame_index = 0;
    double time_s = 0;
    std::vector<AgentAnnotation> agents;
};

inline void write_annotations(const std::vector<FrameAnnotation>& frames, std::ostream& out,
                              double fps = kVideoFps) {
    char buf[64];
    out << "fps " << fps << "\n";
    long prev = -1;
    for (const auto& f : frames) {
        if (f.frame_index <= prev)
            throw ValidationError("annotations must be ordered by frame index");
        prev = f.frame_index;
        for (const auto& a : f.agents) {
            out << "frame " << f.frame_index;
            std::snprintf(buf, sizeof buf, " %.17g", f.time_s);
            out << buf << " agent " << a.character_id;
            std::snprintf(buf, sizeof buf, " %.17g", a.visibility);
            out << buf;
            for (const auto& k : a.keypoints) {
                out << " kp " << k.name;
                const double vals[6] = {k.world.x, k.world.y, k.world.z, k.u, k.v, k.depth};
                for (double v : vals) {
                    std::snprintf(buf, sizeof buf, " %.17g", v);
                    out << buf;
                }
                out << " " << (k.visible ? 1 : 0);
            }
            out << "\n";
        }
    }
}

inline void write_annotations(const std::vector<FrameAnnotation>& frames,
                              const std::string& path, double fps = kVideoFps) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    write_annotations(frames, out, fps);
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<FrameAnnotation> read_annotations(std::istream& in) {
    std::vector<FrameAnnotation> frames;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("annotation line " + std::to_string(lineno) + ": " + what);
    };
    if (!std::getline(in, line)) return frames;
    ++lineno;
    {
        std::istringstream ls(line);
        std::string key;
        double fps;
        if (!(ls >> key >> fps) || key != "fps") fail("expected `fps` header");
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        long frame_index;
        double time_s;
        if (!(ls >> tok >> frame_index >> time_s) || tok != "frame")
            fail("expected `frame` record");
        AgentAnnotation agent;
        if (!(ls >> tok >> agent.character_id >> agent.visibility) || tok != "agent")
            fail("expected `agent` field");
        while (ls >> tok) {
            if (tok != "kp") fail("expected `kp` field");
            KeypointRecord k;
            int vis;
            if (!(ls >> k.name >> k.world.x >> k.world.y >> k.world.z >> k.u >> k.v >>
                  k.depth >> vis))
                fail("malformed keypoint record");
            k.visible = vis != 0;
            agent.keypoints.push_back(std::move(k));
        }
        if (frames.empty() || frames.back().frame_index != frame_index) {
            if (!frames.empty() && frame_index < frames.back().frame_index)
                fail("frame indices out of order");
            frames.push_back({frame_index, time_s, {}});
        }
        frames.back().agents.push_back(std::move(agent));
    }
    return frames;
}

inline std::vector<FrameAnnotation> read_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotations: " + path);
    return read_annotations(in);
}

} // namespace pedsynth
