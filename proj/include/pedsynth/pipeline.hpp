#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "pedsynth/capture.hpp"
#include "pedsynth/datasetio.hpp"
#include "pedsynth/optics.hpp"
#include "pedsynth/persona.hpp"
#include "pedsynth/render.hpp"
#include "pedsynth/world.hpp"

namespace pedsynth {

// Camera config: one `cam id x y z lx ly lz vfov w h near far` line per rig.
inline std::map<std::string, CameraRig> load_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open camera config: " + path);
    std::map<std::string, CameraRig> rigs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '/') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key.empty()) continue;
        if (key != "cam")
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected `cam` line");
        CameraRig rig;
        if (!(ls >> rig.id >> rig.position.x >> rig.position.y >> rig.position.z >>
              rig.look_at.x >> rig.look_at.y >> rig.look_at.z >> rig.vertical_fov_deg >>
              rig.width >> rig.height >> rig.near_m >> rig.far_m))
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed cam line");
        rig.validate();
        if (rigs.count(rig.id))
            throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate camera id " +
                             rig.id);
        rigs[rig.id] = rig;
    }
    return rigs;
}

// Deterministic stand-in texture for a model's stock uv id.
inline Image stock_texture(const std::string& uv_id, int size = 64) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : uv_id) h = (h ^ std::uint8_t(c)) * 1099511628211ULL;
    static const std::vector<HsvColor> palette = build_palette();
    const Rgb8 color = hsv_to_rgb(palette[h % kPaletteSize]);
    return Image(size, size, color);
}

// Rebuilds the raster for a serialized uv id: random ids regenerate from
// their (palette, pattern) provenance, web ids resolve through the pool,
// anything else is treated as a stock texture.
inline Image materialize_uv(const std::string& uv_id, const TexturePool& pool, int size) {
    int pi, ti;
    if (std::sscanf(uv_id.c_str(), "rnd_p%d_t%d", &pi, &ti) == 2)
        return compose_uv_map(pi, ti, std::max(size, 64), std::max(size, 64)).raster;
    for (std::size_t i = 0; i < pool.web_count(); ++i)
        if (pool.web_id(i) == uv_id) return pool.web_map(i).raster;
    return stock_texture(uv_id, std::max(size, 64));
}

// Offline stand-in for a pool of downloaded clothing photos: deterministic
// low-frequency color noise per seed.
inline TexturePool make_stock_web_pool(std::uint64_t seed, int count, int size = 64) {
    TexturePool pool;
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_stream_seed(seed, 0x3E00u + std::uint64_t(i)));
        const int cells = 4;
        std::vector<Rgb8> grid(std::size_t(cells) * cells);
        for (auto& c : grid)
            c = {std::uint8_t(rng.next_below(256)), std::uint8_t(rng.next_below(256)),
                 std::uint8_t(rng.next_below(256))};
        Image img(size, size);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                img.at(x, y) = grid[std::size_t(y * cells / size) * cells +
                                    std::size_t(x * cells / size)];
        char id[16];
        std::snprintf(id, sizeof id, "web_%03d", i);
        pool.add_web_image(id, import_image_as_uv(img, size, size));
    }
    return pool;
}

struct CharacterAssets {
    Image torso;
    Image legs;
    Rgb8 shoe_color{40, 35, 30};
    Rgb8 hair_color{60, 45, 30};
    bool has_hair = false;
};

inline CharacterAssets materialize_assets(const Character& c, const TexturePool& pool,
                                          int uv_size = 128) {
    CharacterAssets assets;
    auto uv_of = [&](Slot s) -> const std::string* {
        auto it = c.outfit.assignments.find(s);
        return it == c.outfit.assignments.end() ? nullptr : &it->second.uv_id;
    };
    const std::string* dress = uv_of(Slot::dress);
    const std::string* top = dress ? dress : uv_of(Slot::top);
    const std::string* bottom = dress ? dress : uv_of(Slot::bottom);
    assets.torso = top ? materialize_uv(*top, pool, uv_size) : Image(64, 64, {150, 150, 150});
    assets.legs =
        bottom ? materialize_uv(*bottom, pool, uv_size) : Image(64, 64, {90, 90, 110});
    if (const std::string* shoes = uv_of(Slot::shoes)) {
        const Image img = materialize_uv(*shoes, pool, 64);
        assets.shoe_color = img.at(img.width() / 2, img.height() / 2);
    }
    if (const std::string* hair = uv_of(Slot::hair)) {
        const Image img = materialize_uv(*hair, pool, 64);
        assets.hair_color = img.at(img.width() / 2, img.height() / 2);
        assets.has_hair = true;
    }
    return assets;
}

inline RenderAgent make_render_agent(const Agent& agent, const Character& character,
                                     const CharacterAssets& assets) {
    RenderAgent ra;
    ra.pose = {agent.position, agent.heading, agent.phase};
    ra.height_m = character.height_cm / 100.0;
    ra.weight_norm = character.weight_norm;
    ra.skin = skin_tone_colors()[std::size_t(character.skin) % skin_tone_colors().size()];
    ra.torso_tex = &assets.torso;
    ra.legs_tex = &assets.legs;
    ra.shoe_color = assets.shoe_color;
    ra.hair_color = assets.hair_color;
    ra.has_hair = assets.has_hair;
    return ra;
}

struct SimulateOptions {
    double duration_s = 60.0;
    double fps = kVideoFps;
    double interval_s = kDefaultSamplingIntervalS;
    std::uint64_t seed = 0;
    int workers = 1;
    bool write_frames = true;
    int override_width = 0;  // nonzero = replace camera resolutions
    int override_height = 0;
};

struct SceneSimResult {
    std::vector<std::string> event_log;
    // one annotation stream per camera, in scene.camera_ids order
    std::vector<std::vector<FrameAnnotation>> annotations;
    std::vector<std::string> frame_dirs; // per camera; empty when frames not written
};

inline std::string frame_file_name(long frame_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "f%07ld.png", frame_index);
    return buf;
}

// Runs the scene simulation at the video frame rate, captures annotations at
// the sampled frame indices, and (optionally) renders and writes those
// frames. The simulation pass is sequential; rendering fans out over
// `workers` threads from recorded agent snapshots, so output does not depend
// on the worker count.
inline SceneSimResult simulate_scene(const Scene& scene,
                                     const std::map<std::string, CameraRig>& all_rigs,
                                     const std::vector<Character>& population,
                                     const TexturePool& pool, const SimulateOptions& options,
                                     const std::string& frames_root = "") {
    std::vector<CameraRig> rigs;
    for (const auto& id : scene.camera_ids) {
        auto it = all_rigs.find(id);
        if (it == all_rigs.end())
            throw ConfigError("scene " + scene.name + " references unknown camera " + id);
        CameraRig rig = it->second;
        if (options.override_width > 0) rig.width = options.override_width;
        if (options.override_height > 0) rig.height = options.override_height;
        rigs.push_back(rig);
    }

    std::vector<AgentProfile> queue;
    std::map<int, const Character*> characters;
    for (const auto& c : population) {
        queue.push_back({c.id, c.height_cm / 100.0, c.weight_norm});
        characters[c.id] = &c;
    }
    std::map<int, CharacterAssets> assets;
    if (options.write_frames)
        for (const auto& c : population) assets[c.id] = materialize_assets(c, pool);

    SimState sim(scene, queue, options.seed);
    const std::vector<long> sampled =
        sample_frames(options.duration_s, options.fps, options.interval_s);

    SceneSimResult result;
    result.annotations.resize(rigs.size());

    struct Snapshot {
        long frame_index;
        double time_s;
        std::vector<Agent> agents;
        LightState light;
    };
    std::vector<Snapshot> snapshots;

    const double dt = 1.0 / options.fps;
    const long last_frame = std::lround(options.duration_s * options.fps);
    std::size_t next_sample = 0;
    for (long k = 0; k <= last_frame; ++k) {
        const double t = k * dt;
        if (next_sample < sampled.size() && sampled[next_sample] == k) {
            ++next_sample;
            Snapshot snap{k, t, sim.agents(), lighting_at(scene, t)};
            // annotations from the snapshot
            for (std::size_t ci = 0; ci < rigs.size(); ++ci) {
                const CameraRig& rig = rigs[ci];
                FrameAnnotation fa{k, t, {}};
                for (std::size_t ai = 0; ai < snap.agents.size(); ++ai) {
                    const Agent& agent = snap.agents[ai];
                    const auto kps = keypoints_of(agent.profile.height_m * 100.0,
                                                  {agent.position, agent.heading, agent.phase});
                    bool any_in_frustum = false;
                    for (const auto& kp : kps)
                        if (in_frustum(rig, kp)) { any_in_frustum = true; break; }
                    if (!any_in_frustum) continue;
                    std::vector<BodyCapsule> occluders;
                    for (std::size_t oi = 0; oi < snap.agents.size(); ++oi) {
                        if (oi == ai) continue;
                        const Agent& o = snap.agents[oi];
                        occluders.push_back({o.position, o.profile.height_m,
                                             capsule_radius_for(o.profile.weight_norm)});
                    }
                    AgentAnnotation aa;
                    aa.character_id = agent.profile.character_id;
                    aa.visibility = visibility(
                        rig, std::vector<Vec3>(kps.begin(), kps.end()), occluders);
                    for (int ki = 0; ki < kExportedKeypoints; ++ki) {
                        KeypointRecord kr;
                        kr.name = exported_keypoint_names()[std::size_t(ki)];
                        kr.world = kps[std::size_t(ki)];
                        const auto proj = project(rig, kps[std::size_t(ki)]);
                        if (proj) {
                            kr.u = proj->u;
                            kr.v = proj->v;
                            kr.depth = proj->depth;
                        } else {
                            kr.u = kr.v = -1;
                            kr.depth = 0;
                        }
                        bool unoccluded = true;
                        for (const auto& cap : occluders) {
                            const Vec3 lo = cap.foot_center + Vec3{0, cap.radius_m, 0};
                            const Vec3 hi =
                                cap.foot_center + Vec3{0, cap.height_m - cap.radius_m, 0};
                            if (segment_segment_distance(rig.position, kps[std::size_t(ki)],
                                                         lo, hi) < cap.radius_m) {
                                unoccluded = false;
                                break;
                            }
                        }
                        kr.visible = in_frustum(rig, kps[std::size_t(ki)]) && unoccluded;
                        aa.keypoints.push_back(std::move(kr));
                    }
                    fa.agents.push_back(std::move(aa));
                }
                if (!fa.agents.empty()) result.annotations[ci].push_back(std::move(fa));
            }
            if (options.write_frames) snapshots.push_back(std::move(snap));
        }
        if (k < last_frame) sim.step(dt);
    }
    result.event_log = sim.event_log();

    if (options.write_frames) {
        namespace fs = std::filesystem;
        result.frame_dirs.resize(rigs.size());
        for (std::size_t ci = 0; ci < rigs.size(); ++ci) {
            const fs::path dir = fs::path(frames_root) / scene.name / rigs[ci].id;
            fs::create_directories(dir);
            result.frame_dirs[ci] = dir.string();
        }
        struct Job {
            std::size_t snap, cam;
        };
        std::vector<Job> jobs;
        for (std::size_t si = 0; si < snapshots.size(); ++si)
            for (std::size_t ci = 0; ci < rigs.size(); ++ci) jobs.push_back({si, ci});
        std::atomic<std::size_t> cursor{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t j = cursor.fetch_add(1);
                if (j >= jobs.size()) return;
                const Snapshot& snap = snapshots[jobs[j].snap];
                const CameraRig& rig = rigs[jobs[j].cam];
                std::vector<RenderAgent> render_agents;
                for (const auto& agent : snap.agents)
                    render_agents.push_back(make_render_agent(
                        agent, *characters.at(agent.profile.character_id),
                        assets.at(agent.profile.character_id)));
                const FrameImage frame = render_frame(render_agents, rig, snap.light, scene);
                write_png(frame.color, result.frame_dirs[jobs[j].cam] + "/" +
                                           frame_file_name(snap.frame_index));
            }
        };
        const int n_workers = std::max(1, options.workers);
        std::vector<std::thread> threads;
        for (int i = 1; i < n_workers; ++i) threads.emplace_back(worker);
        worker();
        for (auto& th : threads) th.join();
    }
    return result;
}

// Detection gates applied before a crop is kept.
inline constexpr double kMinVisibilityFraction = 3.0 / 7.0;
inline constexpr int kMinCropHeightPx = 20;
inline constexpr double kMinUnclampedFraction = 0.5;

// Cuts crops for one camera stream given its annotations and a frame loader.
template <typename FrameLoader>
std::vector<CropRecord> crop_camera_stream(const std::vector<FrameAnnotation>& annotations,
                                           int scene_index, int cam_index, int image_w,
                                           int image_h, FrameLoader&& load_frame) {
    std::vector<CropRecord> crops;
    for (const auto& fa : annotations) {
        for (const auto& aa : fa.agents) {
            if (aa.visibility < kMinVisibilityFraction) continue;
            std::vector<PixelPoint> pts;
            for (const auto& kp : aa.keypoints)
                if (kp.depth > 0) pts.push_back({kp.u, kp.v});
            if (pts.size() < 2) continue;
            CropBox box;
            try {
                box = crop_box(pts, image_w, image_h);
            } catch (const ValidationError&) {
                continue; // degenerate geometry
            }
            if (box.pre_height < kMinCropHeightPx) continue;
            if (box.width <= 0 || box.height <= 0) continue;
            if (box.clamped_fraction() < kMinUnclampedFraction) continue;
            const Image* frame = load_frame(fa.frame_index);
            if (!frame) continue;
            CropRecord rec;
            rec.pid = aa.character_id;
            rec.scene = scene_index;
            rec.cam = cam_index;
            rec.frame = fa.frame_index;
            rec.box = box;
            rec.image = extract_crop(*frame, box);
            crops.push_back(std::move(rec));
        }
    }
    return crops;
}

} // namespace pedsynth
