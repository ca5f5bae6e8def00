#pragma once

#include <algorithm>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <limits>
#include <fstream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "pedsynth/errors.hpp"
#include "pedsynth/geometry.hpp"
#include "pedsynth/rng.hpp"

namespace pedsynth {

struct GridCell {
    int x = 0, y = 0;
    bool operator==(const GridCell&) const = default;
};

class GridMap {
public:
    GridMap() = default;
    GridMap(int w, int h, double cell_size_m)
        : w_(w), h_(h), cell_size_(cell_size_m), blocked_(std::size_t(w) * h, false) {
        if (w <= 0 || h <= 0 || cell_size_m <= 0)
            throw ValidationError("grid dimensions and cell size must be positive");
    }

    int width() const { return w_; }
    int height() const { return h_; }
    double cell_size() const { return cell_size_; }

    bool in_bounds(GridCell c) const { return c.x >= 0 && c.x < w_ && c.y >= 0 && c.y < h_; }
    bool walkable(GridCell c) const { return in_bounds(c) && !blocked_[index(c)]; }
    void set_blocked(GridCell c, bool b) { blocked_[index(c)] = b; }

    std::size_t index(GridCell c) const { return std::size_t(c.y) * w_ + c.x; }

    // Ground-plane position of a cell center: x east, z north, y up = 0.
    Vec3 cell_center(GridCell c) const {
        return {(c.x + 0.5) * cell_size_, 0.0, (c.y + 0.5) * cell_size_};
    }

    GridCell nearest_cell(const Vec3& p) const {
        GridCell c{int(std::floor(p.x / cell_size_)), int(std::floor(p.z / cell_size_))};
        c.x = std::clamp(c.x, 0, w_ - 1);
        c.y = std::clamp(c.y, 0, h_ - 1);
        return c;
    }

private:
    int w_ = 0, h_ = 0;
    double cell_size_ = 1.0;
    std::vector<bool> blocked_;
};

struct LightKeyframe {
    double t = 0;
    double intensity = 1.0;
    Vec3 direction{0, -1, 0};
    Vec3 color{1, 1, 1}; // RGB tint in [0,1]
};

struct LightState {
    double intensity = 1.0;
    Vec3 direction{0, -1, 0};
    Vec3 color{1, 1, 1};
};

inline constexpr double kMaxLightIntensity = 1.5;

class LightSchedule {
public:
    LightSchedule() { keyframes_.push_back({}); }
    explicit LightSchedule(std::vector<LightKeyframe> kfs) : keyframes_(std::move(kfs)) {
        if (keyframes_.empty()) keyframes_.push_back({});
        std::sort(keyframes_.begin(), keyframes_.end(),
                  [](const LightKeyframe& a, const LightKeyframe& b) { return a.t < b.t; });
        for (const auto& k : keyframes_)
            if (k.intensity < 0 || k.intensity > kMaxLightIntensity)
                throw ValidationError("light intensity must be within [0,1.5]");
    }

    LightState at(double t) const {
        const auto& kf = keyframes_;
        if (t <= kf.front().t) return state_of(kf.front());
        if (t >= kf.back().t) return state_of(kf.back());
        std::size_t i = 1;
        while (kf[i].t < t) ++i;
        const LightKeyframe& a = kf[i - 1];
        const LightKeyframe& b = kf[i];
        const double span = b.t - a.t;
        const double w = span > 0 ? (t - a.t) / span : 0.0;
        LightState s;
        s.intensity = std::clamp(a.intensity + (b.intensity - a.intensity) * w,
                                 0.0, kMaxLightIntensity);
        Vec3 d = a.direction + (b.direction - a.direction) * w;
        s.direction = length(d) > 1e-12 ? normalized(d) : Vec3{0, -1, 0};
        s.color = a.color + (b.color - a.color) * w;
        return s;
    }

    const std::vector<LightKeyframe>& keyframes() const { return keyframes_; }

private:
    static LightState state_of(const LightKeyframe& k) {
        Vec3 d = length(k.direction) > 1e-12 ? normalized(k.direction) : Vec3{0, -1, 0};
        return {k.intensity, d, k.color};
    }
    std::vector<LightKeyframe> keyframes_;
};

struct Scene {
    std::string name;
    GridMap grid;
    std::vector<GridCell> destinations; // cyclic visiting order
    LightSchedule lighting;
    int capacity = 1;
    double spawn_delay_s = 3.0;
    int visits_before_despawn = 5;
    std::vector<std::string> camera_ids;
    Vec3 ground_color{0.35, 0.35, 0.33};
    Vec3 backdrop_color{0.55, 0.65, 0.8};

    void validate() const {
        if (destinations.size() < 2)
            throw ValidationError("scene " + name + ": needs at least 2 destinations");
        for (std::size_t i = 0; i < destinations.size(); ++i) {
            if (!grid.walkable(destinations[i]))
                throw ValidationError("scene " + name + ": destination " + std::to_string(i) +
                                      " is not on a walkable cell");
            for (std::size_t j = i + 1; j < destinations.size(); ++j)
                if (destinations[i] == destinations[j])
                    throw ValidationError("scene " + name + ": duplicate destination");
        }
        if (capacity < 1) throw ValidationError("scene " + name + ": capacity must be >= 1");
        if (spawn_delay_s < 0) throw ValidationError("scene " + name + ": negative spawn delay");
        if (visits_before_despawn < 1)
            throw ValidationError("scene " + name + ": visits must be >= 1");
    }
};

// Scene file: `grid W H cell` followed by H occupancy rows of `#` (blocked)
// and `.` (walkable), then `dest x y`, `light t i dx dy dz r g b`,
// `capacity`, `spawn_delay`, `visits`, `camera <id>` lines in any order.
inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene: " + path);
    Scene scene;
    {
        auto slash = path.find_last_of('/');
        std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
        auto dot = base.find_last_of('.');
        scene.name = dot == std::string::npos ? base : base.substr(0, dot);
    }
    std::vector<LightKeyframe> lights;
    std::string line;
    int lineno = 0;
    bool have_grid = false;
    auto fail = [&](const std::string& what) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '/') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key.empty()) continue;
        if (key == "grid") {
            int w, h;
            double cell;
            if (!(ls >> w >> h >> cell)) fail("malformed grid header");
            if (w <= 0 || h <= 0 || cell <= 0) fail("grid dimensions must be positive");
            scene.grid = GridMap(w, h, cell);
            for (int y = 0; y < h; ++y) {
                if (!std::getline(in, line)) fail("unexpected end of file inside grid rows");
                ++lineno;
                if (int(line.size()) < w) fail("grid row too short");
                for (int x = 0; x < w; ++x) {
                    if (line[x] == '#') scene.grid.set_blocked({x, y}, true);
                    else if (line[x] != '.') fail("grid rows may contain only '#' and '.'");
                }
            }
            have_grid = true;
        } else if (key == "dest") {
            GridCell c;
            if (!(ls >> c.x >> c.y)) fail("malformed dest line");
            scene.destinations.push_back(c);
        } else if (key == "light") {
            LightKeyframe k;
            if (!(ls >> k.t >> k.intensity >> k.direction.x >> k.direction.y >> k.direction.z >>
                  k.color.x >> k.color.y >> k.color.z))
                fail("malformed light line");
            lights.push_back(k);
        } else if (key == "capacity") {
            if (!(ls >> scene.capacity)) fail("malformed capacity line");
        } else if (key == "spawn_delay") {
            if (!(ls >> scene.spawn_delay_s)) fail("malformed spawn_delay line");
        } else if (key == "visits") {
            if (!(ls >> scene.visits_before_despawn)) fail("malformed visits line");
        } else if (key == "camera") {
            std::string id;
            if (!(ls >> id)) fail("malformed camera line");
            scene.camera_ids.push_back(id);
        } else if (key == "ground") {
            if (!(ls >> scene.ground_color.x >> scene.ground_color.y >> scene.ground_color.z))
                fail("malformed ground line");
        } else if (key == "backdrop") {
            if (!(ls >> scene.backdrop_color.x >> scene.backdrop_color.y >> scene.backdrop_color.z))
                fail("malformed backdrop line");
        } else {
            fail("unknown directive '" + key + "'");
        }
    }
    if (!have_grid) {
        lineno = 0;
        fail("scene has no grid");
    }
    if (!lights.empty()) scene.lighting = LightSchedule(std::move(lights));
    scene.validate();
    return scene;
}

inline LightState lighting_at(const Scene& scene, double t) {
    return scene.lighting.at(t);
}

// --- path planning ----------------------------------------------------------

inline constexpr double kSqrt2 = 1.4142135623730951;

namespace detail {

// 8-neighborhood without corner cutting: a diagonal move needs both
// orthogonal neighbors free.
inline void for_each_neighbor(const GridMap& g, GridCell c, auto&& fn) {
    static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    for (int i = 0; i < 8; ++i) {
        GridCell n{c.x + dx[i], c.y + dy[i]};
        if (!g.walkable(n)) continue;
        const bool diagonal = dx[i] != 0 && dy[i] != 0;
        if (diagonal &&
            (!g.walkable({c.x + dx[i], c.y}) || !g.walkable({c.x, c.y + dy[i]})))
            continue;
        fn(n, diagonal ? kSqrt2 : 1.0);
    }
}

inline double octile(GridCell a, GridCell b) {
    const double dx = std::abs(a.x - b.x);
    const double dy = std::abs(a.y - b.y);
    return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
}

} // namespace detail

// A* shortest path on the 8-connected grid (diagonal cost sqrt(2)). Returns
// the cell sequence including both endpoints, or empty when unreachable.
// Ties broken by (lower f, lower h, lower cell index).
inline std::vector<GridCell> plan_path(const Scene& scene, GridCell from, GridCell to) {
    const GridMap& g = scene.grid;
    if (!g.walkable(from) || !g.walkable(to))
        throw ValidationError("plan_path endpoints must be walkable");
    if (from == to) return {from};

    struct Node {
        double f, h;
        std::size_t idx;
        bool operator>(const Node& o) const {
            if (f != o.f) return f > o.f;
            if (h != o.h) return h > o.h;
            return idx > o.idx;
        }
    };
    const std::size_t n = std::size_t(g.width()) * g.height();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> prev(n, SIZE_MAX);
    std::vector<bool> done(n, false);
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

    auto cell_of = [&](std::size_t idx) {
        return GridCell{int(idx % g.width()), int(idx / g.width())};
    };

    const std::size_t start = g.index(from);
    const std::size_t goal = g.index(to);
    dist[start] = 0;
    open.push({detail::octile(from, to), detail::octile(from, to), start});
    while (!open.empty()) {
        const Node node = open.top();
        open.pop();
        if (done[node.idx]) continue;
        done[node.idx] = true;
        if (node.idx == goal) break;
        const GridCell c = cell_of(node.idx);
        detail::for_each_neighbor(g, c, [&](GridCell nb, double step) {
            const std::size_t ni = g.index(nb);
            const double nd = dist[node.idx] + step;
            if (nd < dist[ni]) {
                dist[ni] = nd;
                prev[ni] = node.idx;
                const double h = detail::octile(nb, to);
                open.push({nd + h, h, ni});
            }
        });
    }
    if (!done[goal]) return {};
    std::vector<GridCell> path;
    for (std::size_t i = goal; i != SIZE_MAX; i = prev[i]) path.push_back(cell_of(i));
    std::reverse(path.begin(), path.end());
    return path;
}

inline double path_cost(const std::vector<GridCell>& path) {
    double cost = 0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const bool diagonal = path[i].x != path[i - 1].x && path[i].y != path[i - 1].y;
        cost += diagonal ? kSqrt2 : 1.0;
    }
    return cost;
}

// --- simulation ---------------------------------------------------------------

inline constexpr double kWalkSpeeds[3] = {0.9, 1.2, 1.5};
inline constexpr double kRunSpeeds[3] = {2.5, 3.0, 3.5};
inline constexpr double kStrideLengthM = 1.4; // one full gait cycle

struct AgentProfile {
    int character_id = 0;
    double height_m = 1.7;
    double weight_norm = 0.5;
};

struct Agent {
    AgentProfile profile;
    Vec3 position;
    double heading = 0; // radians, atan2(dz, dx) of motion direction
    int mode = 0;       // 0..2 walk, 3..5 run
    double speed = 1.2; // m/s, from the mode table
    int current_target = 0; // index into scene.destinations
    int visits_done = 0;
    double phase = 0; // gait phase in [0,1)
    std::vector<Vec3> waypoints;
    std::size_t waypoint_cursor = 0;
};

struct SimEvent {
    double t;
    std::string text; // formatted log line
};

class SimState {
public:
    SimState(const Scene& scene, std::vector<AgentProfile> queue, std::uint64_t seed)
        : scene_(&scene), rng_(derive_stream_seed(seed, 0x51u)) {
        for (auto& p : queue) spawn_queue_.push_back(p);
    }

    double time() const { return t_; }
    const std::vector<Agent>& agents() const { return agents_; }
    const std::vector<std::string>& event_log() const { return event_log_; }
    std::size_t queued() const { return spawn_queue_.size(); }
    bool finished() const { return agents_.empty() && spawn_queue_.empty(); }

    // Advances the simulation by dt seconds; agents move piecewise-linearly
    // along planned paths, visit destinations in cyclic order, and spawn /
    // despawn per the scene limits.
    void step(double dt) {
        if (dt <= 0) throw ValidationError("step requires dt > 0");
        // spawn first so a new agent moves within the same step; keeps the
        // trajectory independent of the step subdivision
        while (!spawn_queue_.empty() && int(agents_.size()) < scene_->capacity &&
               (!any_spawned_ || t_ - last_spawn_t_ >= scene_->spawn_delay_s)) {
            spawn(spawn_queue_.front());
            spawn_queue_.pop_front();
        }
        for (auto& agent : agents_) advance(agent, agent.speed * dt);
        t_ += dt;

        // despawn completed agents in spawn order
        for (std::size_t i = 0; i < agents_.size();) {
            if (agents_[i].visits_done >= scene_->visits_before_despawn) {
                log("despawn char=%d visits=%d", agents_[i].profile.character_id,
                    agents_[i].visits_done);
                agents_.erase(agents_.begin() + i);
            } else {
                ++i;
            }
        }
    }

    void run_for(double duration_s, double dt) {
        const long steps = std::lround(duration_s / dt);
        for (long i = 0; i < steps; ++i) step(dt);
    }

private:
    void spawn(const AgentProfile& profile) {
        Agent a;
        a.profile = profile;
        const std::size_t start =
            std::size_t(rng_.next_below(scene_->destinations.size()));
        a.mode = int(rng_.next_below(6));
        a.speed = a.mode < 3 ? kWalkSpeeds[a.mode] : kRunSpeeds[a.mode - 3];
        a.position = scene_->grid.cell_center(scene_->destinations[start]);
        a.current_target = int((start + 1) % scene_->destinations.size());
        plan_to_target(a);
        agents_.push_back(std::move(a));
        last_spawn_t_ = t_;
        any_spawned_ = true;
        log("spawn char=%d start=%zu mode=%d", profile.character_id, start, agents_.back().mode);
    }

    void plan_to_target(Agent& a) {
        const GridCell from = scene_->grid.nearest_cell(a.position);
        const GridCell to = scene_->destinations[std::size_t(a.current_target)];
        auto cells = plan_path(*scene_, from, to);
        a.waypoints.clear();
        for (const auto& c : cells) a.waypoints.push_back(scene_->grid.cell_center(c));
        a.waypoint_cursor = a.waypoints.empty() ? 0 : 1; // skip the current cell
        if (a.waypoints.empty()) {
            // unreachable destination: mark the visit so the agent cycles on
            log("nopath char=%d dest=%d", a.profile.character_id, a.current_target);
            on_destination_reached(a);
        }
    }

    void on_destination_reached(Agent& a) {
        ++a.visits_done;
        log("visit char=%d dest=%d visits=%d", a.profile.character_id, a.current_target,
            a.visits_done);
        if (a.visits_done >= scene_->visits_before_despawn) return;
        a.current_target = int((a.current_target + 1) % int(scene_->destinations.size()));
        plan_to_target(a);
    }

    void advance(Agent& a, double distance) {
        while (distance > 1e-12 && a.visits_done < scene_->visits_before_despawn) {
            if (a.waypoint_cursor >= a.waypoints.size()) {
                on_destination_reached(a);
                continue;
            }
            const Vec3 target = a.waypoints[a.waypoint_cursor];
            const Vec3 delta = target - a.position;
            const double gap = length(delta);
            if (gap <= distance + 1e-12) {
                a.position = target;
                distance -= gap;
                a.phase = std::fmod(a.phase + gap / kStrideLengthM, 1.0);
                ++a.waypoint_cursor;
                if (a.waypoint_cursor >= a.waypoints.size()) {
                    on_destination_reached(a);
                    if (distance <= 1e-12) break;
                }
            } else {
                const Vec3 dir = delta / gap;
                a.position = a.position + dir * distance;
                a.heading = std::atan2(dir.z, dir.x);
                a.phase = std::fmod(a.phase + distance / kStrideLengthM, 1.0);
                distance = 0;
            }
            if (gap > 1e-12) a.heading = std::atan2(delta.z, delta.x);
        }
    }

    void log(const char* fmt, ...) {
        char body[160];
        va_list args;
        va_start(args, fmt);
        std::vsnprintf(body, sizeof body, fmt, args);
        va_end(args);
        char head[48];
        std::snprintf(head, sizeof head, "t=%.3f ", t_);
        event_log_.push_back(std::string(head) + body);
    }

    const Scene* scene_;
    Rng rng_;
    double t_ = 0;
    double last_spawn_t_ = 0;
    bool any_spawned_ = false;
    std::vector<Agent> agents_;
    std::deque<AgentProfile> spawn_queue_;
    std::vector<std::string> event_log_;
};

} // namespace pedsynth
