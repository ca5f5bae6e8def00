// pedsynth command-line pipeline driver.
//
// Subcommands: gen-textures, gen-characters, simulate, crop, assemble,
// stats, eval. A run is rooted at --out; every output is reproducible from
// (config, seed). Errors exit nonzero with a single machine-parseable line
// on stderr: `error: <category>: <message>`.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pedsynth/evalkit.hpp"
#include "pedsynth/pipeline.hpp"

using json = nlohmann::json;
using namespace pedsynth;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- run config

struct RunConfig {
    std::uint64_t seed = 0;
    std::string out = "run";
    std::string catalog;   // paths.catalog
    std::string cameras;   // paths.cameras
    std::string scenes;    // paths.scenes (directory)
    int count = 0;         // population.count
    int mix_original = -1; // -1 = default split (all random)
    int mix_web = -1;
    int mix_random = -1;
    int uv_size = 64;       // population.uv_size
    int web_pool = 8;       // population.web_pool
    int width = 0;          // render.width, 0 = camera native
    int height = 0;         // render.height
    int workers = 1;        // render.workers
    double fps = kVideoFps;                       // sampling.fps
    double interval = kDefaultSamplingIntervalS;  // sampling.interval
    double duration = 60.0;                       // sampling.duration
};

// `key = value` lines grouped under `[section]` headers; `#` comments.
std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(path + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
        kv[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    const auto kv = parse_config_file(path);
    std::vector<std::string> bad;
    auto get_u64 = [&](const char* k, std::uint64_t& out) {
        auto it = kv.find(k);
        if (it == kv.end()) return;
        try { out = std::stoull(it->second); } catch (...) { bad.push_back(k); }
    };
    auto get_int = [&](const char* k, int& out) {
        auto it = kv.find(k);
        if (it == kv.end()) return;
        try { out = std::stoi(it->second); } catch (...) { bad.push_back(k); }
    };
    auto get_dbl = [&](const char* k, double& out) {
        auto it = kv.find(k);
        if (it == kv.end()) return;
        try { out = std::stod(it->second); } catch (...) { bad.push_back(k); }
    };
    auto get_str = [&](const char* k, std::string& out) {
        auto it = kv.find(k);
        if (it != kv.end()) out = it->second;
    };
    get_u64("seed", cfg.seed);
    get_str("out", cfg.out);
    get_str("paths.catalog", cfg.catalog);
    get_str("paths.cameras", cfg.cameras);
    get_str("paths.scenes", cfg.scenes);
    get_int("population.count", cfg.count);
    get_int("population.mix_original", cfg.mix_original);
    get_int("population.mix_web", cfg.mix_web);
    get_int("population.mix_random", cfg.mix_random);
    get_int("population.uv_size", cfg.uv_size);
    get_int("population.web_pool", cfg.web_pool);
    get_int("render.width", cfg.width);
    get_int("render.height", cfg.height);
    get_int("render.workers", cfg.workers);
    get_dbl("sampling.fps", cfg.fps);
    get_dbl("sampling.interval", cfg.interval);
    get_dbl("sampling.duration", cfg.duration);

    static const std::set<std::string> known = {
        "seed", "out", "paths.catalog", "paths.cameras", "paths.scenes",
        "population.count", "population.mix_original", "population.mix_web",
        "population.mix_random", "population.uv_size", "population.web_pool",
        "render.width", "render.height", "render.workers",
        "sampling.fps", "sampling.interval", "sampling.duration"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) bad.push_back(k + " (unknown)");
    if (!bad.empty()) {
        std::string msg = "invalid config fields:";
        for (const auto& f : bad) msg += " " + f;
        throw ConfigError(msg);
    }
}

// ---------------------------------------------------------------- helpers

int scene_number(const std::string& name) {
    int n = 0;
    return std::sscanf(name.c_str(), "s%d", &n) == 1 ? n : 0;
}

int camera_number(const std::string& id) {
    int n = 0;
    return std::sscanf(id.c_str(), "c%d", &n) == 1 ? n : 0;
}

std::string resolve_scene(const RunConfig& cfg, const std::string& scene) {
    if (fs::exists(scene)) return scene;
    if (!cfg.scenes.empty()) {
        const fs::path p = fs::path(cfg.scenes) / (scene + ".scene");
        if (fs::exists(p)) return p.string();
    }
    throw ConfigError("scene not found: " + scene);
}

std::vector<Character> load_population(const RunConfig& cfg) {
    const fs::path dir = fs::path(cfg.out) / "characters";
    if (!fs::exists(dir))
        throw ConfigError("no characters under " + dir.string() + "; run gen-characters first");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".char") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Character> population;
    for (const auto& f : files) {
        std::ifstream in(f);
        std::stringstream ss;
        ss << in.rdbuf();
        population.push_back(parse_character_file(ss.str()));
    }
    if (population.empty()) throw ConfigError("character directory is empty: " + dir.string());
    return population;
}

void emit(const json& summary, bool as_json) {
    if (as_json) {
        std::cout << summary.dump() << "\n";
        return;
    }
    for (const auto& [k, v] : summary.items())
        std::cout << k << " " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
}

// Writes only when the content changed; keeps reruns byte-stable on disk.
void write_if_changed(const std::string& path, const std::string& content) {
    if (fs::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        if (ss.str() == content) return;
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------- commands

json cmd_gen_textures(const RunConfig& cfg, int colors, int patterns, bool write_images) {
    if (colors < 1 || colors > kPaletteSize)
        throw ConfigError("colors must be in [1," + std::to_string(kPaletteSize) + "]");
    const auto catalog = build_patterns();
    if (patterns < 1 || patterns > int(catalog.size()))
        throw ConfigError("patterns must be in [1," + std::to_string(catalog.size()) + "]");
    const fs::path dir = fs::path(cfg.out) / "textures";
    fs::create_directories(dir);
    std::string manifest;
    long maps = 0;
    for (int c = 0; c < colors; ++c) {
        for (int p = 0; p < patterns; ++p) {
            const std::string id = random_uv_id(c, p);
            manifest += id + "\n";
            ++maps;
            if (write_images) {
                const UvTextureMap uv = compose_uv_map(c, p, cfg.uv_size, cfg.uv_size);
                write_png(uv.raster, (dir / (id + ".png")).string());
            }
        }
    }
    write_if_changed((dir / "manifest.txt").string(), manifest);
    return {{"command", "gen-textures"},
            {"maps", maps},
            {"colors", colors},
            {"patterns", patterns},
            {"manifest", (dir / "manifest.txt").string()}};
}

json cmd_gen_characters(const RunConfig& cfg) {
    if (cfg.catalog.empty()) throw ConfigError("paths.catalog is required");
    PopulationSpec spec;
    spec.n_total = cfg.count;
    if (cfg.mix_original < 0 && cfg.mix_web < 0 && cfg.mix_random < 0) {
        spec.mix_random = cfg.count; // default: fully procedural textures
    } else {
        spec.mix_original = std::max(cfg.mix_original, 0);
        spec.mix_web = std::max(cfg.mix_web, 0);
        spec.mix_random = std::max(cfg.mix_random, 0);
    }
    spec.seed = cfg.seed;
    spec.uv_size = cfg.uv_size;
    const Catalog catalog = load_catalog(cfg.catalog);
    const TexturePool pool = make_stock_web_pool(cfg.seed, cfg.web_pool, cfg.uv_size);
    const auto population = generate_population(spec, catalog, pool);

    const fs::path dir = fs::path(cfg.out) / "characters";
    fs::create_directories(dir);
    std::string manifest;
    for (const auto& c : population) {
        char name[32];
        std::snprintf(name, sizeof name, "%06d.char", c.id);
        write_if_changed((dir / name).string(), emit_character_file(c));
        manifest += std::string(name) + "\n";
    }
    write_if_changed((dir / "manifest.txt").string(), manifest);
    return {{"command", "gen-characters"},
            {"characters", population.size()},
            {"mix_original", spec.mix_original},
            {"mix_web", spec.mix_web},
            {"mix_random", spec.mix_random},
            {"dir", dir.string()}};
}

json cmd_simulate(const RunConfig& cfg, const std::string& scene_arg, bool no_frames) {
    if (cfg.cameras.empty()) throw ConfigError("paths.cameras is required");
    const Scene scene = load_scene(resolve_scene(cfg, scene_arg));
    const auto rigs = load_cameras(cfg.cameras);
    const auto population = load_population(cfg);
    const TexturePool pool = make_stock_web_pool(cfg.seed, cfg.web_pool, cfg.uv_size);

    SimulateOptions options;
    options.duration_s = cfg.duration;
    options.fps = cfg.fps;
    options.interval_s = cfg.interval;
    options.seed = derive_stream_seed(cfg.seed, std::uint64_t(scene_number(scene.name)));
    options.workers = cfg.workers;
    options.write_frames = !no_frames;
    options.override_width = cfg.width;
    options.override_height = cfg.height;

    const std::string frames_root = (fs::path(cfg.out) / "frames").string();
    const SceneSimResult result =
        simulate_scene(scene, rigs, population, pool, options, frames_root);

    const fs::path sim_dir = fs::path(cfg.out) / "sim" / scene.name;
    fs::create_directories(sim_dir);
    long annotated = 0;
    for (std::size_t ci = 0; ci < scene.camera_ids.size(); ++ci) {
        std::ostringstream ann;
        write_annotations(result.annotations[ci], ann, cfg.fps);
        write_if_changed((sim_dir / (scene.camera_ids[ci] + ".ann")).string(), ann.str());
        annotated += long(result.annotations[ci].size());
    }
    std::string events;
    for (const auto& line : result.event_log) events += line + "\n";
    write_if_changed((sim_dir / "events.log").string(), events);

    return {{"command", "simulate"},
            {"scene", scene.name},
            {"cameras", scene.camera_ids.size()},
            {"annotated_frames", annotated},
            {"events", result.event_log.size()},
            {"frames_written", !no_frames},
            {"sim_dir", sim_dir.string()}};
}

json cmd_crop(const RunConfig& cfg, const std::string& scene_arg) {
    if (cfg.cameras.empty()) throw ConfigError("paths.cameras is required");
    const Scene scene = load_scene(resolve_scene(cfg, scene_arg));
    const auto rigs = load_cameras(cfg.cameras);
    const fs::path sim_dir = fs::path(cfg.out) / "sim" / scene.name;
    const fs::path staging = fs::path(cfg.out) / "staging";
    fs::create_directories(staging);

    std::vector<CropRecord> all;
    for (const auto& cam_id : scene.camera_ids) {
        auto it = rigs.find(cam_id);
        if (it == rigs.end())
            throw ConfigError("scene references unknown camera " + cam_id);
        const int w = cfg.width > 0 ? cfg.width : it->second.width;
        const int h = cfg.height > 0 ? cfg.height : it->second.height;
        const auto annotations = read_annotations((sim_dir / (cam_id + ".ann")).string());
        const fs::path frame_dir = fs::path(cfg.out) / "frames" / scene.name / cam_id;
        Image cached;
        long cached_index = -1;
        auto loader = [&](long frame_index) -> const Image* {
            if (frame_index != cached_index) {
                const fs::path p = frame_dir / frame_file_name(frame_index);
                if (!fs::exists(p)) return nullptr;
                cached = read_png(p.string());
                cached_index = frame_index;
            }
            return &cached;
        };
        auto crops = crop_camera_stream(annotations, scene_number(scene.name),
                                        camera_number(cam_id), w, h, loader);
        all.insert(all.end(), std::make_move_iterator(crops.begin()),
                   std::make_move_iterator(crops.end()));
    }
    const Manifest manifest = assemble(all, staging.string());
    write_manifest(manifest, (staging / (scene.name + ".csv")).string());
    return {{"command", "crop"},
            {"scene", scene.name},
            {"crops", manifest.entries.size()},
            {"manifest", (staging / (scene.name + ".csv")).string()}};
}

json cmd_assemble(const RunConfig& cfg, long subsample_to) {
    const fs::path staging = fs::path(cfg.out) / "staging";
    if (!fs::exists(staging))
        throw ConfigError("no staging directory under " + cfg.out + "; run crop first");
    std::vector<fs::path> manifests;
    for (const auto& e : fs::directory_iterator(staging))
        if (e.path().extension() == ".csv") manifests.push_back(e.path());
    std::sort(manifests.begin(), manifests.end());
    if (manifests.empty()) throw ConfigError("no crop manifests in " + staging.string());

    std::vector<CropRecord> crops;
    for (const auto& mpath : manifests) {
        const Manifest m = read_manifest(mpath.string());
        for (const auto& e : m.entries) {
            CropRecord rec;
            rec.pid = e.pid;
            rec.scene = e.scene;
            rec.cam = e.cam;
            rec.frame = e.frame;
            rec.box.left = e.left;
            rec.box.top = e.top;
            rec.box.width = e.width;
            rec.box.height = e.height;
            rec.image = read_png((staging / e.file).string());
            crops.push_back(std::move(rec));
        }
    }
    const fs::path root = fs::path(cfg.out) / "dataset";
    Manifest manifest = assemble(crops, root.string());
    if (subsample_to > 0) manifest = subsample(manifest, subsample_to, cfg.seed);
    write_manifest(manifest, (root / "manifest.csv").string());
    const ManifestTotals t = manifest.totals();
    return {{"command", "assemble"},
            {"identities", t.identities},
            {"scenes", t.scenes},
            {"cameras", t.cameras},
            {"videos", t.videos},
            {"bboxes", t.bboxes},
            {"root", root.string()},
            {"manifest", (root / "manifest.csv").string()}};
}

json cmd_stats(const RunConfig& cfg, std::string manifest_path, bool as_json) {
    if (manifest_path.empty())
        manifest_path = (fs::path(cfg.out) / "dataset" / "manifest.csv").string();
    const Manifest m = read_manifest(manifest_path);
    const ManifestTotals t = m.totals();
    if (!as_json) std::cout << stats_report(m);
    return {{"command", "stats"},
            {"identities", t.identities},
            {"scenes", t.scenes},
            {"cameras", t.cameras},
            {"videos", t.videos},
            {"bboxes", t.bboxes}};
}

json cmd_eval(const std::string& distmat_path, const std::string& query_path,
              const std::string& gallery_path, bool as_json) {
    EvalInput input;
    input.distmat = read_distmat(distmat_path, input.n_query, input.n_gallery);
    read_id_cam_csv(query_path, input.query_ids, input.query_cams);
    read_id_cam_csv(gallery_path, input.gallery_ids, input.gallery_cams);
    const EvalResult r = evaluate(input);
    if (!as_json) std::cout << format_result(r) << "\n";
    auto rank = [&](std::size_t k) {
        return k <= r.cmc.size() ? r.cmc[k - 1] : r.cmc.back();
    };
    return {{"command", "eval"},
            {"rank1", rank(1)},
            {"rank5", rank(5)},
            {"rank10", rank(10)},
            {"mAP", r.map},
            {"valid_queries", r.valid_queries},
            {"skipped_queries", r.skipped_queries}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pedsynth: deterministic synthetic pedestrian dataset pipeline"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    bool as_json = false;
    bool seed_set = false, out_set = false;
    std::uint64_t seed_flag = 0;
    std::string out_flag;
    app.add_option("--config", config_path, "run config file (key = value sections)");
    app.add_option("--seed", seed_flag, "global seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", out_flag, "output root (overrides config)")
        ->each([&](const std::string&) { out_set = true; });
    app.add_flag("--json", as_json, "machine-readable one-line summary");

    auto* gen_tex = app.add_subcommand("gen-textures", "compose the procedural texture pool");
    int colors = kPaletteSize, patterns = 16;
    bool write_images = false;
    gen_tex->add_option("--colors", colors, "palette colors to use");
    gen_tex->add_option("--patterns", patterns, "patterns to use");
    gen_tex->add_flag("--write-images", write_images, "also write one PNG per map");

    auto* gen_chars = app.add_subcommand("gen-characters", "sample the character population");
    gen_chars->add_option("--count", cfg.count, "population size (overrides config)");
    gen_chars->add_option("--mix-original", cfg.mix_original, "characters with stock textures");
    gen_chars->add_option("--mix-web", cfg.mix_web, "characters with web-pool textures");
    gen_chars->add_option("--mix-random", cfg.mix_random, "characters with random textures");

    auto* simulate = app.add_subcommand("simulate", "run one scene and record all cameras");
    std::string scene_arg;
    bool no_frames = false;
    simulate->add_option("--scene", scene_arg, "scene name or path")->required();
    simulate->add_option("--duration", cfg.duration, "seconds of video");
    simulate->add_option("--workers", cfg.workers, "render worker threads");
    simulate->add_flag("--no-frames", no_frames, "annotations and events only");

    auto* crop = app.add_subcommand("crop", "cut bounding-box crops for one scene");
    crop->add_option("--scene", scene_arg, "scene name or path")->required();

    auto* assemble_cmd = app.add_subcommand("assemble", "merge crops into the dataset root");
    long subsample_to = 0;
    assemble_cmd->add_option("--subsample", subsample_to,
                             "subsample the manifest to this many boxes");

    auto* stats = app.add_subcommand("stats", "report dataset statistics");
    std::string manifest_path;
    stats->add_option("--manifest", manifest_path, "manifest csv (default: dataset root)");

    auto* eval = app.add_subcommand("eval", "CMC/mAP from a distance matrix");
    std::string distmat_path, query_path, gallery_path;
    eval->add_option("--distmat", distmat_path, "binary distance matrix")->required();
    eval->add_option("--query", query_path, "query id,cam csv")->required();
    eval->add_option("--gallery", gallery_path, "gallery id,cam csv")->required();

    // global flags (--config/--seed/--out/--json) may follow the subcommand
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        // precedence: built-in defaults < config file < flags
        RunConfig flag_snapshot = cfg;
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        if (gen_chars->count("--count")) cfg.count = flag_snapshot.count;
        if (gen_chars->count("--mix-original")) cfg.mix_original = flag_snapshot.mix_original;
        if (gen_chars->count("--mix-web")) cfg.mix_web = flag_snapshot.mix_web;
        if (gen_chars->count("--mix-random")) cfg.mix_random = flag_snapshot.mix_random;
        if (simulate->count("--duration")) cfg.duration = flag_snapshot.duration;
        if (simulate->count("--workers")) cfg.workers = flag_snapshot.workers;
        if (seed_set) cfg.seed = seed_flag;
        if (out_set) cfg.out = out_flag;
        fs::create_directories(cfg.out);

        json summary;
        if (gen_tex->parsed())
            summary = cmd_gen_textures(cfg, colors, patterns, write_images);
        else if (gen_chars->parsed())
            summary = cmd_gen_characters(cfg);
        else if (simulate->parsed())
            summary = cmd_simulate(cfg, scene_arg, no_frames);
        else if (crop->parsed())
            summary = cmd_crop(cfg, scene_arg);
        else if (assemble_cmd->parsed())
            summary = cmd_assemble(cfg, subsample_to);
        else if (stats->parsed())
            summary = cmd_stats(cfg, manifest_path, as_json);
        else if (eval->parsed())
            summary = cmd_eval(distmat_path, query_path, gallery_path, as_json);
        summary["seed"] = cfg.seed;
        emit(summary, as_json);
    } catch (const ParseError& e) {
        std::cerr << "error: parse: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 1;
    } catch (const IntegrityError& e) {
        std::cerr << "error: integrity: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
