#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pedsynth/capture.hpp"
#include "pedsynth/errors.hpp"
#include "pedsynth/image.hpp"
#include "pedsynth/rng.hpp"

namespace pedsynth {

struct ManifestEntry {
    int pid = 0;
    int scene = 0;
    int cam = 0;
    long frame = 0;
    std::string file; // path relative to the dataset root
    int left = 0, top = 0, width = 0, height = 0;

    bool operator==(const ManifestEntry&) const = default;
};

struct ManifestTotals {
    int identities = 0;
    int scenes = 0;
    int cameras = 0;
    int videos = 0; // distinct (scene, camera) recordings
    long bboxes = 0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    ManifestTotals totals() const {
        ManifestTotals t;
        std::set<int> ids, scenes;
        std::set<std::pair<int, int>> cams, videos;
        for (const auto& e : entries) {
            ids.insert(e.pid);
            scenes.insert(e.scene);
            cams.insert({e.scene, e.cam});
            videos.insert({e.scene, e.cam});
        }
        t.identities = int(ids.size());
        t.scenes = int(scenes.size());
        t.cameras = int(cams.size());
        t.videos = int(videos.size());
        t.bboxes = long(entries.size());
        return t;
    }
};

// Market-style file name: {pid:06}_s{scene:02}_c{cam:02}_f{frame:07}.png
inline std::string crop_file_name(int pid, int scene, int cam, long frame) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%06d_s%02d_c%02d_f%07ld.png", pid, scene, cam, frame);
    return buf;
}

inline void write_manifest(const Manifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "pid,scene,cam,frame,file,left,top,w,h\n";
    for (const auto& e : m.entries)
        out << e.pid << "," << e.scene << "," << e.cam << "," << e.frame << "," << e.file
            << "," << e.left << "," << e.top << "," << e.width << "," << e.height << "\n";
    if (!out) throw IoError("write failed: " + path);
}

inline Manifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    Manifest m;
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) return m;
    ++lineno;
    if (line != "pid,scene,cam,frame,file,left,top,w,h")
        throw ParseError(path + ":1: unexpected manifest header");
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ManifestEntry e;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 9)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 9 fields");
        try {
            e.pid = std::stoi(fields[0]);
            e.scene = std::stoi(fields[1]);
            e.cam = std::stoi(fields[2]);
            e.frame = std::stol(fields[3]);
            e.file = fields[4];
            e.left = std::stoi(fields[5]);
            e.top = std::stoi(fields[6]);
            e.width = std::stoi(fields[7]);
            e.height = std::stoi(fields[8]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed field");
        }
        m.entries.push_back(std::move(e));
    }
    return m;
}

// In-memory PNG encoding; used to compare against files on disk without
// rewriting them.
inline std::vector<unsigned char> encode_png(const Image& img) {
    std::vector<unsigned char> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png encode failed");
    }
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t n) {
            auto* v = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(p));
            v->insert(v->end(), data, data + n);
        },
        [](png_structp) {});
    png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(img.height());
    for (int y = 0; y < img.height(); ++y)
        rows[y] = reinterpret_cast<png_bytep>(const_cast<Rgb8*>(&img.at(0, y)));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

struct CropRecord {
    int pid = 0;
    int scene = 0;
    int cam = 0;
    long frame = 0;
    Image image;
    CropBox box;
};

// Writes crops into `root` under the Market-style naming convention and
// returns the manifest. Re-running over identical inputs rewrites nothing;
// a name collision with different pixels is an integrity error.
inline Manifest assemble(const std::vector<CropRecord>& crops, const std::string& root) {
    namespace fs = std::filesystem;
    fs::create_directories(root);
    Manifest manifest;
    for (const auto& c : crops) {
        ManifestEntry e;
        e.pid = c.pid;
        e.scene = c.scene;
        e.cam = c.cam;
        e.frame = c.frame;
        e.file = crop_file_name(c.pid, c.scene, c.cam, c.frame);
        e.left = c.box.left;
        e.top = c.box.top;
        e.width = c.box.width;
        e.height = c.box.height;

        const fs::path path = fs::path(root) / e.file;
        const std::vector<unsigned char> encoded = encode_png(c.image);
        if (fs::exists(path)) {
            std::ifstream in(path, std::ios::binary);
            std::vector<unsigned char> existing((std::istreambuf_iterator<char>(in)),
                                                std::istreambuf_iterator<char>());
            if (existing != encoded)
                throw IntegrityError("existing file differs: " + path.string());
        } else {
            std::ofstream out(path, std::ios::binary);
            out.write(reinterpret_cast<const char*>(encoded.data()),
                      std::streamsize(encoded.size()));
            if (!out) throw IoError("write failed: " + path.string());
        }
        manifest.entries.push_back(std::move(e));
    }
    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) {
                  return std::tie(a.pid, a.scene, a.cam, a.frame) <
                         std::tie(b.pid, b.scene, b.cam, b.frame);
              });
    for (std::size_t i = 1; i < manifest.entries.size(); ++i)
        if (manifest.entries[i].file == manifest.entries[i - 1].file &&
            !(manifest.entries[i] == manifest.entries[i - 1]))
            throw IntegrityError("conflicting manifest entries for " + manifest.entries[i].file);
    return manifest;
}

// Identity-stratified uniform subsample without replacement: every identity
// keeps at least one image; deterministic per seed.
inline Manifest subsample(const Manifest& manifest, long target_count, std::uint64_t seed) {
    if (target_count > long(manifest.entries.size()))
        throw ConfigError("subsample target exceeds available bboxes");
    std::map<int, std::vector<std::size_t>> by_pid;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i)
        by_pid[manifest.entries[i].pid].push_back(i);
    if (target_count < long(by_pid.size()))
        throw ConfigError("subsample target smaller than identity count; stratification impossible");

    Rng rng(derive_stream_seed(seed, 0x5Bu));
    std::vector<bool> chosen(manifest.entries.size(), false);
    std::vector<std::size_t> rest;
    for (const auto& [pid, idxs] : by_pid) {
        const std::size_t keep = idxs[rng.next_below(idxs.size())];
        chosen[keep] = true;
        for (std::size_t i : idxs)
            if (i != keep) rest.push_back(i);
    }
    long remaining = target_count - long(by_pid.size());
    // partial Fisher-Yates over the leftovers
    for (long k = 0; k < remaining; ++k) {
        const std::size_t j = k + rng.next_below(rest.size() - std::size_t(k));
        std::swap(rest[std::size_t(k)], rest[j]);
        chosen[rest[std::size_t(k)]] = true;
    }
    Manifest out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i)
        if (chosen[i]) out.entries.push_back(manifest.entries[i]);
    return out;
}

// Plain-text statistics report: dataset totals plus per-camera and per-identity counts.
inline std::string stats_report(const Manifest& manifest) {
    const ManifestTotals t = manifest.totals();
    std::ostringstream out;
    out << "ids scenes cams videos bboxes\n";
    out << t.identities << " " << t.scenes << " " << t.cameras << " " << t.videos << " "
        << t.bboxes << "\n";
    std::map<std::pair<int, int>, long> per_cam;
    std::map<int, long> per_id;
    for (const auto& e : manifest.entries) {
        ++per_cam[{e.scene, e.cam}];
        ++per_id[e.pid];
    }
    out << "per-camera:\n";
    for (const auto& [key, n] : per_cam)
        out << "  s" << key.first << "c" << key.second << " " << n << "\n";
    out << "per-identity:\n";
    for (const auto& [pid, n] : per_id) out << "  " << pid << " " << n << "\n";
    return out.str();
}

} // namespace pedsynth
