#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pedsynth/color.hpp"
#include "pedsynth/errors.hpp"
#include "pedsynth/image.hpp"

namespace pedsynth {

enum class PatternFamily { spots, stripes, lattice };

inline const char* to_string(PatternFamily f) {
    switch (f) {
        case PatternFamily::spots: return "spots";
        case PatternFamily::stripes: return "stripes";
        default: return "lattice";
    }
}

struct PatternSpec {
    int id = 0;
    PatternFamily family = PatternFamily::spots;
    double spacing_px = 0;   // spot/lattice pitch, or stripe period
    double radius_px = 0;    // spots only
    double line_width_px = 0; // stripes and lattice
    double orientation_deg = 0; // stripes only
};

inline constexpr int kPatternCount = 16;

// Fixed catalog: 6 spot variants, 6 stripe variants, 4 lattice variants.
// Geometry in pixels at the 512x512 reference size.
inline std::vector<PatternSpec> build_patterns() {
    std::vector<PatternSpec> specs;
    specs.reserve(kPatternCount);
    int id = 0;
    auto spot = [&](double spacing, double radius) {
        specs.push_back({id++, PatternFamily::spots, spacing, radius, 0, 0});
    };
    auto stripe = [&](double spacing, double width, double orient) {
        specs.push_back({id++, PatternFamily::stripes, spacing, 0, width, orient});
    };
    auto lattice = [&](double pitch, double width) {
        specs.push_back({id++, PatternFamily::lattice, pitch, 0, width, 0});
    };
    spot(32, 6);
    spot(32, 12);
    spot(64, 10);
    spot(64, 24);
    spot(96, 16);
    spot(48, 4);
    stripe(48, 16, 0);    // horizontal bands
    stripe(48, 32, 0);
    stripe(48, 16, 90);   // vertical
    stripe(48, 32, 90);
    stripe(64, 20, 45);   // diagonal
    stripe(64, 40, 45);
    lattice(48, 6);
    lattice(48, 16);
    lattice(96, 10);
    lattice(32, 4);
    return specs;
}

enum class TextureSource { original, web_image, random };

inline const char* to_string(TextureSource s) {
    switch (s) {
        case TextureSource::original: return "original";
        case TextureSource::web_image: return "web_image";
        default: return "random";
    }
}

struct UvTextureMap {
    Image raster;
    TextureSource source = TextureSource::random;
    int palette_index = -1; // set when source == random
    int pattern_id = -1;    // set when source == random
};

inline constexpr int kDefaultUvSize = 512;

// Foreground from background: V shifted by +-0.4 (clamped), hue rotated 180
// degrees when the background is chromatic.
inline HsvColor contrasting_foreground(const HsvColor& bg) {
    HsvColor fg = bg;
    fg.v = bg.v <= 0.5 ? std::min(1.0, bg.v + 0.4) : std::max(0.0, bg.v - 0.4);
    if (bg.s > 0.0) fg.h = std::fmod(bg.h + 180.0, 360.0);
    return fg;
}

namespace detail {

// Pattern membership at reference-space coordinates (512x512 basis), so a
// given pattern looks the same at every output size.
inline bool pattern_covers(const PatternSpec& p, double x, double y) {
    switch (p.family) {
        case PatternFamily::spots: {
            const double cx = std::fmod(x, p.spacing_px) - p.spacing_px / 2;
            const double cy = std::fmod(y, p.spacing_px) - p.spacing_px / 2;
            return cx * cx + cy * cy <= p.radius_px * p.radius_px;
        }
        case PatternFamily::stripes: {
            const double rad = p.orientation_deg * M_PI / 180.0;
            const double d = x * std::sin(rad) + y * std::cos(rad);
            const double m = d - p.spacing_px * std::floor(d / p.spacing_px);
            return m < p.line_width_px;
        }
        case PatternFamily::lattice: {
            const double mx = std::fmod(x, p.spacing_px);
            const double my = std::fmod(y, p.spacing_px);
            return mx < p.line_width_px || my < p.line_width_px;
        }
    }
    return false;
}

} // namespace detail

inline UvTextureMap compose_uv_map(int palette_index, int pattern_id,
                                   int width = kDefaultUvSize, int height = kDefaultUvSize) {
    if (palette_index < 0 || palette_index >= kPaletteSize)
        throw std::out_of_range("palette_index out of range: " + std::to_string(palette_index));
    if (pattern_id < 0 || pattern_id >= kPatternCount)
        throw std::out_of_range("pattern_id out of range: " + std::to_string(pattern_id));
    if (width < 64 || height < 64)
        throw ValidationError("UV maps must be at least 64x64");

    static const std::vector<HsvColor> palette = build_palette();
    static const std::vector<PatternSpec> patterns = build_patterns();

    const HsvColor bg_hsv = palette[palette_index];
    const Rgb8 bg = hsv_to_rgb(bg_hsv);
    const Rgb8 fg = hsv_to_rgb(contrasting_foreground(bg_hsv));
    const PatternSpec& spec = patterns[pattern_id];

    UvTextureMap uv;
    uv.raster = Image(width, height, bg);
    uv.source = TextureSource::random;
    uv.palette_index = palette_index;
    uv.pattern_id = pattern_id;
    const double sx = double(kDefaultUvSize) / width;
    const double sy = double(kDefaultUvSize) / height;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (detail::pattern_covers(spec, (x + 0.5) * sx, (y + 0.5) * sy))
                uv.raster.at(x, y) = fg;
    return uv;
}

inline UvTextureMap import_image_as_uv(const Image& raster,
                                       int width = kDefaultUvSize, int height = kDefaultUvSize) {
    if (raster.empty()) throw ValidationError("imported UV image is empty");
    if (width < 64 || height < 64)
        throw ValidationError("UV maps must be at least 64x64");
    UvTextureMap uv;
    uv.raster = resample_bilinear(raster, width, height);
    uv.source = TextureSource::web_image;
    return uv;
}

} // namespace pedsynth
