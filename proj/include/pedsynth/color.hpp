#pragma once

#include <cmath>
#include <vector>

#include "pedsynth/errors.hpp"
#include "pedsynth/image.hpp"

namespace pedsynth {

struct HsvColor {
    double h = 0.0; // degrees, [0,360)
    double s = 0.0; // [0,1]
    double v = 0.0; // [0,1]
    bool operator==(const HsvColor&) const = default;
};

// Standard hexcone conversion, channels rounded to nearest 8-bit value.
inline Rgb8 hsv_to_rgb(const HsvColor& c) {
    const double h = c.h / 60.0;
    const int sector = static_cast<int>(std::floor(h)) % 6;
    const double f = h - std::floor(h);
    const double p = c.v * (1.0 - c.s);
    const double q = c.v * (1.0 - c.s * f);
    const double t = c.v * (1.0 - c.s * (1.0 - f));
    double r, g, b;
    switch (sector) {
        case 0: r = c.v; g = t; b = p; break;
        case 1: r = q; g = c.v; b = p; break;
        case 2: r = p; g = c.v; b = t; break;
        case 3: r = p; g = q; b = c.v; break;
        case 4: r = t; g = p; b = c.v; break;
        default: r = c.v; g = p; b = q; break;
    }
    auto to8 = [](double x) { return static_cast<std::uint8_t>(std::lround(x * 255.0)); };
    return {to8(r), to8(g), to8(b)};
}

inline constexpr int kPaletteSize = 625;
inline constexpr int kChromaticCount = 600; // 24 hues x 5 sat x 5 val
inline constexpr int kGrayCount = 25;

// 600 chromatic colors on a regular HSV grid (hue step 15, S and V in
// {0.2,...,1.0}) followed by 25 grays with V = k/24. Order is fixed.
inline std::vector<HsvColor> build_palette() {
    std::vector<HsvColor> palette;
    palette.reserve(kPaletteSize);
    for (int hi = 0; hi < 24; ++hi)
        for (int si = 1; si <= 5; ++si)
            for (int vi = 1; vi <= 5; ++vi)
                palette.push_back({hi * 15.0, si * 0.2, vi * 0.2});
    for (int k = 0; k <= 24; ++k)
        palette.push_back({0.0, 0.0, k / 24.0});
    return palette;
}

} // namespace pedsynth
