#pragma once

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "pedsynth/errors.hpp"

namespace pedsynth {

struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb8&) const = default;
};

// Row-major RGB8 raster.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb8 fill = {})
        : width_(width), height_(height),
          pixels_(static_cast<std::size_t>(width) * height, fill) {
        if (width <= 0 || height <= 0)
            throw ValidationError("image dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return pixels_.empty(); }

    Rgb8& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    const Rgb8& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    const std::vector<Rgb8>& pixels() const { return pixels_; }

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb8> pixels_;
};

// Bilinear resample to (out_w, out_h). Pixel centers at half-integer
// coordinates; edge-clamped.
inline Image resample_bilinear(const Image& src, int out_w, int out_h) {
    if (src.empty()) throw ValidationError("cannot resample an empty image");
    if (src.width() == out_w && src.height() == out_h) return src;
    Image dst(out_w, out_h);
    const double sx = static_cast<double>(src.width()) / out_w;
    const double sy = static_cast<double>(src.height()) / out_h;
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    for (int y = 0; y < out_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = clampi(static_cast<int>(std::floor(fy)), 0, src.height() - 1);
        const int y1 = clampi(y0 + 1, 0, src.height() - 1);
        const double wy = fy - std::floor(fy);
        for (int x = 0; x < out_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = clampi(static_cast<int>(std::floor(fx)), 0, src.width() - 1);
            const int x1 = clampi(x0 + 1, 0, src.width() - 1);
            const double wx = fx - std::floor(fx);
            auto lerp = [&](auto get) {
                const double top = get(src.at(x0, y0)) * (1 - wx) + get(src.at(x1, y0)) * wx;
                const double bot = get(src.at(x0, y1)) * (1 - wx) + get(src.at(x1, y1)) * wx;
                const double v = top * (1 - wy) + bot * wy;
                return static_cast<std::uint8_t>(std::lround(v));
            };
            dst.at(x, y) = {lerp([](Rgb8 p) { return double(p.r); }),
                            lerp([](Rgb8 p) { return double(p.g); }),
                            lerp([](Rgb8 p) { return double(p.b); })};
        }
    }
    return dst;
}

namespace detail {
struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
} // namespace detail

inline void write_png(const Image& img, const std::string& path) {
    if (img.empty()) throw ValidationError("cannot write an empty image: " + path);
    std::unique_ptr<std::FILE, detail::FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // No ancillary chunks (no tIME) so identical pixels give identical bytes.
    png_write_info(png, info);
    std::vector<png_bytep> rows(img.height());
    for (int y = 0; y < img.height(); ++y)
        rows[y] = reinterpret_cast<png_bytep>(const_cast<Rgb8*>(&img.at(0, y)));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline Image read_png(const std::string& path) {
    std::unique_ptr<std::FILE, detail::FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open for reading: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png read failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    // Normalize everything to 8-bit RGB.
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    Image img(w, h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = reinterpret_cast<png_bytep>(&img.at(0, y));
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

} // namespace pedsynth
