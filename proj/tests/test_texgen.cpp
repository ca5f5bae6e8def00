#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "pedsynth/color.hpp"
#include "pedsynth/texgen.hpp"

using namespace pedsynth;

TEST_CASE("palette has 625 entries: 600 chromatic plus 25 grays") {
    const auto palette = build_palette();
    REQUIRE(palette.size() == 625);

    int chromatic = 0, gray = 0;
    std::set<int> hues;
    for (const auto& c : palette) {
        if (c.s == 0.0) {
            ++gray;
        } else {
            ++chromatic;
            hues.insert(int(std::lround(c.h)));
        }
    }
    CHECK(chromatic == 600);
    CHECK(gray == 25);
    CHECK(hues.size() == 24);
    for (int h : hues) CHECK(h % 15 == 0);
}

TEST_CASE("palette entries are unique and in range") {
    const auto palette = build_palette();
    std::set<std::tuple<double, double, double>> seen;
    for (const auto& c : palette) {
        CHECK(c.h >= 0.0);
        CHECK(c.h < 360.0);
        CHECK(c.s >= 0.0);
        CHECK(c.s <= 1.0);
        CHECK(c.v >= 0.0);
        CHECK(c.v <= 1.0);
        seen.insert({c.h, c.s, c.v});
    }
    CHECK(seen.size() == palette.size());
}

TEST_CASE("hsv_to_rgb hits the hexcone corners") {
    CHECK(hsv_to_rgb({0, 1, 1}) == Rgb8{255, 0, 0});
    CHECK(hsv_to_rgb({60, 1, 1}) == Rgb8{255, 255, 0});
    CHECK(hsv_to_rgb({120, 1, 1}) == Rgb8{0, 255, 0});
    CHECK(hsv_to_rgb({180, 1, 1}) == Rgb8{0, 255, 255});
    CHECK(hsv_to_rgb({240, 1, 1}) == Rgb8{0, 0, 255});
    CHECK(hsv_to_rgb({300, 1, 1}) == Rgb8{255, 0, 255});
    // hand-applied hexcone formula: s=0 leaves v on all channels
    CHECK(hsv_to_rgb({0, 0, 0.5}) == Rgb8{128, 128, 128});
}

TEST_CASE("pattern catalog: 16 specs, all families, dense ids") {
    const auto patterns = build_patterns();
    REQUIRE(patterns.size() == 16);
    std::set<int> ids;
    std::set<PatternFamily> families;
    for (const auto& p : patterns) {
        ids.insert(p.id);
        families.insert(p.family);
    }
    CHECK(ids.size() == 16);
    CHECK(*ids.begin() == 0);
    CHECK(*ids.rbegin() == 15);
    CHECK(families.size() == 3);
}

TEST_CASE("compose_uv_map is deterministic and records provenance") {
    const auto a = compose_uv_map(42, 7, 64, 64);
    const auto b = compose_uv_map(42, 7, 64, 64);
    CHECK(a.raster == b.raster);
    CHECK(a.source == TextureSource::random);
    CHECK(a.palette_index == 42);
    CHECK(a.pattern_id == 7);
}

TEST_CASE("compose_uv_map rejects out-of-range inputs") {
    CHECK_THROWS_AS(compose_uv_map(625, 0, 64, 64), std::out_of_range);
    CHECK_THROWS_AS(compose_uv_map(-1, 0, 64, 64), std::out_of_range);
    CHECK_THROWS_AS(compose_uv_map(0, 16, 64, 64), std::out_of_range);
}

TEST_CASE("pattern foreground contrasts with a white gray background") {
    // last palette entry is the V=1.0 gray
    const int white_index = kPaletteSize - 1;
    const auto palette = build_palette();
    REQUIRE(palette[white_index].s == 0.0);
    REQUIRE(palette[white_index].v == 1.0);
    const Rgb8 bg = hsv_to_rgb(palette[white_index]);
    const auto uv = compose_uv_map(white_index, 8, 64, 64); // vertical stripes
    bool has_bg = false, has_fg = false;
    for (const auto& px : uv.raster.pixels()) {
        if (px == bg) has_bg = true;
        else has_fg = true;
    }
    CHECK(has_bg);
    CHECK(has_fg);
}

TEST_CASE("import_image_as_uv: identity copy at matching size") {
    Image src(512, 512);
    for (int y = 0; y < 512; ++y)
        for (int x = 0; x < 512; ++x)
            src.at(x, y) = {std::uint8_t(x & 0xff), std::uint8_t(y & 0xff), 7};
    const auto uv = import_image_as_uv(src, 512, 512);
    CHECK(uv.raster == src);
    CHECK(uv.source == TextureSource::web_image);
}

TEST_CASE("import_image_as_uv resamples; corners follow the bilinear oracle") {
    Image src(1024, 512);
    for (int y = 0; y < 512; ++y)
        for (int x = 0; x < 1024; ++x)
            src.at(x, y) = {std::uint8_t((x / 4) & 0xff), std::uint8_t(y & 0xff), 0};
    const auto uv = import_image_as_uv(src, 512, 512);
    REQUIRE(uv.raster.width() == 512);
    REQUIRE(uv.raster.height() == 512);
    // corner pixels map onto the clamped corner samples of the source
    CHECK(int(uv.raster.at(0, 0).g) == int(src.at(0, 0).g));
    CHECK(int(uv.raster.at(0, 511).g) == int(src.at(0, 511).g));
}

TEST_CASE("import_image_as_uv rejects an empty raster") {
    CHECK_THROWS_AS(import_image_as_uv(Image{}), ValidationError);
}
