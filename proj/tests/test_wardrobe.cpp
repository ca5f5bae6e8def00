#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <set>

#include "pedsynth/wardrobe.hpp"

using namespace pedsynth;

namespace {

std::string assets_dir() {
    const char* env = std::getenv("PEDSYNTH_ASSETS");
    REQUIRE(env != nullptr);
    return env;
}

std::string write_temp(const std::string& contents) {
    static int counter = 0;
    std::string path = "/tmp/pedsynth_catalog_" + std::to_string(counter++) + ".tsv";
    std::ofstream(path) << contents;
    return path;
}

TexturePool pool_with_one_web_image() {
    TexturePool pool;
    pool.add_web_image("web_000", import_image_as_uv(Image(64, 64, {10, 200, 30}), 64, 64));
    return pool;
}

} // namespace

TEST_CASE("bundled catalog loads with every slot covered") {
    const Catalog cat = load_catalog(assets_dir() + "/catalog.tsv");
    CHECK(cat.models().size() >= 20);
    std::set<Slot> slots;
    for (const auto& m : cat.models()) slots.insert(m.slot);
    CHECK(slots.size() == 10);
}

TEST_CASE("catalog rejects duplicate ids with a line number") {
    const std::string path = write_temp(
        "a\tuniversal\ttop\ttorso\tuv_a\n"
        "a\tuniversal\ttop\ttorso\tuv_b\n");
    CHECK_THROWS_WITH(load_catalog(path), Catch::Matchers::ContainsSubstring(":2:"));
}

TEST_CASE("empty catalog file is valid") {
    const Catalog cat = load_catalog(write_temp(""));
    CHECK(cat.models().empty());
}

TEST_CASE("catalog parse errors carry line numbers") {
    CHECK_THROWS_AS(load_catalog(write_temp("only\tthree\tfields\n")), ParseError);
    CHECK_THROWS_AS(load_catalog(write_temp("x\tnope\ttop\ttorso\tuv\n")), ParseError);
    CHECK_THROWS_AS(load_catalog(write_temp("x\tfemale\tbeard\thead\tuv\n")), ParseError);
}

TEST_CASE("retexture replaces the uv map and derives a new id") {
    ClothingModel shirt;
    shirt.id = "shirt";
    shirt.uv_id = "uv_shirt";
    const UvTextureMap stripes = compose_uv_map(3, 8, 64, 64);
    const ClothingModel out = retexture(shirt, stripes, "rnd_p003_t08");
    CHECK(out.id == "shirt@rnd_p003_t08");
    CHECK(out.uv_id == "rnd_p003_t08");
    CHECK(out.uv_map.raster == stripes.raster);
    CHECK(shirt.id == "shirt"); // input untouched
    CHECK(shirt.uv_id == "uv_shirt");

    const ClothingModel again = retexture(shirt, stripes, "rnd_p003_t08");
    CHECK(again.id == out.id);
}

TEST_CASE("sample_outfit fills mandatory slots and respects gender rules") {
    const Catalog cat = load_catalog(assets_dir() + "/catalog.tsv");
    const TexturePool pool = pool_with_one_web_image();
    for (int i = 0; i < 300; ++i) {
        Rng rng(derive_stream_seed(99, std::uint64_t(i)));
        const Gender g = i % 2 ? Gender::male : Gender::female;
        const Outfit o = sample_outfit(rng, g, cat, pool, TextureSource::random, {}, 64);
        CHECK(o.complete());
        if (g == Gender::female) CHECK(o.assignments.count(Slot::beard) == 0);
        if (g == Gender::male) {
            CHECK(o.assignments.count(Slot::necklace) == 0);
            CHECK(o.assignments.count(Slot::bow) == 0);
            CHECK(o.assignments.count(Slot::dress) == 0);
        }
        if (o.assignments.count(Slot::dress)) {
            CHECK(o.assignments.count(Slot::top) == 0);
            CHECK(o.assignments.count(Slot::bottom) == 0);
        }
    }
}

TEST_CASE("sample_outfit is deterministic per seed") {
    const Catalog cat = load_catalog(assets_dir() + "/catalog.tsv");
    const TexturePool pool = pool_with_one_web_image();
    Rng a(1234), b(1234);
    const Outfit oa = sample_outfit(a, Gender::female, cat, pool, TextureSource::random, {}, 64);
    const Outfit ob = sample_outfit(b, Gender::female, cat, pool, TextureSource::random, {}, 64);
    REQUIRE(oa.assignments.size() == ob.assignments.size());
    for (const auto& [slot, m] : oa.assignments) {
        REQUIRE(ob.assignments.count(slot) == 1);
        CHECK(m.id == ob.assignments.at(slot).id);
    }
}

TEST_CASE("accessory frequency tracks its configured probability") {
    const Catalog cat = load_catalog(assets_dir() + "/catalog.tsv");
    const TexturePool pool = pool_with_one_web_image();
    const int n = 10'000;
    int hats = 0;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_stream_seed(7, std::uint64_t(i)));
        const Outfit o =
            sample_outfit(rng, Gender::male, cat, pool, TextureSource::original, {}, 64);
        hats += o.assignments.count(Slot::hat);
    }
    const double freq = double(hats) / n;
    CHECK(freq > 0.18); // binomial(10000, 0.2): +-0.02 is ~5 sigma
    CHECK(freq < 0.22);
}

TEST_CASE("sampling with web source requires a non-empty pool") {
    const Catalog cat = load_catalog(assets_dir() + "/catalog.tsv");
    TexturePool empty;
    Rng rng(1);
    CHECK_THROWS_AS(
        sample_outfit(rng, Gender::male, cat, empty, TextureSource::web_image, {}, 64),
        ConfigError);
}
