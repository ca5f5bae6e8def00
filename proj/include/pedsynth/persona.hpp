#pragma once

#include <cinttypes>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "pedsynth/rng.hpp"
#include "pedsynth/wardrobe.hpp"

namespace pedsynth {

inline constexpr double kMaleHeightMean = 170.0;
inline constexpr double kMaleHeightStd = 5.7;
inline constexpr double kFemaleHeightMean = 160.0;
inline constexpr double kFemaleHeightStd = 5.2;
inline constexpr double kAgeMin = 20.0;
inline constexpr double kAgeMax = 90.0;

struct Character {
    int id = 0;
    std::uint64_t seed = 0;
    Gender gender = Gender::male;
    double age = 0;         // years
    double height_cm = 0;
    double weight_norm = 0; // [0,1] body-mass parameter
    int skin = 0;           // index into the configured skin-tone set
    TextureSource texture_source = TextureSource::random;
    Outfit outfit;
};

// Serialization-relevant equality; texture rasters are reproducible from the
// uv ids and are not compared.
inline bool same_identity(const Character& a, const Character& b) {
    if (a.id != b.id || a.seed != b.seed || a.gender != b.gender ||
        a.age != b.age || a.height_cm != b.height_cm ||
        a.weight_norm != b.weight_norm || a.skin != b.skin)
        return false;
    if (a.outfit.assignments.size() != b.outfit.assignments.size()) return false;
    for (const auto& [slot, m] : a.outfit.assignments) {
        auto it = b.outfit.assignments.find(slot);
        if (it == b.outfit.assignments.end()) return false;
        if (m.id != it->second.id || m.uv_id != it->second.uv_id) return false;
    }
    return true;
}

struct PopulationSpec {
    int n_total = 0;
    int mix_original = 0;
    int mix_web = 0;
    int mix_random = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> skin_tones = {"type1", "type2", "type3", "type4",
                                           "type5", "type6", "type7", "type8"};
    AccessoryProbabilities accessories;
    int uv_size = kDefaultUvSize;

    void validate() const {
        if (n_total < 0 || mix_original < 0 || mix_web < 0 || mix_random < 0)
            throw ConfigError("population counts must be non-negative");
        if (mix_original + mix_web + mix_random != n_total)
            throw ConfigError("population mix does not sum to n_total");
        if (skin_tones.empty()) throw ConfigError("skin tone set is empty");
    }
};

// Texture source for a character index: a deterministic block assignment,
// originals first, then web images, then random maps.
inline TextureSource texture_source_for(const PopulationSpec& spec, int index) {
    if (index < spec.mix_original) return TextureSource::original;
    if (index < spec.mix_original + spec.mix_web) return TextureSource::web_image;
    return TextureSource::random;
}

inline Character sample_character(Rng& rng, const PopulationSpec& spec, int index,
                                  const Catalog& catalog, const TexturePool& textures,
                                  TextureSource source) {
    Character c;
    c.id = index;
    c.gender = rng.bernoulli(0.5) ? Gender::female : Gender::male;
    c.skin = int(rng.next_below(spec.skin_tones.size()));
    c.age = rng.uniform(kAgeMin, kAgeMax);
    c.weight_norm = rng.next_double();
    c.height_cm = c.gender == Gender::male
                      ? rng.gaussian(kMaleHeightMean, kMaleHeightStd)
                      : rng.gaussian(kFemaleHeightMean, kFemaleHeightStd);
    c.texture_source = source;
    c.outfit = sample_outfit(rng, c.gender, catalog, textures, source,
                             spec.accessories, spec.uv_size);
    return c;
}

inline std::vector<Character> generate_population(const PopulationSpec& spec,
                                                  const Catalog& catalog,
                                                  const TexturePool& textures) {
    spec.validate();
    if (spec.mix_web > 0 && textures.web_count() == 0)
        throw ConfigError("population mix requires web images but texture pool has none");
    std::vector<Character> population;
    population.reserve(spec.n_total);
    for (int i = 0; i < spec.n_total; ++i) {
        const std::uint64_t stream = derive_stream_seed(spec.seed, std::uint64_t(i));
        Rng rng(stream);
        Character c = sample_character(rng, spec, i, catalog, textures,
                                       texture_source_for(spec, i));
        c.seed = stream;
        population.push_back(std::move(c));
    }
    return population;
}

// --- character file format -------------------------------------------------
//
// UTF-8 text, one `key value...` pair per line:
//   version 1
//   id / seed / gender / age / height_cm / weight / skin
//   wear <slot> <model_id> <uv_id>   (repeated)

inline std::string emit_character_file(const Character& c) {
    std::ostringstream out;
    char buf[64];
    out << "version 1\n";
    out << "id " << c.id << "\n";
    out << "seed " << c.seed << "\n";
    out << "gender " << to_string(c.gender) << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", c.age);
    out << "age " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", c.height_cm);
    out << "height_cm " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", c.weight_norm);
    out << "weight " << buf << "\n";
    out << "skin " << c.skin << "\n";
    out << "source " << to_string(c.texture_source) << "\n";
    for (const auto& [slot, m] : c.outfit.assignments)
        out << "wear " << to_string(slot) << " " << m.id << " " << m.uv_id << "\n";
    return out.str();
}

inline Character parse_character_file(const std::string& text) {
    Character c;
    bool saw_version = false, saw_id = false, saw_seed = false, saw_gender = false,
         saw_age = false, saw_height = false, saw_weight = false, saw_skin = false,
         saw_source = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("character file line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "version") {
            int v;
            if (!(ls >> v) || v != 1) fail("unsupported version");
            saw_version = true;
        } else if (key == "id") {
            if (!(ls >> c.id) || c.id < 0) fail("bad value for key id");
            saw_id = true;
        } else if (key == "seed") {
            if (!(ls >> c.seed)) fail("bad value for key seed");
            saw_seed = true;
        } else if (key == "gender") {
            std::string g;
            ls >> g;
            if (g == "male") c.gender = Gender::male;
            else if (g == "female") c.gender = Gender::female;
            else fail("bad value for key gender");
            saw_gender = true;
        } else if (key == "age") {
            if (!(ls >> c.age)) fail("bad value for key age");
            if (c.age < kAgeMin || c.age > kAgeMax)
                fail("key age out of range [20,90]");
            saw_age = true;
        } else if (key == "height_cm") {
            if (!(ls >> c.height_cm) || c.height_cm <= 0) fail("bad value for key height_cm");
            saw_height = true;
        } else if (key == "weight") {
            if (!(ls >> c.weight_norm)) fail("bad value for key weight");
            if (c.weight_norm < 0 || c.weight_norm > 1) fail("key weight out of range [0,1]");
            saw_weight = true;
        } else if (key == "skin") {
            if (!(ls >> c.skin) || c.skin < 0) fail("bad value for key skin");
            saw_skin = true;
        } else if (key == "source") {
            std::string s;
            ls >> s;
            if (s == "original") c.texture_source = TextureSource::original;
            else if (s == "web_image") c.texture_source = TextureSource::web_image;
            else if (s == "random") c.texture_source = TextureSource::random;
            else fail("bad value for key source");
            saw_source = true;
        } else if (key == "wear") {
            std::string slot_s, model_id, uv_id;
            if (!(ls >> slot_s >> model_id >> uv_id)) fail("malformed wear line");
            auto slot = detail::enum_from<Slot>(slot_s);
            if (!slot) fail("unknown slot '" + slot_s + "'");
            if (c.outfit.assignments.count(*slot)) fail("duplicate wear slot '" + slot_s + "'");
            ClothingModel m;
            m.id = model_id;
            m.uv_id = uv_id;
            c.outfit.assignments[*slot] = std::move(m);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    lineno = 0;
    if (!saw_version) fail("missing mandatory key version");
    if (!saw_id) fail("missing mandatory key id");
    if (!saw_seed) fail("missing mandatory key seed");
    if (!saw_gender) fail("missing mandatory key gender");
    if (!saw_age) fail("missing mandatory key age");
    if (!saw_height) fail("missing mandatory key height_cm");
    if (!saw_weight) fail("missing mandatory key weight");
    if (!saw_skin) fail("missing mandatory key skin");
    if (!saw_source) fail("missing mandatory key source");
    return c;
}

} // namespace pedsynth
