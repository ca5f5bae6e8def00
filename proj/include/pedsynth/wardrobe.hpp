#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pedsynth/errors.hpp"
#include "pedsynth/rng.hpp"
#include "pedsynth/texgen.hpp"

namespace pedsynth {

enum class Gender { male, female };

inline const char* to_string(Gender g) { return g == Gender::male ? "male" : "female"; }

enum class ClothingCategory { female, male, universal };

enum class Slot { top, bottom, dress, shoes, hair, beard, hat, backpack, necklace, bow };

// Body region a clothing model paints in the primitive renderer.
enum class BodyRegion { torso, legs, head, feet, back, neck };

inline const char* to_string(Slot s) {
    switch (s) {
        case Slot::top: return "top";
        case Slot::bottom: return "bottom";
        case Slot::dress: return "dress";
        case Slot::shoes: return "shoes";
        case Slot::hair: return "hair";
        case Slot::beard: return "beard";
        case Slot::hat: return "hat";
        case Slot::backpack: return "backpack";
        case Slot::necklace: return "necklace";
        case Slot::bow: return "bow";
    }
    return "?";
}

inline const char* to_string(ClothingCategory c) {
    switch (c) {
        case ClothingCategory::female: return "female";
        case ClothingCategory::male: return "male";
        default: return "universal";
    }
}

inline const char* to_string(BodyRegion r) {
    switch (r) {
        case BodyRegion::torso: return "torso";
        case BodyRegion::legs: return "legs";
        case BodyRegion::head: return "head";
        case BodyRegion::feet: return "feet";
        case BodyRegion::back: return "back";
        default: return "neck";
    }
}

namespace detail {

template <typename Enum>
std::optional<Enum> enum_from(const std::string& s);

template <>
inline std::optional<Slot> enum_from<Slot>(const std::string& s) {
    for (int i = 0; i <= int(Slot::bow); ++i)
        if (s == to_string(Slot(i))) return Slot(i);
    return std::nullopt;
}

template <>
inline std::optional<ClothingCategory> enum_from<ClothingCategory>(const std::string& s) {
    for (int i = 0; i <= int(ClothingCategory::universal); ++i)
        if (s == to_string(ClothingCategory(i))) return ClothingCategory(i);
    return std::nullopt;
}

template <>
inline std::optional<BodyRegion> enum_from<BodyRegion>(const std::string& s) {
    for (int i = 0; i <= int(BodyRegion::neck); ++i)
        if (s == to_string(BodyRegion(i))) return BodyRegion(i);
    return std::nullopt;
}

} // namespace detail

struct ClothingModel {
    std::string id;
    ClothingCategory category = ClothingCategory::universal;
    Slot slot = Slot::top;
    BodyRegion region = BodyRegion::torso;
    std::string default_uv; // id of the model's stock texture
    UvTextureMap uv_map;    // current texture; stock unless retextured
    std::string uv_id;      // texture identifier for serialization
};

class Catalog {
public:
    void add(ClothingModel m) {
        if (index_.count(m.id))
            throw ValidationError("duplicate clothing model id: " + m.id);
        index_[m.id] = models_.size();
        models_.push_back(std::move(m));
    }

    const std::vector<ClothingModel>& models() const { return models_; }

    const ClothingModel* find(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &models_[it->second];
    }

    // Models usable for `gender` in `slot`, in catalog order.
    std::vector<const ClothingModel*> for_slot(Slot slot, Gender gender) const {
        std::vector<const ClothingModel*> out;
        for (const auto& m : models_) {
            if (m.slot != slot) continue;
            if (m.category == ClothingCategory::male && gender != Gender::male) continue;
            if (m.category == ClothingCategory::female && gender != Gender::female) continue;
            out.push_back(&m);
        }
        return out;
    }

private:
    std::vector<ClothingModel> models_;
    std::map<std::string, std::size_t> index_;
};

// Catalog file: one model per line, `id<TAB>category<TAB>slot<TAB>region<TAB>default_uv`.
// Blank lines and `#` comments allowed.
inline Catalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open catalog: " + path);
    Catalog cat;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) fields.push_back(field);
        auto fail = [&](const std::string& what) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + what);
        };
        if (fields.size() != 5) fail("expected 5 tab-separated fields");
        auto category = detail::enum_from<ClothingCategory>(fields[1]);
        if (!category) fail("unknown category '" + fields[1] + "'");
        auto slot = detail::enum_from<Slot>(fields[2]);
        if (!slot) fail("unknown slot '" + fields[2] + "'");
        auto region = detail::enum_from<BodyRegion>(fields[3]);
        if (!region) fail("unknown region '" + fields[3] + "'");
        if (*slot == Slot::beard && *category != ClothingCategory::male)
            fail("beard models must be male-category");
        ClothingModel m;
        m.id = fields[0];
        m.category = *category;
        m.slot = *slot;
        m.region = *region;
        m.default_uv = fields[4];
        m.uv_id = fields[4];
        m.uv_map.source = TextureSource::original;
        try {
            cat.add(std::move(m));
        } catch (const ValidationError& e) {
            fail(e.what());
        }
    }
    return cat;
}

// Copy with a replaced texture. Derived id is deterministic in (model, uv).
inline ClothingModel retexture(const ClothingModel& m, const UvTextureMap& uv,
                               const std::string& uv_id) {
    ClothingModel out = m;
    out.uv_map = uv;
    out.uv_id = uv_id;
    out.id = m.id + "@" + uv_id;
    return out;
}

struct Outfit {
    std::map<Slot, ClothingModel> assignments;

    bool complete() const {
        const bool body = assignments.count(Slot::dress) ||
                          (assignments.count(Slot::top) && assignments.count(Slot::bottom));
        return body && assignments.count(Slot::shoes);
    }
};

struct AccessoryProbabilities {
    double beard = 0.3;    // male only
    double hat = 0.2;
    double backpack = 0.2;
    double necklace = 0.3; // female only
    double bow = 0.2;      // female only
    double hair = 0.9;
    double dress = 0.3;    // chance a female wears a dress instead of top+bottom
};

// Textures available to dress a character: web-image imports and the random
// (palette, pattern) space. `original` keeps each model's stock texture.
class TexturePool {
public:
    void add_web_image(std::string uv_id, UvTextureMap uv) {
        web_ids_.push_back(std::move(uv_id));
        web_maps_.push_back(std::move(uv));
    }

    std::size_t web_count() const { return web_ids_.size(); }

    const std::string& web_id(std::size_t i) const { return web_ids_[i]; }
    const UvTextureMap& web_map(std::size_t i) const { return web_maps_[i]; }

private:
    std::vector<std::string> web_ids_;
    std::vector<UvTextureMap> web_maps_;
};

inline std::string random_uv_id(int palette_index, int pattern_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rnd_p%03d_t%02d", palette_index, pattern_id);
    return buf;
}

namespace detail {

inline ClothingModel pick_and_texture(Rng& rng, const std::vector<const ClothingModel*>& pool,
                                      TextureSource source, const TexturePool& textures,
                                      int uv_size) {
    const ClothingModel& base = *pool[rng.next_below(pool.size())];
    switch (source) {
        case TextureSource::original:
            return base;
        case TextureSource::web_image: {
            if (textures.web_count() == 0)
                throw ConfigError("texture pool has no web images but mix requires them");
            const std::size_t i = rng.next_below(textures.web_count());
            return retexture(base, textures.web_map(i), textures.web_id(i));
        }
        case TextureSource::random: {
            const int pi = int(rng.next_below(kPaletteSize));
            const int ti = int(rng.next_below(kPatternCount));
            // provenance only; the raster is recomposed on demand from the id
            UvTextureMap meta;
            meta.source = TextureSource::random;
            meta.palette_index = pi;
            meta.pattern_id = ti;
            (void)uv_size;
            return retexture(base, meta, random_uv_id(pi, ti));
        }
    }
    throw ConfigError("unreachable texture source");
}

} // namespace detail

// Fills mandatory slots (top+bottom or dress, shoes) and rolls accessories.
// Every clothing piece is textured according to `source`.
inline Outfit sample_outfit(Rng& rng, Gender gender, const Catalog& catalog,
                            const TexturePool& textures, TextureSource source,
                            const AccessoryProbabilities& probs = {},
                            int uv_size = kDefaultUvSize) {
    Outfit outfit;
    auto pool_of = [&](Slot s) { return catalog.for_slot(s, gender); };
    auto require = [&](Slot s) {
        auto pool = pool_of(s);
        if (pool.empty())
            throw ConfigError(std::string("catalog has no ") + to_string(s) +
                              " model for gender " + to_string(gender));
        outfit.assignments[s] = detail::pick_and_texture(rng, pool, source, textures, uv_size);
    };
    auto maybe = [&](Slot s, double p) {
        // Fixed draw order; the probability roll happens even when the pool
        // is empty so catalogs with missing accessories stay stream-stable.
        const bool roll = rng.bernoulli(p);
        auto pool = pool_of(s);
        if (roll && !pool.empty())
            outfit.assignments[s] = detail::pick_and_texture(rng, pool, source, textures, uv_size);
    };

    const bool wear_dress =
        gender == Gender::female && !pool_of(Slot::dress).empty() && rng.bernoulli(probs.dress);
    if (wear_dress) {
        require(Slot::dress);
    } else {
        require(Slot::top);
        require(Slot::bottom);
    }
    require(Slot::shoes);
    maybe(Slot::hair, probs.hair);
    if (gender == Gender::male) maybe(Slot::beard, probs.beard);
    maybe(Slot::hat, probs.hat);
    maybe(Slot::backpack, probs.backpack);
    if (gender == Gender::female) {
        maybe(Slot::necklace, probs.necklace);
        maybe(Slot::bow, probs.bow);
    }
    return outfit;
}

} // namespace pedsynth
