#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fvqa/dataset.hpp"
#include "fvqa/ingest.hpp"
#include "fvqa/rng.hpp"
#include "fvqa/taxonomy.hpp"
#include "fvqa/template_engine.hpp"

namespace fvqa::test {

inline std::string data_dir() { return FVQA_DATA_DIR; }

inline std::string work_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::path(FVQA_TEST_WORK_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline Taxonomy default_taxonomy() {
    Diagnostics diags;
    Taxonomy tax = Taxonomy::load_file(data_dir() + "/taxonomy.json", diags);
    if (has_errors(diags)) throw std::runtime_error("default taxonomy has errors");
    return tax;
}

inline TemplateLibrary default_templates() {
    Diagnostics diags;
    TemplateLibrary lib = TemplateLibrary::load_file(data_dir() + "/templates.json", diags);
    if (has_errors(diags)) throw std::runtime_error("default template library has errors");
    return lib;
}

inline NormalizationRules default_rules(const Taxonomy& tax) {
    Diagnostics diags;
    NormalizationRules rules =
        NormalizationRules::load_file(data_dir() + "/rules.json", tax, diags);
    if (has_errors(diags)) throw std::runtime_error("default rules have errors");
    return rules;
}

/// Small registry used by fixture tests: a color hierarchy, an alternatives
/// clique and two categories.
inline std::string toy_taxonomy_json() {
    return R"({
      "schema_version": 1,
      "locations": {"apparel top": "on the top"},
      "categories": [
        {"name": "shirt", "super": "apparel top", "singular": "shirt", "plural": "shirts"},
        {"name": "dress", "super": "one-piece clothing", "singular": "dress", "plural": "dresses"},
        {"name": "pants", "super": "apparel bottom", "singular": "pants", "plural": "pants",
         "paired": true, "invariant_number": true}
      ],
      "attributes": [
        {"name": "color",
         "supers": ["apparel top", "apparel bottom", "one-piece clothing", "shoes", "accessories"],
         "values": [
           {"name": "red"}, {"name": "white"},
           {"name": "blue"},
           {"name": "light blue", "parents": ["blue"]},
           {"name": "sky blue", "parents": ["blue"]}
         ]},
        {"name": "pattern",
         "supers": ["apparel top", "apparel bottom", "one-piece clothing", "shoes", "accessories"],
         "values": [{"name": "solid"}, {"name": "striped"}]},
        {"name": "style",
         "supers": ["apparel bottom"],
         "values": [
           {"name": "sweatpants", "alternatives": ["jogger pants", "lounge pants"]},
           {"name": "jogger pants", "alternatives": ["sweatpants", "lounge pants"]},
           {"name": "lounge pants", "alternatives": ["sweatpants", "jogger pants"]}
         ]}
      ]
    })";
}

inline Taxonomy toy_taxonomy() {
    Diagnostics diags;
    Taxonomy tax = Taxonomy::load(toy_taxonomy_json(), diags);
    if (has_errors(diags)) throw std::runtime_error("toy taxonomy has errors");
    return tax;
}

inline FashionItem make_item(std::string image_id, std::string category,
                             std::map<std::string, std::set<std::string>> values,
                             bool has_person = false, int piece_count = 1) {
    FashionItem item;
    item.image_id = std::move(image_id);
    item.category = std::move(category);
    item.values = std::move(values);
    item.has_person = has_person;
    item.piece_count = piece_count;
    return item;
}

/// The four-item catalog every index fixture derives from:
/// A: red shirt, B: blue shirt, C: red dress, D: blue dress.
inline std::vector<FashionItem> toy_catalog() {
    return {
        make_item("A", "shirt", {{"color", {"red"}}}),
        make_item("B", "shirt", {{"color", {"blue"}}}),
        make_item("C", "dress", {{"color", {"red"}}}),
        make_item("D", "dress", {{"color", {"blue"}}}),
    };
}

/// Deterministic synthetic catalog over the shipped taxonomy, one JSONL
/// record per item.
inline std::string synthetic_catalog_jsonl(const Taxonomy& tax, size_t n, uint64_t seed) {
    std::vector<const Category*> categories;
    for (const auto& [_, cat] : tax.categories()) categories.push_back(&cat);

    std::string out;
    for (size_t i = 0; i < n; ++i) {
        SplitMix64 rng = rng_for(seed, "synthetic|" + std::to_string(i));
        const Category& cat = *categories[rng.bounded(categories.size())];
        std::string attrs;
        for (const auto& attr_name : tax.attributes_for(cat)) {
            if (rng.uniform() >= 0.75) continue;
            const Attribute& attr = tax.attribute(attr_name);
            const auto& values = attr.value_names;
            std::string v1 = values[rng.bounded(values.size())];
            std::string entry = "\"" + v1 + "\"";
            if (rng.uniform() < 0.08) {
                std::string v2 = values[rng.bounded(values.size())];
                if (v2 != v1) entry += ", \"" + v2 + "\"";
            }
            if (!attrs.empty()) attrs += ", ";
            attrs += "\"" + attr_name + "\": [" + entry + "]";
        }
        char line[256];
        std::snprintf(line, sizeof(line),
                      "{\"item_id\": \"i%05zu\", \"image_id\": \"img%05zu\", \"category\": \"%s\", "
                      "\"piece_count\": %d, \"has_person\": %s, \"attributes\": {",
                      i, i, cat.name.c_str(), rng.uniform() < 0.1 ? 2 : 1,
                      cat.super == SuperCategory::accessories ? "false" : "true");
        out += line;
        out += attrs;
        out += "}}\n";
    }
    return out;
}

} // namespace fvqa::test
