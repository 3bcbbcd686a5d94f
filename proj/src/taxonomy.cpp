#include "fvqa/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace fvqa {

using nlohmann::json;

const char* to_string(SuperCategory s) {
    switch (s) {
    case SuperCategory::apparel_top: return "apparel top";
    case SuperCategory::apparel_bottom: return "apparel bottom";
    case SuperCategory::one_piece: return "one-piece clothing";
    case SuperCategory::shoes: return "shoes";
    case SuperCategory::accessories: return "accessories";
    }
    return "?";
}

std::optional<SuperCategory> super_from_string(std::string_view s) {
    if (s == "apparel top") return SuperCategory::apparel_top;
    if (s == "apparel bottom") return SuperCategory::apparel_bottom;
    if (s == "one-piece clothing") return SuperCategory::one_piece;
    if (s == "shoes") return SuperCategory::shoes;
    if (s == "accessories") return SuperCategory::accessories;
    return std::nullopt;
}

const std::vector<std::string>& known_location_phrases() {
    static const std::vector<std::string> phrases = {
        "on the top", "on the bottom", "on the feet", "over the neck", "on the head"};
    return phrases;
}

std::string canonicalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

namespace {

void diag(Diagnostics& diags, Diagnostic::Level level, std::string code, std::string message) {
    diags.push_back({level, std::move(code), std::move(message)});
}

std::set<std::string> canon_set(const json& arr) {
    std::set<std::string> out;
    for (const auto& v : arr) out.insert(canonicalize(v.get<std::string>()));
    return out;
}

// The five general attributes must apply to every super-category.
const std::set<std::string>& general_attribute_names() {
    static const std::set<std::string> names = {"color", "pattern", "fit type", "closure type",
                                                "material", "material/fabric"};
    return names;
}

} // namespace

Taxonomy Taxonomy::load_file(const std::string& path, Diagnostics& diags) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open taxonomy file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load(buf.str(), diags);
}

Taxonomy Taxonomy::load(const std::string& json_text, Diagnostics& diags) {
    Taxonomy tax;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InputError(std::string("taxonomy is not valid JSON: ") + e.what());
    }

    tax.schema_version_ = doc.value("schema_version", 0);
    if (tax.schema_version_ != 1)
        diag(diags, Diagnostic::Level::error, "taxonomy.schema_version",
             "unsupported schema_version " + std::to_string(tax.schema_version_));

    std::map<std::string, std::string> location_by_key; // super or category name -> phrase
    if (doc.contains("locations")) {
        for (auto it = doc["locations"].begin(); it != doc["locations"].end(); ++it) {
            std::string phrase = canonicalize(it.value().get<std::string>());
            const auto& known = known_location_phrases();
            if (std::find(known.begin(), known.end(), phrase) == known.end())
                diag(diags, Diagnostic::Level::error, "taxonomy.unknown_location",
                     "location phrase '" + phrase + "' is not one of the five known phrases");
            location_by_key[canonicalize(it.key())] = phrase;
        }
    }

    for (const auto& p : doc.value("parts", json::array()))
        tax.parts_.push_back(canonicalize(p.get<std::string>()));

    for (const auto& c : doc.value("categories", json::array())) {
        Category cat;
        cat.name = canonicalize(c.at("name").get<std::string>());
        auto super = super_from_string(canonicalize(c.at("super").get<std::string>()));
        if (!super) {
            diag(diags, Diagnostic::Level::error, "taxonomy.unknown_super",
                 "category '" + cat.name + "' names unknown super-category '" +
                     c.at("super").get<std::string>() + "'");
            continue;
        }
        cat.super = *super;
        if (c.contains("parent")) cat.parent = canonicalize(c["parent"].get<std::string>());
        cat.singular_form = canonicalize(c.value("singular", cat.name));
        cat.plural_form = canonicalize(c.value("plural", cat.name + "s"));
        cat.is_paired = c.value("paired", false);
        cat.invariant_number = c.value("invariant_number", false);
        if (cat.singular_form == cat.plural_form && !cat.invariant_number)
            diag(diags, Diagnostic::Level::error, "taxonomy.number_forms",
                 "category '" + cat.name +
                     "' has identical singular and plural forms but is not marked "
                     "invariant_number");

        std::string loc_key;
        if (c.contains("location"))
            loc_key = canonicalize(c["location"].get<std::string>());
        else if (auto it = location_by_key.find(cat.name); it != location_by_key.end())
            loc_key = it->second;
        else if (auto it2 = location_by_key.find(to_string(cat.super)); it2 != location_by_key.end())
            loc_key = it2->second;
        if (!loc_key.empty()) cat.default_location = LocationPhrase{loc_key};

        if (tax.categories_.count(cat.name))
            diag(diags, Diagnostic::Level::error, "taxonomy.duplicate_category",
                 "category '" + cat.name + "' registered twice");
        tax.categories_[cat.name] = cat;
    }

    // parent links are resolved after all categories exist
    for (auto& [name, cat] : tax.categories_) {
        if (!cat.parent) continue;
        auto it = tax.categories_.find(*cat.parent);
        if (it == tax.categories_.end()) {
            diag(diags, Diagnostic::Level::error, "taxonomy.dangling_parent",
                 "category '" + name + "' names missing parent '" + *cat.parent + "'");
            continue;
        }
        if (it->second.super != cat.super)
            diag(diags, Diagnostic::Level::error, "taxonomy.parent_super_mismatch",
                 "category '" + name + "' and parent '" + *cat.parent +
                     "' belong to different super-categories");
        tax.category_children_[*cat.parent].insert(name);
    }

    for (const auto& a : doc.value("attributes", json::array())) {
        Attribute attr;
        attr.name = canonicalize(a.at("name").get<std::string>());
        attr.generic_wh = a.value("generic_wh", true);
        attr.in_binary = a.value("in_binary", true);
        for (const auto& s : a.at("supers")) {
            auto super = super_from_string(canonicalize(s.get<std::string>()));
            if (!super)
                diag(diags, Diagnostic::Level::error, "taxonomy.unknown_super",
                     "attribute '" + attr.name + "' names unknown super-category");
            else
                attr.applicable_supers.insert(*super);
        }
        if (general_attribute_names().count(attr.name) && attr.applicable_supers.size() != 5)
            diag(diags, Diagnostic::Level::error, "taxonomy.general_attribute_supers",
                 "general attribute '" + attr.name + "' must apply to all five super-categories");

        std::set<std::string> seen;
        for (const auto& v : a.value("values", json::array())) {
            AttributeValue val;
            val.name = canonicalize(v.at("name").get<std::string>());
            val.attribute = attr.name;
            if (!seen.insert(val.name).second) {
                diag(diags, Diagnostic::Level::error, "taxonomy.duplicate_value",
                     "value '" + val.name + "' registered twice under '" + attr.name + "'");
                continue;
            }
            if (v.contains("alternatives")) val.alternatives = canon_set(v["alternatives"]);
            if (v.contains("parents")) val.parents = canon_set(v["parents"]);
            if (v.contains("exclusions")) val.exclusions = canon_set(v["exclusions"]);
            if (val.alternatives.count(val.name) || val.parents.count(val.name) ||
                val.exclusions.count(val.name))
                diag(diags, Diagnostic::Level::error, "taxonomy.self_relation",
                     "value '" + val.name + "' relates to itself");
            attr.value_names.push_back(val.name);
            tax.values_[{attr.name, val.name}] = std::move(val);
        }
        if (attr.value_names.empty())
            diag(diags, Diagnostic::Level::error, "taxonomy.empty_attribute",
                 "attribute '" + attr.name + "' registers no values");
        if (tax.attributes_.count(attr.name))
            diag(diags, Diagnostic::Level::error, "taxonomy.duplicate_attribute",
                 "attribute '" + attr.name + "' registered twice");
        tax.attributes_[attr.name] = std::move(attr);
    }

    // Relation checks + alternative symmetrization. Asymmetric declarations
    // are reported, then repaired so the loaded relation is symmetric.
    for (auto& [key, val] : tax.values_) {
        const auto& [attr_name, _] = key;
        auto check_ref = [&](const std::set<std::string>& rel, const char* kind) {
            for (const auto& other : rel)
                if (!tax.values_.count({attr_name, other}))
                    diag(diags, Diagnostic::Level::error, "taxonomy.dangling_relation",
                         std::string("value '") + val.name + "' lists unknown " + kind + " '" +
                             other + "' under attribute '" + attr_name + "'");
        };
        check_ref(val.alternatives, "alternative");
        check_ref(val.parents, "parent");
        check_ref(val.exclusions, "exclusion");

        for (const auto& x : val.exclusions)
            if (val.alternatives.count(x) || val.parents.count(x))
                diag(diags, Diagnostic::Level::error, "taxonomy.exclusion_overlap",
                     "value '" + val.name + "' lists '" + x + "' as both exclusion and synonym");
    }
    for (auto& [key, val] : tax.values_) {
        for (const auto& other : val.alternatives) {
            auto it = tax.values_.find({key.first, other});
            if (it == tax.values_.end()) continue;
            if (!it->second.alternatives.count(val.name)) {
                diag(diags, Diagnostic::Level::error, "taxonomy.asymmetric_alternatives",
                     "alternatives pair ('" + val.name + "', '" + other + "') under '" +
                         key.first + "' is declared in one direction only");
                it->second.alternatives.insert(val.name);
            }
        }
        for (const auto& parent : val.parents)
            if (tax.values_.count({key.first, parent}))
                tax.children_[{key.first, parent}].insert(val.name);
    }

    // parents must be acyclic, per attribute
    for (const auto& [attr_name, attr] : tax.attributes_) {
        std::map<std::string, int> state; // 0 unseen, 1 in progress, 2 done
        std::function<bool(const std::string&)> visit = [&](const std::string& v) -> bool {
            int& s = state[v];
            if (s == 1) return false;
            if (s == 2) return true;
            s = 1;
            auto it = tax.values_.find({attr_name, v});
            if (it != tax.values_.end())
                for (const auto& p : it->second.parents)
                    if (!visit(p)) return false;
            s = 2;
            return true;
        };
        for (const auto& v : attr.value_names)
            if (!visit(v)) {
                diag(diags, Diagnostic::Level::error, "taxonomy.parent_cycle",
                     "hierarchy cycle through value '" + v + "' of attribute '" + attr_name + "'");
                break;
            }
    }

    return tax;
}

const Category* Taxonomy::find_category(std::string_view name) const {
    auto it = categories_.find(std::string(name));
    return it == categories_.end() ? nullptr : &it->second;
}

const Category& Taxonomy::category(std::string_view name) const {
    if (const Category* c = find_category(name)) return *c;
    throw RegistryMissError("unknown category: " + std::string(name));
}

const Attribute* Taxonomy::find_attribute(std::string_view name) const {
    auto it = attributes_.find(std::string(name));
    return it == attributes_.end() ? nullptr : &it->second;
}

const Attribute& Taxonomy::attribute(std::string_view name) const {
    if (const Attribute* a = find_attribute(name)) return *a;
    throw RegistryMissError("unknown attribute: " + std::string(name));
}

const AttributeValue* Taxonomy::find_value(std::string_view attribute,
                                           std::string_view value) const {
    auto it = values_.find({std::string(attribute), std::string(value)});
    return it == values_.end() ? nullptr : &it->second;
}

const AttributeValue& Taxonomy::value(std::string_view attribute, std::string_view value) const {
    if (const AttributeValue* v = find_value(attribute, value)) return *v;
    throw RegistryMissError("unknown value '" + std::string(value) + "' under attribute '" +
                            std::string(attribute) + "'");
}

std::vector<std::string> Taxonomy::attributes_for(const Category& cat) const {
    std::vector<std::string> out;
    for (const auto& [name, attr] : attributes_)
        if (attr.applicable_supers.count(cat.super)) out.push_back(name);
    return out;
}

std::vector<std::string> Taxonomy::attributes_of_value(std::string_view value) const {
    std::vector<std::string> out;
    for (const auto& [name, attr] : attributes_)
        if (values_.count({name, std::string(value)})) out.push_back(name);
    return out;
}

std::set<std::string> Taxonomy::synonyms_of(std::string_view attribute,
                                            std::string_view value) const {
    const AttributeValue& start = this->value(attribute, value);
    // Reachability over alternative edges (both directions after
    // symmetrization) and downward hierarchy edges. Closing the walk keeps
    // P-set merging idempotent even for chained relations.
    std::set<std::string> visited{start.name};
    std::deque<std::string> queue{start.name};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        const AttributeValue* v = find_value(attribute, cur);
        if (!v) continue;
        auto push = [&](const std::string& next) {
            if (visited.insert(next).second) queue.push_back(next);
        };
        for (const auto& alt : v->alternatives) push(alt);
        auto ch = children_.find({std::string(attribute), cur});
        if (ch != children_.end())
            for (const auto& child : ch->second) push(child);
    }
    visited.erase(start.name);
    return visited;
}

std::set<std::string> Taxonomy::category_descendants(std::string_view category) const {
    this->category(category); // registry check
    std::set<std::string> visited;
    std::deque<std::string> queue{std::string(category)};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        auto it = category_children_.find(cur);
        if (it == category_children_.end()) continue;
        for (const auto& child : it->second)
            if (visited.insert(child).second) queue.push_back(child);
    }
    visited.erase(std::string(category));
    return visited;
}

std::optional<LocationPhrase> Taxonomy::location_for(const Category& cat, bool has_person) const {
    if (!has_person) return std::nullopt;
    if (cat.super == SuperCategory::one_piece) return std::nullopt;
    return cat.default_location;
}

AgreementBundle agreement_forms(const Category& category, int piece_count,
                                std::string_view next_word) {
    if (piece_count < 1)
        throw Error("invalid item: piece_count " + std::to_string(piece_count) + " < 1");
    AgreementBundle b;
    b.plural = piece_count > 1;
    b.copula = b.plural ? "are" : "is";
    b.demonstrative = b.plural ? "these" : "this";
    b.noun = b.plural ? category.plural_form : category.singular_form;
    if (category.is_paired) b.pair_phrase = b.plural ? "pairs of" : "pair of";

    if (b.plural) {
        b.article = "";
    } else {
        std::string word(next_word);
        if (word.empty()) word = !b.pair_phrase.empty() ? b.pair_phrase : b.noun;
        char first = word.empty() ? '\0' : static_cast<char>(std::tolower(word[0]));
        b.article = (first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u')
                        ? "an"
                        : "a";
    }
    return b;
}

AgreementBundle flipped(const AgreementBundle& bundle, const Category* category) {
    AgreementBundle b = bundle;
    b.plural = !bundle.plural;
    b.copula = b.plural ? "are" : "is";
    b.demonstrative = b.plural ? "these" : "this";
    if (category) b.noun = b.plural ? category->plural_form : category->singular_form;
    if (!bundle.pair_phrase.empty()) b.pair_phrase = b.plural ? "pairs of" : "pair of";
    if (b.plural) b.article = "";
    // singular article re-resolves against the next word at render time
    return b;
}

} // namespace fvqa
