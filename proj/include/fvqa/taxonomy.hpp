#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fvqa/errors.hpp"

namespace fvqa {

/// The five top-level item classes. Every category belongs to exactly one.
enum class SuperCategory { apparel_top, apparel_bottom, one_piece, shoes, accessories };

const char* to_string(SuperCategory s);
std::optional<SuperCategory> super_from_string(std::string_view s);

/// Relative-location disambiguator for images that show a person wearing
/// several items ("on the top", "on the feet", ...).
struct LocationPhrase {
    std::string text;
    bool operator==(const LocationPhrase&) const = default;
};

/// The five admissible location phrases, in registry order.
const std::vector<std::string>& known_location_phrases();

struct Category {
    std::string name;
    SuperCategory super = SuperCategory::apparel_top;
    std::optional<std::string> parent; // sub-category -> primary category
    std::string singular_form;
    std::string plural_form;
    bool is_paired = false;         // pant legs, eyeglasses, boots, ...
    bool invariant_number = false;  // singular and plural surface forms coincide
    std::optional<LocationPhrase> default_location;
};

struct Attribute {
    std::string name;
    std::set<SuperCategory> applicable_supers;
    std::vector<std::string> value_names; // registry order, duplicate-free
    bool generic_wh = true;  // eligible for generic "what <attribute> is ..." templates
    bool in_binary = true;   // values may appear inside binary question text
};

struct AttributeValue {
    std::string name;
    std::string attribute;
    std::set<std::string> alternatives; // interchangeable names, same attribute
    std::set<std::string> parents;      // hierarchical ancestors, same attribute
    std::set<std::string> exclusions;   // incompatible names, same attribute
};

/// Grammatical agreement material for one item, applied verbatim at render
/// time. noun is the realized category surface form.
struct AgreementBundle {
    std::string copula;        // "is" | "are"
    std::string demonstrative; // "this" | "these"
    std::string pair_phrase;   // "" | "pair of" | "pairs of"
    std::string noun;          // singular_form or plural_form of the category
    std::string article;       // "a" | "an" | ""
    bool plural = false;
};

/// Immutable category/attribute ontology. Loaded once from a registry file;
/// safe for unrestricted concurrent reads afterwards.
class Taxonomy {
public:
    /// Parses a registry document. Structural problems are reported through
    /// `diags`; the returned object reflects the document with alternatives
    /// symmetrized. Callers that need a trusted taxonomy must check
    /// has_errors(diags) first.
    static Taxonomy load(const std::string& json_text, Diagnostics& diags);
    static Taxonomy load_file(const std::string& path, Diagnostics& diags);

    const Category* find_category(std::string_view name) const;
    const Category& category(std::string_view name) const; // throws RegistryMissError
    const Attribute* find_attribute(std::string_view name) const;
    const Attribute& attribute(std::string_view name) const;
    const AttributeValue* find_value(std::string_view attribute, std::string_view value) const;
    const AttributeValue& value(std::string_view attribute, std::string_view value) const;

    const std::map<std::string, Category>& categories() const { return categories_; }
    const std::map<std::string, Attribute>& attributes() const { return attributes_; }
    const std::vector<std::string>& parts() const { return parts_; }

    /// Attributes whose applicable supers include the category's super.
    std::vector<std::string> attributes_for(const Category& cat) const;

    /// Attribute names that register `value`, in name order.
    std::vector<std::string> attributes_of_value(std::string_view value) const;

    /// Synonym set of a value: its alternatives and hierarchy descendants,
    /// closed transitively so that synonym merging is idempotent. Never
    /// contains the value itself; restricted to the same attribute.
    std::set<std::string> synonyms_of(std::string_view attribute, std::string_view value) const;

    /// Category names whose parent chain reaches `category` (positives of
    /// sub-categories flow up to it), closed transitively.
    std::set<std::string> category_descendants(std::string_view category) const;

    /// Location phrase used to point at this category in a multi-item image.
    /// Absent when there is no person or the item is one-piece clothing.
    std::optional<LocationPhrase> location_for(const Category& cat, bool has_person) const;

    int schema_version() const { return schema_version_; }

private:
    int schema_version_ = 0;
    std::map<std::string, Category> categories_;
    std::map<std::string, Attribute> attributes_;
    // keyed by (attribute, value)
    std::map<std::pair<std::string, std::string>, AttributeValue> values_;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> children_;
    std::map<std::string, std::set<std::string>> category_children_;
    std::vector<std::string> parts_;
};

/// Assembles the agreement bundle for an item of `category` shown
/// `piece_count` times. `next_word` is the surface word that will follow the
/// article; the article is "an" exactly when it starts with a vowel letter.
/// When `next_word` is empty the word is inferred from the bundle itself
/// (pair phrase first, noun otherwise). Throws Error for piece_count < 1.
AgreementBundle agreement_forms(const Category& category, int piece_count,
                                std::string_view next_word = {});

/// Swaps is/are, this/these and singular/plural. Used for agreement noise.
/// The category supplies the opposite noun form; pass null for
/// category-free questions.
AgreementBundle flipped(const AgreementBundle& bundle, const Category* category);

/// Lowercases ASCII and trims/collapses whitespace; canonical form for all
/// registry names and raw catalog strings.
std::string canonicalize(std::string_view raw);

} // namespace fvqa
