#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fvqa/taxonomy.hpp"

namespace fvqa {

enum class AnswerType { binary, non_binary };
const char* to_string(AnswerType t);

/// Slot inventory of the pattern language. Patterns are literal text plus
/// {SLOT} placeholders; square brackets mark droppable phrase groups.
enum class Slot {
    question_type,
    demonstrative,
    article,
    pair,
    attr1,
    attr2,
    attribute_name,
    category,
    location,
    conjunction,
    part,
};

std::optional<Slot> slot_from_string(std::string_view name);
const char* to_string(Slot s);

struct PatternToken {
    bool is_slot = false;
    Slot slot = Slot::question_type;
    std::string literal;
    int group = -1; // droppable-group index, -1 when outside any group
};

/// A slotted sentence pattern. Diversified variants are values of this same
/// type with edited tokens and a derived template_id.
struct QuestionTemplate {
    std::string template_id;
    AnswerType answer_type = AnswerType::binary;
    std::string question_type;        // display form, e.g. "is/are", "what {attribute}"
    std::string question_type_render; // expansion with {attribute} / {copula} micro-slots
    std::vector<PatternToken> tokens;
    int arity = 0;          // number of attribute-value slots (0, 1 or 2)
    int permutation_id = 0; // ordering of {ATTR1, ATTR2, CATEGORY} this pattern realizes
    std::string conjunction = "with";
    bool requires_location = false;
    std::vector<std::string> applies_to; // attribute names; empty = any applicable attribute
    bool decorated = false; // non-binary template carrying extra value slots; off by default
    bool agreement_noise = false; // variant flag: render with flipped agreement
    int droppable_groups = 0;

    bool has_slot(Slot s) const;
};

/// Values a render call consumes. LOCATION may be absent: the slot (or its
/// whole bracketed group) is elided.
struct Binding {
    const Category* category = nullptr; // may be null for category-free questions
    std::vector<std::pair<std::string, std::string>> attr_values; // (attribute, value), <= 2
    std::string attribute_display; // for ATTRIBUTE_NAME / {attribute}
    std::optional<LocationPhrase> location;
    AgreementBundle agreement;
    std::optional<std::string> part;
};

struct DiversifyPolicy {
    double drop_phrase_prob = 0.10; // structural variants: phrase drops and conjunction swaps
    double truncate_prob = 0.05;    // binary question-type truncation
    double agreement_noise_prob = 0.02;
    std::vector<std::string> conjunction_alternatives = {"with", "and", "in", "designed with",
                                                         "featured in"};
    uint64_t rng_seed = 0;
};

/// Renders the template against a binding. Pure; throws RenderError naming
/// the slot when a required value is missing. Output is a lowercase,
/// single-space-separated sentence with terminal punctuation attached.
std::string render(const QuestionTemplate& tmpl, const Binding& binding);

/// Returns the primary template plus deterministic variants (phrase drop,
/// conjunction swap, question-type truncation, agreement noise). The variant
/// set depends only on (policy, template_id, combo_key).
std::vector<QuestionTemplate> diversify(const QuestionTemplate& tmpl,
                                        const DiversifyPolicy& policy,
                                        std::string_view combo_key);

class TemplateLibrary {
public:
    static TemplateLibrary load(const std::string& json_text, Diagnostics& diags);
    static TemplateLibrary load_file(const std::string& path, Diagnostics& diags);

    const std::vector<QuestionTemplate>& all() const { return templates_; }

    /// Filters by answer type, attribute applicability against the category's
    /// super, and location availability. Deterministic order by template_id.
    std::vector<QuestionTemplate> templates_for(const std::optional<std::string>& attribute,
                                                const Category& category, AnswerType answer_type,
                                                const Taxonomy& tax) const;

    /// Binary templates of the given arity, applicability already filtered.
    std::vector<QuestionTemplate> binary_templates(int arity,
                                                   const std::vector<std::string>& attributes,
                                                   const Category* category,
                                                   const Taxonomy& tax) const;

    /// Resolves a template_id, reconstructing diversified variants from their
    /// "~" suffixes. Throws RegistryMissError for unknown ids.
    QuestionTemplate resolve(std::string_view template_id) const;

    int schema_version() const { return schema_version_; }

private:
    const QuestionTemplate* find_base(std::string_view id) const;
    bool applicable(const QuestionTemplate& t, const std::string& attribute,
                    const Category* category, const Taxonomy& tax) const;

    int schema_version_ = 0;
    std::vector<QuestionTemplate> templates_; // sorted by template_id
};

/// Parses a pattern string into tokens; exposed for library validation.
std::vector<PatternToken> parse_pattern(const std::string& pattern, int* group_count,
                                        std::string* error);

} // namespace fvqa
