#include "fvqa/template_engine.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fvqa/rng.hpp"

namespace fvqa {

using nlohmann::json;

const char* to_string(AnswerType t) {
    return t == AnswerType::binary ? "binary" : "non_binary";
}

namespace {

const std::pair<const char*, Slot> kSlotNames[] = {
    {"QUESTION_TYPE", Slot::question_type},
    {"DEMONSTRATIVE", Slot::demonstrative},
    {"ARTICLE", Slot::article},
    {"PAIR", Slot::pair},
    {"ATTR1", Slot::attr1},
    {"ATTR2", Slot::attr2},
    {"ATTRIBUTE_NAME", Slot::attribute_name},
    {"CATEGORY", Slot::category},
    {"LOCATION", Slot::location},
    {"CONJUNCTION", Slot::conjunction},
    {"PART", Slot::part},
};

} // namespace

std::optional<Slot> slot_from_string(std::string_view name) {
    for (const auto& [text, slot] : kSlotNames)
        if (name == text) return slot;
    return std::nullopt;
}

const char* to_string(Slot s) {
    for (const auto& [text, slot] : kSlotNames)
        if (slot == s) return text;
    return "?";
}

bool QuestionTemplate::has_slot(Slot s) const {
    for (const auto& t : tokens)
        if (t.is_slot && t.slot == s) return true;
    return false;
}

std::vector<PatternToken> parse_pattern(const std::string& pattern, int* group_count,
                                        std::string* error) {
    std::vector<PatternToken> tokens;
    int group = -1;
    int next_group = 0;
    std::string literal;
    auto flush = [&] {
        if (literal.empty()) return;
        PatternToken t;
        t.literal = literal;
        t.group = group;
        tokens.push_back(std::move(t));
        literal.clear();
    };
    for (size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == '{') {
            size_t end = pattern.find('}', i);
            if (end == std::string::npos) {
                if (error) *error = "unterminated placeholder";
                return {};
            }
            std::string name = pattern.substr(i + 1, end - i - 1);
            auto slot = slot_from_string(name);
            if (!slot) {
                if (error) *error = "unknown slot {" + name + "}";
                return {};
            }
            flush();
            PatternToken t;
            t.is_slot = true;
            t.slot = *slot;
            t.group = group;
            tokens.push_back(t);
            i = end;
        } else if (c == '[') {
            if (group != -1) {
                if (error) *error = "nested droppable group";
                return {};
            }
            flush();
            group = next_group++;
        } else if (c == ']') {
            if (group == -1) {
                if (error) *error = "unmatched ']'";
                return {};
            }
            flush();
            group = -1;
        } else if (c == ' ') {
            flush();
        } else {
            literal.push_back(c);
        }
    }
    if (group != -1) {
        if (error) *error = "unterminated droppable group";
        return {};
    }
    flush();
    if (group_count) *group_count = next_group;
    return tokens;
}

namespace {

std::string expand_question_type(const QuestionTemplate& tmpl, const Binding& binding) {
    const std::string& src = tmpl.question_type_render;
    std::string out;
    for (size_t i = 0; i < src.size(); ++i) {
        if (src[i] != '{') {
            out.push_back(src[i]);
            continue;
        }
        size_t end = src.find('}', i);
        std::string name = src.substr(i + 1, end - i - 1);
        if (name == "attribute") {
            if (binding.attribute_display.empty())
                throw RenderError("ATTRIBUTE_NAME", tmpl.template_id);
            out += binding.attribute_display;
        } else if (name == "copula") {
            out += binding.agreement.copula;
        } else {
            throw RenderError(name, tmpl.template_id);
        }
        i = end;
    }
    return out;
}

} // namespace

std::string render(const QuestionTemplate& tmpl, const Binding& binding) {
    AgreementBundle agreement = binding.agreement;
    if (tmpl.agreement_noise) agreement = flipped(agreement, binding.category);
    Binding bound = binding;
    bound.agreement = agreement;

    // Bracketed groups whose LOCATION is absent are elided wholesale, so the
    // surrounding literals ("the person wearing ...") never dangle.
    std::vector<bool> group_dead(static_cast<size_t>(tmpl.droppable_groups), false);
    if (!bound.location)
        for (const auto& t : tmpl.tokens)
            if (t.is_slot && t.slot == Slot::location && t.group >= 0)
                group_dead[static_cast<size_t>(t.group)] = true;

    constexpr const char* kArticleMark = "\x01";
    std::vector<std::string> words;
    for (const auto& t : tmpl.tokens) {
        if (t.group >= 0 && group_dead[static_cast<size_t>(t.group)]) continue;
        if (!t.is_slot) {
            words.push_back(t.literal);
            continue;
        }
        switch (t.slot) {
        case Slot::question_type:
            words.push_back(expand_question_type(tmpl, bound));
            break;
        case Slot::demonstrative:
            words.push_back(agreement.demonstrative);
            break;
        case Slot::article:
            words.push_back(kArticleMark);
            break;
        case Slot::pair:
            words.push_back(agreement.pair_phrase);
            break;
        case Slot::attr1:
            if (bound.attr_values.empty()) throw RenderError("ATTR1", tmpl.template_id);
            words.push_back(bound.attr_values[0].second);
            break;
        case Slot::attr2:
            if (bound.attr_values.size() < 2) throw RenderError("ATTR2", tmpl.template_id);
            words.push_back(bound.attr_values[1].second);
            break;
        case Slot::attribute_name:
            if (bound.attribute_display.empty())
                throw RenderError("ATTRIBUTE_NAME", tmpl.template_id);
            words.push_back(bound.attribute_display);
            break;
        case Slot::category:
            if (!bound.category) throw RenderError("CATEGORY", tmpl.template_id);
            words.push_back(agreement.noun);
            break;
        case Slot::location:
            words.push_back(bound.location ? bound.location->text : "");
            break;
        case Slot::conjunction:
            words.push_back(tmpl.conjunction);
            break;
        case Slot::part:
            if (!bound.part) throw RenderError("PART", tmpl.template_id);
            words.push_back(*bound.part);
            break;
        }
    }

    // article resolution needs the next non-empty word
    for (size_t i = 0; i < words.size(); ++i) {
        if (words[i] != kArticleMark) continue;
        if (agreement.plural) {
            words[i].clear();
            continue;
        }
        std::string next;
        for (size_t j = i + 1; j < words.size(); ++j)
            if (!words[j].empty() && words[j] != kArticleMark && words[j] != "?") {
                next = words[j];
                break;
            }
        char first = next.empty() ? '\0' : static_cast<char>(std::tolower(
                                               static_cast<unsigned char>(next[0])));
        bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u';
        words[i] = next.empty() ? "" : (vowel ? "an" : "a");
    }

    std::string joined;
    for (const auto& w : words) {
        if (w.empty()) continue;
        if (!joined.empty()) joined.push_back(' ');
        joined += w;
    }

    // cleanup pass: collapse spaces, glue punctuation, lowercase
    std::string out;
    out.reserve(joined.size());
    for (char c : joined) {
        if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
        if ((c == '?' || c == ',') && !out.empty() && out.back() == ' ') out.pop_back();
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

namespace {

QuestionTemplate make_variant(const QuestionTemplate& base, const std::string& suffix) {
    QuestionTemplate v = base;
    v.template_id = base.template_id + suffix;
    return v;
}

bool drop_group(QuestionTemplate& v, int group) {
    if (group < 0 || group >= v.droppable_groups) return false;
    std::erase_if(v.tokens, [&](const PatternToken& t) { return t.group == group; });
    return true;
}

// removes the question-type opener (question type + demonstrative); the
// article survives, "is this a white shirt..." -> "a white shirt..."
bool truncate_question_type(QuestionTemplate& v) {
    if (!v.has_slot(Slot::question_type)) return false;
    std::erase_if(v.tokens, [](const PatternToken& t) {
        return t.is_slot && (t.slot == Slot::question_type || t.slot == Slot::demonstrative);
    });
    return true;
}

} // namespace

std::vector<QuestionTemplate> diversify(const QuestionTemplate& tmpl,
                                        const DiversifyPolicy& policy,
                                        std::string_view combo_key) {
    std::vector<QuestionTemplate> out{tmpl};
    SplitMix64 rng = rng_for(policy.rng_seed,
                             "diversify|" + tmpl.template_id + "|" + std::string(combo_key));

    // (a) drop one demonstrative/pronoun/prepositional phrase group
    double roll_drop = rng.uniform();
    uint64_t drop_pick = rng.next();
    if (tmpl.droppable_groups > 0 && roll_drop < policy.drop_phrase_prob) {
        int group = static_cast<int>(drop_pick % static_cast<uint64_t>(tmpl.droppable_groups));
        QuestionTemplate v = make_variant(tmpl, "~drop" + std::to_string(group));
        if (drop_group(v, group)) out.push_back(std::move(v));
    }

    // (b) swap the conjunction structure
    double roll_conj = rng.uniform();
    uint64_t conj_pick = rng.next();
    if (tmpl.has_slot(Slot::conjunction) && roll_conj < policy.drop_phrase_prob) {
        std::vector<std::string> alts;
        for (const auto& c : policy.conjunction_alternatives)
            if (c != tmpl.conjunction) alts.push_back(c);
        if (!alts.empty()) {
            const std::string& pick = alts[conj_pick % alts.size()];
            QuestionTemplate v = make_variant(tmpl, "~conj:" + pick);
            v.conjunction = pick;
            out.push_back(std::move(v));
        }
    }

    // (c) truncate the question-type phrase of binary questions
    double roll_trunc = rng.uniform();
    if (tmpl.answer_type == AnswerType::binary && roll_trunc < policy.truncate_prob) {
        QuestionTemplate v = make_variant(tmpl, "~trunc");
        if (truncate_question_type(v)) out.push_back(std::move(v));
    }

    // (d) agreement noise: this/these, is/are, singular/plural flipped
    double roll_noise = rng.uniform();
    if (roll_noise < policy.agreement_noise_prob) {
        QuestionTemplate v = make_variant(tmpl, "~noise");
        v.agreement_noise = true;
        out.push_back(std::move(v));
    }
    return out;
}

TemplateLibrary TemplateLibrary::load_file(const std::string& path, Diagnostics& diags) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open template library: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load(buf.str(), diags);
}

TemplateLibrary TemplateLibrary::load(const std::string& json_text, Diagnostics& diags) {
    TemplateLibrary lib;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InputError(std::string("template library is not valid JSON: ") + e.what());
    }
    lib.schema_version_ = doc.value("schema_version", 0);
    if (lib.schema_version_ != 1)
        diags.push_back({Diagnostic::Level::error, "templates.schema_version",
                         "unsupported schema_version " + std::to_string(lib.schema_version_)});

    std::set<std::string> seen_ids;
    for (const auto& t : doc.value("templates", json::array())) {
        QuestionTemplate tmpl;
        tmpl.template_id = t.at("id").get<std::string>();
        if (!seen_ids.insert(tmpl.template_id).second)
            diags.push_back({Diagnostic::Level::error, "templates.duplicate_id",
                             "template id '" + tmpl.template_id + "' registered twice"});
        if (tmpl.template_id.find('~') != std::string::npos)
            diags.push_back({Diagnostic::Level::error, "templates.reserved_character",
                             "template id '" + tmpl.template_id + "' contains reserved '~'"});
        std::string answer = t.at("answer_type").get<std::string>();
        if (answer == "binary")
            tmpl.answer_type = AnswerType::binary;
        else if (answer == "non_binary")
            tmpl.answer_type = AnswerType::non_binary;
        else
            diags.push_back({Diagnostic::Level::error, "templates.answer_type",
                             "template '" + tmpl.template_id + "' has unknown answer_type"});
        tmpl.question_type = t.value("question_type", "");
        tmpl.question_type_render = t.value("question_type_render", tmpl.question_type);
        tmpl.arity = t.value("arity", 0);
        tmpl.permutation_id = t.value("permutation", 0);
        tmpl.conjunction = t.value("conjunction", "with");
        tmpl.requires_location = t.value("requires_location", false);
        tmpl.decorated = t.value("decorated", false);
        for (const auto& a : t.value("applies_to", json::array()))
            tmpl.applies_to.push_back(canonicalize(a.get<std::string>()));

        std::string error;
        tmpl.tokens = parse_pattern(t.at("pattern").get<std::string>(), &tmpl.droppable_groups,
                                    &error);
        if (!error.empty()) {
            diags.push_back({Diagnostic::Level::error, "templates.bad_pattern",
                             "template '" + tmpl.template_id + "': " + error});
            continue;
        }

        if (tmpl.arity < 0 || tmpl.arity > 2)
            diags.push_back({Diagnostic::Level::error, "templates.arity",
                             "template '" + tmpl.template_id + "' has arity outside {0,1,2}"});
        int value_slots = (tmpl.has_slot(Slot::attr1) ? 1 : 0) + (tmpl.has_slot(Slot::attr2) ? 1 : 0);
        if (tmpl.answer_type == AnswerType::binary && value_slots != tmpl.arity)
            diags.push_back({Diagnostic::Level::error, "templates.arity_slots",
                             "template '" + tmpl.template_id + "' declares arity " +
                                 std::to_string(tmpl.arity) + " but has " +
                                 std::to_string(value_slots) + " value slots"});
        if (tmpl.tokens.empty() || tmpl.tokens.back().is_slot ||
            tmpl.tokens.back().literal.back() != '?')
            diags.push_back({Diagnostic::Level::error, "templates.terminal_punctuation",
                             "template '" + tmpl.template_id + "' pattern must end with '?'"});
        if (tmpl.answer_type == AnswerType::non_binary) {
            static const std::vector<std::string> kQuestionWords = {"what", "why", "when", "how"};
            std::string head = tmpl.question_type_render.substr(
                0, tmpl.question_type_render.find(' '));
            if (std::find(kQuestionWords.begin(), kQuestionWords.end(), head) ==
                kQuestionWords.end())
                diags.push_back({Diagnostic::Level::error, "templates.question_word",
                                 "non-binary template '" + tmpl.template_id +
                                     "' must start with a question word"});
        }
        lib.templates_.push_back(std::move(tmpl));
    }
    std::sort(lib.templates_.begin(), lib.templates_.end(),
              [](const auto& a, const auto& b) { return a.template_id < b.template_id; });
    return lib;
}

bool TemplateLibrary::applicable(const QuestionTemplate& t, const std::string& attribute,
                                 const Category* category, const Taxonomy& tax) const {
    if (!t.applies_to.empty() &&
        std::find(t.applies_to.begin(), t.applies_to.end(), attribute) == t.applies_to.end())
        return false;
    if (!attribute.empty()) {
        const Attribute* attr = tax.find_attribute(attribute);
        if (!attr) return false;
        if (category && !attr->applicable_supers.count(category->super)) return false;
        if (t.applies_to.empty() && t.answer_type == AnswerType::non_binary && !attr->generic_wh)
            return false;
    }
    if (t.requires_location && (!category || !category->default_location)) return false;
    return true;
}

std::vector<QuestionTemplate> TemplateLibrary::templates_for(
    const std::optional<std::string>& attribute, const Category& category, AnswerType answer_type,
    const Taxonomy& tax) const {
    std::vector<QuestionTemplate> out;
    for (const auto& t : templates_) {
        if (t.answer_type != answer_type) continue;
        if (answer_type == AnswerType::non_binary && !attribute) continue;
        if (answer_type == AnswerType::binary) {
            // binary selection by arity: attribute given -> value-bearing
            // templates, otherwise category-only
            if (attribute && t.arity == 0) continue;
            if (!attribute && t.arity != 0) continue;
        }
        if (!applicable(t, attribute.value_or(""), &category, tax)) continue;
        out.push_back(t);
    }
    return out; // templates_ already sorted by id
}

std::vector<QuestionTemplate> TemplateLibrary::binary_templates(
    int arity, const std::vector<std::string>& attributes, const Category* category,
    const Taxonomy& tax) const {
    std::vector<QuestionTemplate> out;
    for (const auto& t : templates_) {
        if (t.answer_type != AnswerType::binary || t.arity != arity) continue;
        if (t.has_slot(Slot::category) != (category != nullptr)) continue;
        bool ok = true;
        for (const auto& a : attributes)
            if (!applicable(t, a, category, tax)) {
                ok = false;
                break;
            }
        if (attributes.empty() && !applicable(t, "", category, tax)) ok = false;
        if (ok) out.push_back(t);
    }
    return out;
}

const QuestionTemplate* TemplateLibrary::find_base(std::string_view id) const {
    auto it = std::lower_bound(templates_.begin(), templates_.end(), id,
                               [](const QuestionTemplate& t, std::string_view key) {
                                   return t.template_id < key;
                               });
    if (it == templates_.end() || it->template_id != id) return nullptr;
    return &*it;
}

QuestionTemplate TemplateLibrary::resolve(std::string_view template_id) const {
    std::string id(template_id);
    size_t tilde = id.find('~');
    std::string base_id = id.substr(0, tilde);
    const QuestionTemplate* base = find_base(base_id);
    if (!base) throw RegistryMissError("unknown template id: " + id);
    QuestionTemplate t = *base;
    if (tilde == std::string::npos) return t;

    std::string suffix = id.substr(tilde + 1);
    t.template_id = id;
    if (suffix.rfind("drop", 0) == 0) {
        int group = std::stoi(suffix.substr(4));
        if (!drop_group(t, group))
            throw RegistryMissError("template variant drops missing group: " + id);
    } else if (suffix.rfind("conj:", 0) == 0) {
        t.conjunction = suffix.substr(5);
    } else if (suffix == "trunc") {
        truncate_question_type(t);
    } else if (suffix == "noise") {
        t.agreement_noise = true;
    } else {
        throw RegistryMissError("unknown template variant suffix: " + id);
    }
    return t;
}

} // namespace fvqa
