#include "fvqa/ingest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fvqa {

using nlohmann::json;

const char* to_string(RejectReason r) {
    switch (r) {
    case RejectReason::malformed_record: return "malformed_record";
    case RejectReason::missing_field: return "missing_field";
    case RejectReason::invalid_piece_count: return "invalid_piece_count";
    case RejectReason::unknown_category: return "unknown_category";
    case RejectReason::duplicate_image_id: return "duplicate_image_id";
    }
    return "?";
}

const char* to_string(DropReason r) {
    switch (r) {
    case DropReason::unmapped_value: return "unmapped_value";
    case DropReason::inapplicable_attribute: return "inapplicable_attribute";
    }
    return "?";
}

uint64_t IngestReport::rejected_total() const {
    uint64_t n = 0;
    for (const auto& [_, c] : rejected) n += c;
    return n;
}

NormalizationRules NormalizationRules::load_file(const std::string& path, const Taxonomy& tax,
                                                 Diagnostics& diags) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open rules file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load(buf.str(), tax, diags);
}

NormalizationRules NormalizationRules::load(const std::string& json_text, const Taxonomy& tax,
                                            Diagnostics& diags) {
    NormalizationRules rules;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InputError(std::string("rules document is not valid JSON: ") + e.what());
    }
    rules.schema_version = doc.value("schema_version", 0);
    if (rules.schema_version != 1)
        diags.push_back({Diagnostic::Level::error, "rules.schema_version",
                         "unsupported schema_version " + std::to_string(rules.schema_version)});

    if (doc.contains("key_aliases"))
        for (auto it = doc["key_aliases"].begin(); it != doc["key_aliases"].end(); ++it) {
            std::string target = canonicalize(it.value().get<std::string>());
            if (!tax.find_attribute(target))
                diags.push_back({Diagnostic::Level::error, "rules.dangling_alias",
                                 "key alias '" + it.key() + "' targets unknown attribute '" +
                                     target + "'"});
            rules.key_aliases[canonicalize(it.key())] = target;
        }

    if (doc.contains("category_aliases"))
        for (auto it = doc["category_aliases"].begin(); it != doc["category_aliases"].end(); ++it) {
            std::string target = canonicalize(it.value().get<std::string>());
            if (!tax.find_category(target))
                diags.push_back({Diagnostic::Level::error, "rules.dangling_category_alias",
                                 "category alias '" + it.key() + "' targets unknown category '" +
                                     target + "'"});
            rules.category_aliases[canonicalize(it.key())] = target;
        }

    for (const auto& r : doc.value("split_rules", json::array())) {
        NormalizationRules::SplitRule rule;
        rule.delimiter = r.at("delimiter").get<std::string>();
        if (rule.delimiter.empty()) {
            diags.push_back({Diagnostic::Level::error, "rules.empty_delimiter",
                             "split rule with empty delimiter"});
            continue;
        }
        for (const auto& t : r.value("targets", json::array())) {
            std::string target = canonicalize(t.get<std::string>());
            if (!target.empty() && !tax.find_attribute(target))
                diags.push_back({Diagnostic::Level::error, "rules.dangling_split_target",
                                 "split rule targets unknown attribute '" + target + "'"});
            rule.targets.push_back(target);
        }
        rules.split_rules.push_back(std::move(rule));
    }

    if (doc.contains("value_map"))
        for (auto it = doc["value_map"].begin(); it != doc["value_map"].end(); ++it) {
            std::vector<NormalizationRules::ValueTarget> targets;
            for (const auto& t : it.value()) {
                NormalizationRules::ValueTarget vt;
                vt.attribute = canonicalize(t.at("attribute").get<std::string>());
                vt.value = canonicalize(t.at("value").get<std::string>());
                if (!tax.find_value(vt.attribute, vt.value))
                    diags.push_back({Diagnostic::Level::error, "rules.dangling_value_target",
                                     "value_map entry '" + it.key() + "' targets unregistered ('" +
                                         vt.attribute + "', '" + vt.value + "')"});
                targets.push_back(std::move(vt));
            }
            rules.value_map[canonicalize(it.key())] = std::move(targets);
        }

    // accessories default to single-item images; everything wearable to a person shot
    rules.default_has_person = {{SuperCategory::apparel_top, true},
                                {SuperCategory::apparel_bottom, true},
                                {SuperCategory::one_piece, true},
                                {SuperCategory::shoes, true},
                                {SuperCategory::accessories, false}};
    if (doc.contains("default_has_person"))
        for (auto it = doc["default_has_person"].begin(); it != doc["default_has_person"].end();
             ++it) {
            auto super = super_from_string(canonicalize(it.key()));
            if (!super)
                diags.push_back({Diagnostic::Level::error, "rules.unknown_super",
                                 "default_has_person names unknown super-category '" + it.key() +
                                     "'"});
            else
                rules.default_has_person[*super] = it.value().get<bool>();
        }

    return rules;
}

namespace {

std::vector<std::string> split_on(const std::string& text, const std::string& delim) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (;;) {
        size_t pos = text.find(delim, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + delim.size();
    }
}

// Resolves one candidate value against the split-rule target, the source
// key's attribute, then the value map; otherwise drops it.
void resolve_value(const std::string& target_attr, const std::string& source_attr,
                   const std::string& raw_value, const NormalizationRules& rules,
                   const Taxonomy& tax, const Category& cat,
                   std::map<std::string, std::set<std::string>>& out, IngestReport& report) {
    std::string value = canonicalize(raw_value);
    if (value.empty()) return;

    auto accept = [&](const std::string& attr, const std::string& val) -> bool {
        const Attribute* a = tax.find_attribute(attr);
        if (!a || !tax.find_value(attr, val)) return false;
        if (!a->applicable_supers.count(cat.super)) {
            ++report.dropped_values[DropReason::inapplicable_attribute];
            return true; // resolved, but not usable for this category
        }
        out[attr].insert(val);
        return true;
    };

    if (!target_attr.empty() && accept(target_attr, value)) return;
    if (!source_attr.empty() && source_attr != target_attr && accept(source_attr, value)) return;

    if (auto it = rules.value_map.find(value); it != rules.value_map.end()) {
        bool any = false;
        for (const auto& target : it->second) any = accept(target.attribute, target.value) || any;
        if (any) return;
    }

    ++report.dropped_values[DropReason::unmapped_value];
}

} // namespace

ParseOutcome parse_item(const RawItem& raw, const NormalizationRules& rules, const Taxonomy& tax,
                        IngestReport& report) {
    if (raw.item_id.empty() || raw.image_id.empty())
        return RejectRecord{raw.item_id, raw.image_id, RejectReason::missing_field,
                            "item_id and image_id must be non-empty"};
    if (raw.piece_count < 1)
        return RejectRecord{raw.item_id, raw.image_id, RejectReason::invalid_piece_count,
                            "piece_count " + std::to_string(raw.piece_count)};

    const Category* cat = nullptr;
    for (const auto& text : raw.category_text) {
        std::string name = canonicalize(text);
        if (auto it = rules.category_aliases.find(name); it != rules.category_aliases.end())
            name = it->second;
        if ((cat = tax.find_category(name))) break;
    }
    if (!cat)
        return RejectRecord{raw.item_id, raw.image_id, RejectReason::unknown_category,
                            "no category text resolves against the taxonomy"};

    FashionItem item;
    item.image_id = raw.image_id;
    item.category = cat->name;
    item.piece_count = raw.piece_count;
    if (raw.has_person) {
        item.has_person = *raw.has_person;
    } else {
        item.has_person = rules.default_has_person.at(cat->super);
        ++report.has_person_defaulted;
    }

    for (const auto& [raw_key, raw_values] : raw.raw_attributes) {
        std::string source_attr = canonicalize(raw_key);
        if (auto it = rules.key_aliases.find(source_attr); it != rules.key_aliases.end())
            source_attr = it->second;
        if (!tax.find_attribute(source_attr)) source_attr.clear();

        for (const auto& raw_value : raw_values) {
            std::string value = canonicalize(raw_value);
            // split rules run before the value map
            const NormalizationRules::SplitRule* split = nullptr;
            for (const auto& rule : rules.split_rules)
                if (value.find(rule.delimiter) != std::string::npos) {
                    split = &rule;
                    break;
                }
            if (!split) {
                resolve_value("", source_attr, value, rules, tax, *cat, item.values, report);
                continue;
            }
            std::vector<std::string> parts = split_on(value, split->delimiter);
            for (size_t i = 0; i < parts.size(); ++i) {
                std::string target = i < split->targets.size() ? split->targets[i] : "";
                resolve_value(target, source_attr, parts[i], rules, tax, *cat, item.values,
                              report);
            }
        }
    }
    return item;
}

std::variant<RawItem, RejectRecord> parse_raw_record(const std::string& line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::exception& e) {
        return RejectRecord{"", "", RejectReason::malformed_record, e.what()};
    }
    if (!doc.is_object())
        return RejectRecord{"", "", RejectReason::malformed_record, "record is not an object"};

    RawItem raw;
    try {
        raw.item_id = doc.value("item_id", "");
        raw.image_id = doc.value("image_id", "");
        if (doc.contains("image_ref")) raw.image_ref = doc["image_ref"].get<std::string>();
        if (doc.contains("category")) {
            if (doc["category"].is_array())
                for (const auto& c : doc["category"]) raw.category_text.push_back(c.get<std::string>());
            else
                raw.category_text.push_back(doc["category"].get<std::string>());
        }
        if (doc.contains("attributes"))
            for (auto it = doc["attributes"].begin(); it != doc["attributes"].end(); ++it) {
                std::vector<std::string> vals;
                if (it.value().is_array())
                    for (const auto& v : it.value()) vals.push_back(v.get<std::string>());
                else
                    vals.push_back(it.value().get<std::string>());
                raw.raw_attributes[it.key()] = std::move(vals);
            }
        if (doc.contains("has_person")) raw.has_person = doc["has_person"].get<bool>();
        raw.piece_count = doc.value("piece_count", 1);
    } catch (const json::exception& e) {
        return RejectRecord{raw.item_id, raw.image_id, RejectReason::malformed_record, e.what()};
    }
    return raw;
}

IngestResult ingest_catalog(std::istream& stream, const NormalizationRules& rules,
                            const Taxonomy& tax) {
    IngestResult result;
    std::set<std::string> seen_images;
    std::string line;
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        ++result.report.records_read;
        auto raw = parse_raw_record(line);
        if (std::holds_alternative<RejectRecord>(raw)) {
            auto rej = std::get<RejectRecord>(std::move(raw));
            ++result.report.rejected[rej.reason];
            result.rejects.push_back(std::move(rej));
            continue;
        }
        auto outcome = parse_item(std::get<RawItem>(raw), rules, tax, result.report);
        if (std::holds_alternative<RejectRecord>(outcome)) {
            auto rej = std::get<RejectRecord>(std::move(outcome));
            ++result.report.rejected[rej.reason];
            result.rejects.push_back(std::move(rej));
            continue;
        }
        auto item = std::get<FashionItem>(std::move(outcome));
        if (!seen_images.insert(item.image_id).second) {
            RejectRecord rej{std::get<RawItem>(raw).item_id, item.image_id,
                             RejectReason::duplicate_image_id, "image_id seen before"};
            ++result.report.rejected[rej.reason];
            result.rejects.push_back(std::move(rej));
            continue;
        }
        ++result.report.accepted;
        result.items.push_back(std::move(item));
    }
    if (stream.bad()) throw InputError("catalog stream failed mid-read");
    return result;
}

IngestResult ingest_catalog_file(const std::string& path, const NormalizationRules& rules,
                                 const Taxonomy& tax) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open catalog file: " + path);
    return ingest_catalog(in, rules, tax);
}

} // namespace fvqa
