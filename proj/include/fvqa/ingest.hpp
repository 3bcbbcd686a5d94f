#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fvqa/taxonomy.hpp"

namespace fvqa {

/// One catalog record exactly as it arrives, before any normalization.
struct RawItem {
    std::string item_id;
    std::string image_id;
    std::optional<std::string> image_ref; // opaque pass-through, never opened
    std::vector<std::string> category_text;
    std::map<std::string, std::vector<std::string>> raw_attributes;
    std::optional<bool> has_person;
    int piece_count = 1;
};

/// A canonical catalog entry. Everything downstream consumes these.
struct FashionItem {
    std::string image_id;
    std::string category;
    std::map<std::string, std::set<std::string>> values; // attribute -> value names
    bool has_person = false;
    int piece_count = 1;
};

enum class RejectReason {
    malformed_record,
    missing_field,
    invalid_piece_count,
    unknown_category,
    duplicate_image_id,
};

const char* to_string(RejectReason r);

struct RejectRecord {
    std::string item_id;
    std::string image_id;
    RejectReason reason = RejectReason::malformed_record;
    std::string detail;
};

enum class DropReason {
    unmapped_value,       // no alias/split/value_map rule resolves it
    inapplicable_attribute, // attribute not applicable to the category's super
};

const char* to_string(DropReason r);

/// Declarative cleanup rules: key aliasing, entangled-value splitting and
/// vague-value mapping. Loaded from a rules document.
struct NormalizationRules {
    struct SplitRule {
        std::string delimiter;
        std::vector<std::string> targets; // per-part attribute; "" = resolve normally
    };
    struct ValueTarget {
        std::string attribute;
        std::string value;
    };
    int schema_version = 0;
    std::map<std::string, std::string> key_aliases;      // raw key -> attribute
    std::map<std::string, std::string> category_aliases; // raw -> category
    std::vector<SplitRule> split_rules;
    std::map<std::string, std::vector<ValueTarget>> value_map;
    std::map<SuperCategory, bool> default_has_person;

    static NormalizationRules load(const std::string& json_text, const Taxonomy& tax,
                                   Diagnostics& diags);
    static NormalizationRules load_file(const std::string& path, const Taxonomy& tax,
                                        Diagnostics& diags);
};

struct IngestReport {
    uint64_t records_read = 0;
    uint64_t accepted = 0;
    std::map<RejectReason, uint64_t> rejected;
    std::map<DropReason, uint64_t> dropped_values;
    uint64_t has_person_defaulted = 0;

    uint64_t rejected_total() const;
};

using ParseOutcome = std::variant<FashionItem, RejectRecord>;

/// Normalizes one raw record. Rejection is a data outcome, not a failure;
/// unresolvable values are dropped and counted in `report`.
ParseOutcome parse_item(const RawItem& raw, const NormalizationRules& rules, const Taxonomy& tax,
                        IngestReport& report);

/// Parses one JSONL catalog line into a RawItem. Returns RejectRecord for
/// schema violations.
std::variant<RawItem, RejectRecord> parse_raw_record(const std::string& line);

struct IngestResult {
    std::vector<FashionItem> items;
    std::vector<RejectRecord> rejects;
    IngestReport report;
};

/// Runs the full pipeline over a record stream. Output order equals input
/// order; duplicate image ids are rejected after the first occurrence.
IngestResult ingest_catalog(std::istream& stream, const NormalizationRules& rules,
                            const Taxonomy& tax);
IngestResult ingest_catalog_file(const std::string& path, const NormalizationRules& rules,
                                 const Taxonomy& tax);

} // namespace fvqa
