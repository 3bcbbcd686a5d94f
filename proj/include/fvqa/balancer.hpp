#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fvqa/ingest.hpp"
#include "fvqa/taxonomy.hpp"
#include "fvqa/triplet.hpp"

namespace fvqa {

/// Sorted, duplicate-free image-id set. Kept sorted so set algebra and
/// sampling are order-stable across machines.
using IdSet = std::vector<std::string>;

IdSet set_intersect(const IdSet& a, const IdSet& b);
IdSet set_union(const IdSet& a, const IdSet& b);
IdSet set_diff(const IdSet& a, const IdSet& b);
bool set_contains(const IdSet& s, const std::string& id);

using ValueKey = std::pair<std::string, std::string>; // (attribute, value)

/// The attribute-value-to-images dictionaries: per-attribute universes and
/// vocabularies, per-value and per-category positive/negative id sets.
struct ValueIndex {
    std::map<std::string, IdSet> universe;            // images labeled for an attribute
    std::map<std::string, std::set<std::string>> vocab; // values observed per attribute
    std::map<ValueKey, IdSet> value_pos;
    std::map<ValueKey, IdSet> value_neg;
    std::set<std::string> categories;
    std::map<std::string, IdSet> cat_pos;
    std::map<std::string, IdSet> cat_neg;
    IdSet cat_universe; // every indexed image carries a category label
    bool synonyms_merged = false;
    bool negatives_ready = false;

    const IdSet& positives(const std::string& attribute, const std::string& value) const;
    const IdSet& negatives(const std::string& attribute, const std::string& value) const;
};

/// Positive/negative image sets of one (values..., category) combination.
struct ComboSets {
    std::vector<ValueKey> values; // 0..2 entries, distinct attributes
    std::string category;         // empty for value-only combinations
    IdSet pos;
    IdSet neg;
};

/// Builds universes, vocabularies and positive sets from canonical items.
/// Negative sets are not computed yet.
ValueIndex build_index(const std::vector<FashionItem>& items);

/// Folds positives of every synonym (and of category descendants) into each
/// value's (category's) positive set. Computed from the pre-merge snapshot,
/// so the result is order-independent and idempotent.
ValueIndex merge_synonyms(const ValueIndex& index, const Taxonomy& tax);

/// N = U minus P per value; category negatives against the category universe.
ValueIndex compute_negatives(const ValueIndex& index);

/// Positive/negative sets of one value-category combination. The negative
/// set is the union of the three mixed-membership terms.
ComboSets combine(const std::string& value, const std::string& category, const ValueIndex& index);
ComboSets combine(const std::string& attribute, const std::string& value,
                  const std::string& category, const ValueIndex& index);

/// Generalization to up to two values from distinct attributes plus a
/// category. Equals the universe-intersection complement of the positive set.
ComboSets combine_multi(const std::vector<ValueKey>& values, const std::string& category,
                        const ValueIndex& index);

/// Metadata stamped onto every triplet emitted for one question.
struct TripletDraft {
    std::string question;
    std::string question_type;
    std::string template_id;
    int tier = 0;
    bool noise = false;
};

/// Emits min(quota, |pos|, |neg|) yes-triplets and the same number of
/// no-triplets, sampled without replacement by the stream derived from
/// (master_seed, rng_key).
std::vector<Triplet> emit_balanced(const TripletDraft& draft, const ComboSets& combo, int quota,
                                   const std::string& rng_key, uint64_t master_seed);

enum class TriState { yes, no, unknown };

/// Classifies a (question, image) pair by the image's own labels: the
/// image-based strategy's answer test. `unknown` marks constituents the item
/// is not labeled for.
TriState image_based_negatives(const FashionItem& item, const std::vector<ValueKey>& values,
                               const std::string& category, const ValueIndex& index);

} // namespace fvqa
