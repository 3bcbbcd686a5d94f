#include "fvqa/balancer.hpp"

#include <algorithm>

#include "fvqa/rng.hpp"

namespace fvqa {

IdSet set_intersect(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

IdSet set_union(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

IdSet set_diff(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool set_contains(const IdSet& s, const std::string& id) {
    return std::binary_search(s.begin(), s.end(), id);
}

namespace {

const IdSet kEmpty;

IdSet freeze(const std::set<std::string>& s) {
    return IdSet(s.begin(), s.end());
}

} // namespace

const IdSet& ValueIndex::positives(const std::string& attribute, const std::string& value) const {
    auto it = value_pos.find({attribute, value});
    if (it == value_pos.end())
        throw RegistryMissError("value '" + value + "' of attribute '" + attribute +
                                "' is not indexed");
    return it->second;
}

const IdSet& ValueIndex::negatives(const std::string& attribute, const std::string& value) const {
    auto it = value_neg.find({attribute, value});
    if (it == value_neg.end())
        throw RegistryMissError("negatives of '" + value + "' ('" + attribute +
                                "') not computed");
    return it->second;
}

ValueIndex build_index(const std::vector<FashionItem>& items) {
    std::map<std::string, std::set<std::string>> universe;
    std::map<ValueKey, std::set<std::string>> value_pos;
    std::map<std::string, std::set<std::string>> cat_pos;
    std::set<std::string> cat_universe;

    ValueIndex index;
    for (const FashionItem& item : items) {
        index.categories.insert(item.category);
        // the category positive is per item, so attribute-less items still
        // answer category-only questions
        cat_pos[item.category].insert(item.image_id);
        cat_universe.insert(item.image_id);
        for (const auto& [attribute, values] : item.values) {
            universe[attribute].insert(item.image_id);
            for (const auto& value : values) {
                index.vocab[attribute].insert(value);
                value_pos[{attribute, value}].insert(item.image_id);
            }
        }
    }
    for (auto& [k, v] : universe) index.universe[k] = freeze(v);
    for (auto& [k, v] : value_pos) index.value_pos[k] = freeze(v);
    for (auto& [k, v] : cat_pos) index.cat_pos[k] = freeze(v);
    index.cat_universe = freeze(cat_universe);
    return index;
}

ValueIndex merge_synonyms(const ValueIndex& index, const Taxonomy& tax) {
    ValueIndex out = index;
    for (auto& [key, pos] : out.value_pos) {
        const auto& [attribute, value] = key;
        if (!tax.find_value(attribute, value)) continue; // off-registry values keep their own set
        for (const auto& syn : tax.synonyms_of(attribute, value)) {
            auto it = index.value_pos.find({attribute, syn});
            if (it != index.value_pos.end()) pos = set_union(pos, it->second);
        }
    }
    for (auto& [cat, pos] : out.cat_pos) {
        if (!tax.find_category(cat)) continue;
        for (const auto& sub : tax.category_descendants(cat)) {
            auto it = index.cat_pos.find(sub);
            if (it != index.cat_pos.end()) pos = set_union(pos, it->second);
        }
    }
    out.synonyms_merged = true;
    return out;
}

ValueIndex compute_negatives(const ValueIndex& index) {
    ValueIndex out = index;
    for (const auto& [key, pos] : out.value_pos)
        out.value_neg[key] = set_diff(out.universe.at(key.first), pos);
    for (const auto& [cat, pos] : out.cat_pos) out.cat_neg[cat] = set_diff(out.cat_universe, pos);
    out.negatives_ready = true;
    return out;
}

ComboSets combine(const std::string& attribute, const std::string& value,
                  const std::string& category, const ValueIndex& index) {
    return combine_multi({{attribute, value}}, category, index);
}

ComboSets combine(const std::string& value, const std::string& category, const ValueIndex& index) {
    std::vector<std::string> owners;
    for (const auto& [attribute, vocab] : index.vocab)
        if (vocab.count(value)) owners.push_back(attribute);
    if (owners.empty()) throw RegistryMissError("value '" + value + "' is not indexed");
    if (owners.size() > 1)
        throw Error("value '" + value + "' is ambiguous across attributes; qualify it");
    return combine(owners[0], value, category, index);
}

ComboSets combine_multi(const std::vector<ValueKey>& values, const std::string& category,
                        const ValueIndex& index) {
    if (values.size() > 2) throw Error("combinations carry at most two attribute values");
    if (values.size() == 2 && values[0].first == values[1].first)
        throw Error("invalid combination: both values belong to attribute '" + values[0].first +
                    "'");
    if (!index.negatives_ready) throw Error("negatives not computed; call compute_negatives first");

    // constituent (P, N) pairs: the values, then the category
    std::vector<std::pair<const IdSet*, const IdSet*>> parts;
    for (const auto& [attribute, value] : values)
        parts.push_back({&index.positives(attribute, value), &index.negatives(attribute, value)});
    if (!category.empty()) {
        auto p = index.cat_pos.find(category);
        auto n = index.cat_neg.find(category);
        if (p == index.cat_pos.end() || n == index.cat_neg.end())
            throw RegistryMissError("category '" + category + "' is not indexed");
        parts.push_back({&p->second, &n->second});
    }
    if (parts.empty()) throw Error("empty combination");

    ComboSets combo;
    combo.values = values;
    combo.category = category;

    combo.pos = *parts[0].first;
    for (size_t i = 1; i < parts.size(); ++i) combo.pos = set_intersect(combo.pos, *parts[i].first);

    // union over every mixed-membership term (at least one N constituent)
    const size_t n = parts.size();
    for (uint32_t mask = 1; mask < (1u << n); ++mask) {
        IdSet term = (mask & 1u) ? *parts[0].second : *parts[0].first;
        for (size_t i = 1; i < n && !term.empty(); ++i)
            term = set_intersect(term, (mask & (1u << i)) ? *parts[i].second : *parts[i].first);
        combo.neg = set_union(combo.neg, term);
    }
    return combo;
}

std::vector<Triplet> emit_balanced(const TripletDraft& draft, const ComboSets& combo, int quota,
                                   const std::string& rng_key, uint64_t master_seed) {
    if (quota < 1) throw Error("quota must be >= 1");
    size_t k = std::min({static_cast<size_t>(quota), combo.pos.size(), combo.neg.size()});
    std::vector<Triplet> out;
    if (k == 0) return out;
    out.reserve(2 * k);

    auto emit = [&](const IdSet& ids, const char* answer, const std::string& side) {
        SplitMix64 rng = rng_for(master_seed, rng_key + "|" + side);
        for (size_t idx : sample_indices(rng, ids.size(), k)) {
            Triplet t;
            t.image_id = ids[idx];
            t.question = draft.question;
            t.answer = answer;
            t.answer_type = "binary";
            t.question_type = draft.question_type;
            t.template_id = draft.template_id;
            t.tier = draft.tier;
            t.noise = draft.noise;
            out.push_back(std::move(t));
        }
    };
    emit(combo.pos, "yes", "pos");
    emit(combo.neg, "no", "neg");
    return out;
}

TriState image_based_negatives(const FashionItem& item, const std::vector<ValueKey>& values,
                               const std::string& category, const ValueIndex& index) {
    bool any_unknown = false;
    if (!category.empty()) {
        auto pos = index.cat_pos.find(category);
        if (pos == index.cat_pos.end()) return TriState::unknown;
        if (!set_contains(pos->second, item.image_id)) return TriState::no;
    }
    for (const auto& [attribute, value] : values) {
        auto universe = index.universe.find(attribute);
        bool labeled = universe != index.universe.end() &&
                       set_contains(universe->second, item.image_id);
        auto vocab = index.vocab.find(attribute);
        bool in_vocab = vocab != index.vocab.end() && vocab->second.count(value);
        if (!labeled || !in_vocab) {
            any_unknown = true;
            continue;
        }
        auto pos = index.value_pos.find({attribute, value});
        if (pos == index.value_pos.end() || !set_contains(pos->second, item.image_id))
            return TriState::no;
    }
    return any_unknown ? TriState::unknown : TriState::yes;
}

} // namespace fvqa
