#include <doctest.h>

#include "fvqa/balancer.hpp"
#include "fvqa/rng.hpp"
#include "support/fixtures.hpp"

using namespace fvqa;
using namespace fvqa::test;

namespace {

ValueIndex full_index(const std::vector<FashionItem>& items, const Taxonomy& tax) {
    return compute_negatives(merge_synonyms(build_index(items), tax));
}

// Independent oracle: walks every image and combines per-constituent P/N
// membership through the truth table instead of set algebra.
void oracle_check(const ComboSets& combo, const ValueIndex& index) {
    std::vector<std::pair<const IdSet*, const IdSet*>> parts;
    for (const auto& [attr, value] : combo.values)
        parts.push_back({&index.positives(attr, value), &index.negatives(attr, value)});
    if (!combo.category.empty())
        parts.push_back({&index.cat_pos.at(combo.category), &index.cat_neg.at(combo.category)});

    IdSet pos, neg, universe;
    for (const auto& img : index.cat_universe) {
        bool all_pos = true, in_all = true, any_neg = false;
        for (const auto& [p, n] : parts) {
            bool in_p = set_contains(*p, img);
            bool in_n = set_contains(*n, img);
            if (!in_p && !in_n) in_all = false;
            if (!in_p) all_pos = false;
            if (in_n) any_neg = true;
        }
        if (!in_all) continue;
        universe.push_back(img);
        if (all_pos) pos.push_back(img);
        if (any_neg) neg.push_back(img);
    }
    CHECK(combo.pos == pos);
    CHECK(combo.neg == neg);
    // the union-of-terms route must equal the universe complement
    CHECK(combo.neg == set_diff(universe, combo.pos));
    CHECK(set_intersect(combo.pos, combo.neg).empty());
}

std::vector<FashionItem> random_catalog(uint64_t seed, size_t max_items) {
    SplitMix64 rng = rng_for(seed, "catalog");
    static const std::vector<std::string> colors = {"red", "white", "blue", "light blue",
                                                    "sky blue"};
    static const std::vector<std::string> patterns = {"solid", "striped"};
    static const std::vector<std::string> cats = {"shirt", "dress", "pants"};
    size_t n = 1 + rng.bounded(max_items);
    std::vector<FashionItem> items;
    for (size_t i = 0; i < n; ++i) {
        FashionItem item;
        item.image_id = "img" + std::to_string(i);
        item.category = cats[rng.bounded(cats.size())];
        if (rng.uniform() < 0.8) {
            item.values["color"].insert(colors[rng.bounded(colors.size())]);
            if (rng.uniform() < 0.3) item.values["color"].insert(colors[rng.bounded(colors.size())]);
        }
        if (rng.uniform() < 0.6) item.values["pattern"].insert(patterns[rng.bounded(patterns.size())]);
        items.push_back(std::move(item));
    }
    return items;
}

} // namespace

TEST_CASE("build_index fills the dictionaries the way the loops specify") {
    CHECK(build_index({}).cat_universe.empty());

    Taxonomy tax = toy_taxonomy();
    ValueIndex index = build_index(toy_catalog());
    CHECK(index.universe.at("color") == IdSet{"A", "B", "C", "D"});
    CHECK(index.positives("color", "red") == IdSet{"A", "C"});
    CHECK(index.positives("color", "blue") == IdSet{"B", "D"});
    CHECK(index.cat_pos.at("shirt") == IdSet{"A", "B"});
    CHECK(index.cat_pos.at("dress") == IdSet{"C", "D"});
    CHECK(index.categories == std::set<std::string>{"dress", "shirt"});
    CHECK(index.vocab.at("color") == std::set<std::string>{"blue", "red"});

    // multi-label item lands in both positive sets
    auto items = toy_catalog();
    items[0].values["color"].insert("white");
    ValueIndex multi = build_index(items);
    CHECK(set_contains(multi.positives("color", "red"), "A"));
    CHECK(set_contains(multi.positives("color", "white"), "A"));
}

TEST_CASE("merge_synonyms unions alternatives both ways") {
    Taxonomy tax = toy_taxonomy();
    std::vector<FashionItem> items = {
        make_item("X", "pants", {{"style", {"jogger pants"}}}),
        make_item("Y", "pants", {{"style", {"sweatpants"}}}),
    };
    ValueIndex merged = merge_synonyms(build_index(items), tax);
    CHECK(merged.positives("style", "jogger pants") == IdSet{"X", "Y"});
    CHECK(merged.positives("style", "sweatpants") == IdSet{"X", "Y"});
}

TEST_CASE("merge_synonyms flows child positives up the hierarchy only") {
    Taxonomy tax = toy_taxonomy();
    std::vector<FashionItem> items = {
        make_item("E", "shirt", {{"color", {"light blue"}}}),
        make_item("F", "shirt", {{"color", {"sky blue"}}}),
        make_item("G", "shirt", {{"color", {"blue"}}}),
    };
    ValueIndex merged = merge_synonyms(build_index(items), tax);
    CHECK(merged.positives("color", "blue") == IdSet{"E", "F", "G"});
    CHECK(merged.positives("color", "light blue") == IdSet{"E"}); // no downward flow
    CHECK(merged.positives("color", "sky blue") == IdSet{"F"});
}

TEST_CASE("merge_synonyms without relations is a no-op") {
    Taxonomy tax = toy_taxonomy();
    ValueIndex before = build_index(toy_catalog());
    ValueIndex after = merge_synonyms(before, tax);
    CHECK(after.value_pos == before.value_pos);
    CHECK(after.cat_pos == before.cat_pos);
}

TEST_CASE("merge_synonyms is idempotent, including chained alternatives") {
    std::string chain = R"({
      "schema_version": 1,
      "categories": [{"name": "pants", "super": "apparel bottom", "singular": "pants",
                      "plural": "pants", "paired": true, "invariant_number": true}],
      "attributes": [{"name": "style", "supers": ["apparel bottom"],
        "values": [
          {"name": "a", "alternatives": ["b"]},
          {"name": "b", "alternatives": ["a", "c"]},
          {"name": "c", "alternatives": ["b"]}
        ]}]
    })";
    Diagnostics diags;
    Taxonomy tax = Taxonomy::load(chain, diags);
    REQUIRE_FALSE(has_errors(diags));

    std::vector<FashionItem> items = {
        make_item("1", "pants", {{"style", {"a"}}}),
        make_item("2", "pants", {{"style", {"b"}}}),
        make_item("3", "pants", {{"style", {"c"}}}),
    };
    ValueIndex once = merge_synonyms(build_index(items), tax);
    ValueIndex twice = merge_synonyms(once, tax);
    CHECK(once.value_pos == twice.value_pos);
    CHECK(once.positives("style", "a") == IdSet{"1", "2", "3"});

    Taxonomy toy = toy_taxonomy();
    std::vector<FashionItem> blues = {
        make_item("E", "shirt", {{"color", {"light blue"}}}),
        make_item("G", "shirt", {{"color", {"blue"}}}),
    };
    ValueIndex b_once = merge_synonyms(build_index(blues), toy);
    ValueIndex b_twice = merge_synonyms(b_once, toy);
    CHECK(b_once.value_pos == b_twice.value_pos);
}

TEST_CASE("category positives of sub-categories flow to the parent") {
    Taxonomy tax = default_taxonomy();
    std::vector<FashionItem> items = {
        make_item("S", "sweatpants", {{"color", {"black"}}}),
        make_item("P", "pants", {{"color", {"red"}}}),
    };
    ValueIndex merged = merge_synonyms(build_index(items), tax);
    CHECK(merged.cat_pos.at("pants") == IdSet{"P", "S"});
    CHECK(merged.cat_pos.at("sweatpants") == IdSet{"S"});
}

TEST_CASE("compute_negatives complements within the attribute universe") {
    Taxonomy tax = toy_taxonomy();
    ValueIndex index = full_index(toy_catalog(), tax);
    CHECK(index.negatives("color", "red") == IdSet{"B", "D"});
    CHECK(index.negatives("color", "blue") == IdSet{"A", "C"});
    CHECK(index.cat_neg.at("shirt") == IdSet{"C", "D"});

    // value positive on the whole universe has an empty complement
    std::vector<FashionItem> all_red = {
        make_item("A", "shirt", {{"color", {"red"}}}),
        make_item("B", "dress", {{"color", {"red"}}}),
    };
    ValueIndex red_index = full_index(all_red, tax);
    CHECK(red_index.negatives("color", "red").empty());

    // single labeled image
    std::vector<FashionItem> one = {make_item("A", "shirt", {{"color", {"red"}}})};
    ValueIndex one_index = full_index(one, tax);
    CHECK(one_index.positives("color", "red") == IdSet{"A"});
    CHECK(one_index.negatives("color", "red").empty());
}

TEST_CASE("disjoint union property: P and N partition U") {
    Taxonomy tax = toy_taxonomy();
    for (uint64_t seed = 0; seed < 30; ++seed) {
        ValueIndex index = full_index(random_catalog(seed, 20), tax);
        for (const auto& [key, pos] : index.value_pos) {
            const IdSet& neg = index.negatives(key.first, key.second);
            CHECK(set_intersect(pos, neg).empty());
            CHECK(set_union(pos, neg) == index.universe.at(key.first));
        }
    }
}

TEST_CASE("combine matches the hand-derived toy fixture") {
    Taxonomy tax = toy_taxonomy();
    ValueIndex index = full_index(toy_catalog(), tax);

    ComboSets combo = combine("red", "shirt", index);
    CHECK(combo.pos == IdSet{"A"});
    CHECK(combo.neg == IdSet{"B", "C", "D"});

    // pos intersects to empty when the value has no positives
    ValueIndex padded = index;
    padded.vocab["color"].insert("void");
    padded.value_pos[{"color", "void"}] = {};
    padded.value_neg[{"color", "void"}] = padded.universe.at("color");
    ComboSets empty_pos = combine("void", "shirt", padded);
    CHECK(empty_pos.pos.empty());

    CHECK_THROWS_AS(combine("chartreuse", "shirt", index), RegistryMissError);
    CHECK_THROWS_AS(combine_multi({{"color", "red"}}, "spacesuit", index), RegistryMissError);
}

TEST_CASE("combine equals the truth-table oracle on random catalogs") {
    Taxonomy tax = toy_taxonomy();
    for (uint64_t seed = 100; seed < 150; ++seed) {
        ValueIndex index = full_index(random_catalog(seed, 20), tax);
        for (const auto& [attr, values] : index.vocab)
            for (const auto& v : values)
                for (const auto& cat : index.categories)
                    oracle_check(combine(attr, v, cat, index), index);
    }
}

TEST_CASE("combine_multi: arity-1 reduction and the exhaustive oracle") {
    Taxonomy tax = toy_taxonomy();
    ValueIndex index = full_index(toy_catalog(), tax);
    ComboSets one = combine_multi({{"color", "red"}}, "shirt", index);
    ComboSets ref = combine("red", "shirt", index);
    CHECK(one.pos == ref.pos);
    CHECK(one.neg == ref.neg);

    CHECK_THROWS_AS(combine_multi({{"color", "red"}, {"color", "blue"}}, "shirt", index), Error);

    for (uint64_t seed = 200; seed < 250; ++seed) {
        ValueIndex rand_index = full_index(random_catalog(seed, 20), tax);
        std::vector<ValueKey> keys;
        for (const auto& [attr, values] : rand_index.vocab)
            for (const auto& v : values) keys.push_back({attr, v});
        for (size_t i = 0; i < keys.size(); ++i)
            for (size_t j = i + 1; j < keys.size(); ++j) {
                if (keys[i].first == keys[j].first) continue;
                for (const auto& cat : rand_index.categories)
                    oracle_check(combine_multi({keys[i], keys[j]}, cat, rand_index), rand_index);
            }
        for (const auto& key : keys) // value-only combinations
            oracle_check(combine_multi({key}, "", rand_index), rand_index);
    }
}

TEST_CASE("emit_balanced picks matched yes/no samples") {
    ComboSets combo;
    combo.values = {{"color", "red"}};
    combo.category = "shirt";
    combo.pos = {"p1"};
    combo.neg = {"n1", "n2", "n3"};
    TripletDraft draft{"is this a red shirt?", "is/are", "b1.a1-cat", 1, false};

    auto triplets = emit_balanced(draft, combo, 5, "key", 7);
    REQUIRE(triplets.size() == 2); // k = min(5, 1, 3)
    CHECK(triplets[0].answer == "yes");
    CHECK(triplets[0].image_id == "p1");
    CHECK(triplets[1].answer == "no");

    combo.pos.clear();
    CHECK(emit_balanced(draft, combo, 5, "key", 7).empty());

    combo.pos = {"a", "b", "c", "d"};
    combo.neg = {"e", "f", "g"};
    auto run1 = emit_balanced(draft, combo, 2, "key", 7);
    auto run2 = emit_balanced(draft, combo, 2, "key", 7);
    REQUIRE(run1.size() == run2.size());
    for (size_t i = 0; i < run1.size(); ++i) {
        CHECK(run1[i].image_id == run2[i].image_id);
        CHECK(run1[i].answer == run2[i].answer);
    }
    CHECK_THROWS_AS(emit_balanced(draft, combo, 0, "key", 7), Error);
}

TEST_CASE("image-based classification by the item's own labels") {
    Taxonomy tax = toy_taxonomy();
    std::vector<FashionItem> items = toy_catalog();
    items.push_back(make_item("E", "shirt", {{"pattern", {"striped"}}}));
    ValueIndex index = full_index(items, tax);
    const FashionItem& a = items[0]; // red shirt

    CHECK(image_based_negatives(a, {{"color", "red"}}, "shirt", index) == TriState::yes);
    CHECK(image_based_negatives(a, {{"color", "blue"}}, "shirt", index) == TriState::no);
    // A carries no pattern label at all
    CHECK(image_based_negatives(a, {{"pattern", "striped"}}, "shirt", index) ==
          TriState::unknown);
    CHECK(image_based_negatives(a, {{"color", "red"}}, "dress", index) == TriState::no);

    // synonym closure: a light blue item answers yes to "blue"
    std::vector<FashionItem> blues = {
        make_item("L", "shirt", {{"color", {"light blue"}}}),
        make_item("R", "shirt", {{"color", {"red"}}}),
        make_item("B2", "shirt", {{"color", {"blue"}}}),
    };
    ValueIndex blue_index = full_index(blues, tax);
    CHECK(image_based_negatives(blues[0], {{"color", "blue"}}, "shirt", blue_index) ==
          TriState::yes);
    CHECK(image_based_negatives(blues[2], {{"color", "light blue"}}, "shirt", blue_index) ==
          TriState::no);
}
