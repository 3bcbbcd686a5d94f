#include "fvqa/dataset.hpp"

#include <algorithm>
#include <thread>

#include <json.hpp>

#include "fvqa/rng.hpp"
#include "fvqa/version.hpp"

namespace fvqa {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* to_string(Strategy s) {
    return s == Strategy::attribute_based ? "attribute_based" : "image_based";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
    if (s == "attribute_based" || s == "attribute") return Strategy::attribute_based;
    if (s == "image_based" || s == "image") return Strategy::image_based;
    return std::nullopt;
}

int GenerationConfig::quota_for_tier(int tier) const {
    auto it = tier_weights.find(tier);
    if (it == tier_weights.end()) return 0;
    int w_max = 1;
    for (const auto& [_, w] : tier_weights) w_max = std::max(w_max, w);
    long scaled = (static_cast<long>(per_question_quota) * it->second + w_max / 2) / w_max;
    return std::max(1, static_cast<int>(scaled));
}

void GenerationConfig::validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
        throw ConfigError("split_ratio must lie strictly inside (0, 1)");
    if (per_question_quota < 1) throw ConfigError("per_question_quota must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (shard_records < 1) throw ConfigError("shard_records must be >= 1");
    for (const auto& [tier, w] : tier_weights) {
        if (tier < 0 || tier > 2) throw ConfigError("tier_weights keys must be 0, 1 or 2");
        if (w <= 0) throw ConfigError("tier weights must be positive");
    }
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    prob(diversify.drop_phrase_prob, "drop_phrase_prob");
    prob(diversify.truncate_prob, "truncate_prob");
    prob(diversify.agreement_noise_prob, "agreement_noise_prob");
}

GenerationConfig GenerationConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    GenerationConfig cfg;
    cfg.master_seed = doc.value("master_seed", 0ULL);
    cfg.split_ratio = doc.value("split_ratio", 0.816);
    if (doc.contains("tier_weights")) {
        cfg.tier_weights.clear();
        for (auto it = doc["tier_weights"].begin(); it != doc["tier_weights"].end(); ++it)
            cfg.tier_weights[std::stoi(it.key())] = it.value().get<int>();
    }
    cfg.per_question_quota = doc.value("per_question_quota", 134);
    if (doc.contains("strategy")) {
        auto s = strategy_from_string(doc["strategy"].get<std::string>());
        if (!s) throw ConfigError("unknown strategy: " + doc["strategy"].get<std::string>());
        cfg.strategy = *s;
    }
    cfg.workers = doc.value("workers", 1);
    cfg.shard_records = doc.value("shard_records", 100000);
    cfg.enable_decorated_non_binary = doc.value("enable_decorated_non_binary", false);
    if (doc.contains("diversify")) {
        const auto& d = doc["diversify"];
        cfg.diversify.drop_phrase_prob = d.value("drop_phrase_prob", 0.10);
        cfg.diversify.truncate_prob = d.value("truncate_prob", 0.05);
        cfg.diversify.agreement_noise_prob = d.value("agreement_noise_prob", 0.02);
        if (d.contains("conjunction_alternatives")) {
            cfg.diversify.conjunction_alternatives.clear();
            for (const auto& c : d["conjunction_alternatives"])
                cfg.diversify.conjunction_alternatives.push_back(c.get<std::string>());
        }
        cfg.diversify.rng_seed = d.value("rng_seed", cfg.master_seed);
    } else {
        cfg.diversify.rng_seed = cfg.master_seed;
    }
    return cfg;
}

std::string GenerationConfig::to_json_text() const {
    ordered_json d;
    d["schema_version"] = 1;
    d["tool_version"] = kToolVersion;
    d["master_seed"] = master_seed;
    d["split_ratio"] = split_ratio;
    ordered_json weights = ordered_json::object();
    for (const auto& [tier, w] : tier_weights) weights[std::to_string(tier)] = w;
    d["tier_weights"] = weights;
    d["per_question_quota"] = per_question_quota;
    d["strategy"] = to_string(strategy);
    d["workers"] = workers;
    d["shard_records"] = shard_records;
    d["enable_decorated_non_binary"] = enable_decorated_non_binary;
    d["diversify"] = {{"drop_phrase_prob", diversify.drop_phrase_prob},
                      {"truncate_prob", diversify.truncate_prob},
                      {"agreement_noise_prob", diversify.agreement_noise_prob},
                      {"conjunction_alternatives", diversify.conjunction_alternatives},
                      {"rng_seed", diversify.rng_seed}};
    return d.dump(2) + "\n";
}

std::map<std::string, std::string> split_images(const std::vector<std::string>& image_ids,
                                                double ratio, uint64_t master_seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigError("split ratio must lie strictly inside (0, 1)");
    std::map<std::string, std::string> out;
    for (const auto& id : image_ids) {
        SplitMix64 rng = rng_for(master_seed, "split|" + id);
        out[id] = rng.uniform() < ratio ? "train" : "val";
    }
    return out;
}

namespace {

std::string combo_key(const std::vector<ValueKey>& values, const std::string& category) {
    std::string key;
    for (const auto& [attr, value] : values) {
        if (!key.empty()) key += "&";
        key += "v=" + attr + ":" + value;
    }
    if (!category.empty()) {
        if (!key.empty()) key += "&";
        key += "c=" + category;
    }
    return key;
}

// Runs fn(begin, end, chunk) over [0, n) split into `workers` slices. Slice
// boundaries depend only on (n, workers); callers merge results in slice
// order so output is schedule-independent.
template <typename Fn>
void run_chunks(size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    size_t w = std::max(1, workers);
    size_t chunk = (n + w - 1) / w;
    if (w == 1) {
        fn(size_t{0}, n, size_t{0});
        return;
    }
    std::vector<std::thread> threads;
    for (size_t i = 0; i < w; ++i) {
        size_t begin = i * chunk;
        size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&fn, begin, end, i] { fn(begin, end, i); });
    }
    for (auto& t : threads) t.join();
}

AgreementBundle category_free_agreement() {
    AgreementBundle b;
    b.copula = "is";
    b.demonstrative = "this";
    b.plural = false;
    return b;
}

} // namespace

Binding binary_binding(const std::vector<ValueKey>& values, const std::string& category,
                       const Taxonomy& tax) {
    Binding b;
    b.attr_values = values;
    if (!category.empty()) {
        const Category& cat = tax.category(category);
        b.category = &cat;
        // combination questions are image-independent, so they use the
        // nominal single-item agreement; plural surfaces only as noise
        b.agreement = agreement_forms(cat, 1);
        b.location = cat.default_location;
    } else {
        b.agreement = category_free_agreement();
    }
    return b;
}

BinaryPlan plan_binary(const ValueIndex& index, const TemplateLibrary& lib, const Taxonomy& tax,
                       const GenerationConfig& config) {
    if (!index.negatives_ready) throw Error("plan_binary needs a merged index with negatives");
    BinaryPlan plan;

    auto add_questions = [&](const ComboSets& combo, int tier,
                             const std::vector<QuestionTemplate>& templates) {
        if (combo.pos.empty() || combo.neg.empty() || templates.empty()) return;
        size_t combo_idx = plan.combos.size();
        plan.combos.push_back(combo);
        int quota = config.quota_for_tier(tier);
        std::string key = combo_key(combo.values, combo.category);
        Binding binding = binary_binding(combo.values, combo.category, tax);
        uint64_t cap = std::min(combo.pos.size(), combo.neg.size());
        for (const auto& base : templates) {
            for (const auto& variant : diversify(base, config.diversify, key)) {
                BinaryQuestionPlan q;
                q.combo_index = combo_idx;
                q.template_id = variant.template_id;
                q.question = render(variant, binding);
                q.question_type = variant.question_type;
                q.tier = tier;
                q.noise = variant.agreement_noise;
                q.quota = quota;
                q.rng_key = variant.template_id + "|" + key;
                q.pairs = std::min<uint64_t>(quota, cap);
                plan.planned_pairs_by_tier[tier] += q.pairs;
                plan.questions.push_back(std::move(q));
            }
        }
    };

    // tier 0: one category
    for (const auto& cat_name : index.categories) {
        const Category* cat = tax.find_category(cat_name);
        if (!cat) continue;
        ComboSets combo = combine_multi({}, cat_name, index);
        add_questions(combo, 0, lib.binary_templates(0, {}, cat, tax));
    }

    // tier 1: one attribute value, with and without a category
    std::map<std::string, std::vector<ValueKey>> eligible_by_attr;
    for (const auto& [attr_name, values] : index.vocab) {
        const Attribute* attr = tax.find_attribute(attr_name);
        if (!attr || !attr->in_binary) continue;
        for (const auto& v : values) eligible_by_attr[attr_name].push_back({attr_name, v});
    }
    for (const auto& [attr_name, keys] : eligible_by_attr)
        for (const auto& vk : keys) {
            ComboSets combo = combine_multi({vk}, "", index);
            add_questions(combo, 1, lib.binary_templates(1, {attr_name}, nullptr, tax));
        }

    for (const auto& cat_name : index.categories) {
        const Category* cat = tax.find_category(cat_name);
        if (!cat) continue;
        auto cat_pos_it = index.cat_pos.find(cat_name);
        if (cat_pos_it == index.cat_pos.end() || cat_pos_it->second.empty()) continue;

        // values that co-occur with this category, after synonym merging
        struct Local {
            ValueKey key;
            IdSet pos_with_cat;
        };
        std::vector<Local> locals;
        for (const auto& [attr_name, keys] : eligible_by_attr) {
            const Attribute& attr = tax.attribute(attr_name);
            if (!attr.applicable_supers.count(cat->super)) continue;
            for (const auto& vk : keys) {
                IdSet pc = set_intersect(index.positives(vk.first, vk.second), cat_pos_it->second);
                if (!pc.empty()) locals.push_back({vk, std::move(pc)});
            }
        }

        for (const auto& local : locals) {
            ComboSets combo = combine_multi({local.key}, cat_name, index);
            add_questions(combo, 1, lib.binary_templates(1, {local.key.first}, cat, tax));
        }

        // tier 2: two values from distinct attributes plus the category
        for (size_t i = 0; i < locals.size(); ++i)
            for (size_t j = i + 1; j < locals.size(); ++j) {
                if (locals[i].key.first == locals[j].key.first) continue;
                if (set_intersect(locals[i].pos_with_cat, locals[j].pos_with_cat).empty()) continue;
                ComboSets combo =
                    combine_multi({locals[i].key, locals[j].key}, cat_name, index);
                add_questions(combo, 2,
                              lib.binary_templates(
                                  2, {locals[i].key.first, locals[j].key.first}, cat, tax));
            }
    }
    return plan;
}

namespace {

std::vector<Triplet> emit_plan(const BinaryPlan& plan, const GenerationConfig& config) {
    std::vector<std::vector<Triplet>> chunks(
        static_cast<size_t>(std::max(1, config.workers)));
    run_chunks(plan.questions.size(), config.workers, [&](size_t begin, size_t end, size_t slot) {
        auto& out = chunks[slot];
        for (size_t i = begin; i < end; ++i) {
            const BinaryQuestionPlan& q = plan.questions[i];
            TripletDraft draft{q.question, q.question_type, q.template_id, q.tier, q.noise};
            auto emitted = emit_balanced(draft, plan.combos[q.combo_index], q.quota, q.rng_key,
                                         config.master_seed);
            out.insert(out.end(), std::make_move_iterator(emitted.begin()),
                       std::make_move_iterator(emitted.end()));
        }
    });
    std::vector<Triplet> out;
    for (auto& c : chunks)
        out.insert(out.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
    return out;
}

// Image-based alternative: the image stays fixed and one constituent of the
// question is perturbed to build the negative. Pairs are balanced per image;
// per-question balance is only approximate under this strategy.
BinaryGenResult generate_binary_image_based(const std::vector<FashionItem>& items,
                                            const ValueIndex& index, const TemplateLibrary& lib,
                                            const Taxonomy& tax, const GenerationConfig& config) {
    std::vector<std::vector<Triplet>> chunks(
        static_cast<size_t>(std::max(1, config.workers)));
    std::vector<std::map<int, uint64_t>> pair_counts(chunks.size());

    run_chunks(items.size(), config.workers, [&](size_t begin, size_t end, size_t slot) {
        auto& out = chunks[slot];
        auto& pairs = pair_counts[slot];
        for (size_t item_idx = begin; item_idx < end; ++item_idx) {
            const FashionItem& item = items[item_idx];
            const Category* cat = tax.find_category(item.category);
            if (!cat) continue;

            std::vector<ValueKey> labels;
            for (const auto& [attr_name, values] : item.values) {
                const Attribute* attr = tax.find_attribute(attr_name);
                if (!attr || !attr->in_binary || !attr->applicable_supers.count(cat->super))
                    continue;
                for (const auto& v : values) labels.push_back({attr_name, v});
            }

            std::map<int, std::vector<std::vector<ValueKey>>> combos;
            combos[0].push_back({});
            for (const auto& l : labels) combos[1].push_back({l});
            for (size_t i = 0; i < labels.size(); ++i)
                for (size_t j = i + 1; j < labels.size(); ++j)
                    if (labels[i].first != labels[j].first)
                        combos[2].push_back({labels[i], labels[j]});

            for (auto& [tier, tier_combos] : combos) {
                if (tier_combos.empty()) continue;
                SplitMix64 pick_rng = rng_for(config.master_seed, "ib|" + item.image_id +
                                                                      "|tier" +
                                                                      std::to_string(tier));
                size_t want = std::min<size_t>(tier_combos.size(),
                                               static_cast<size_t>(config.quota_for_tier(tier)));
                for (size_t ci : sample_indices(pick_rng, tier_combos.size(), want)) {
                    const auto& values = tier_combos[ci];
                    std::vector<std::string> attrs;
                    for (const auto& [a, _] : values) attrs.push_back(a);
                    auto templates = lib.binary_templates(tier == 0 ? 0 : static_cast<int>(
                                                                              values.size()),
                                                          attrs, cat, tax);
                    if (templates.empty()) continue;
                    std::string key = combo_key(values, item.category) + "|" + item.image_id;
                    SplitMix64 rng = rng_for(config.master_seed, "ibq|" + key);
                    const QuestionTemplate& base = templates[rng.bounded(templates.size())];
                    auto variants = diversify(base, config.diversify, key);
                    const QuestionTemplate& variant = variants[rng.bounded(variants.size())];

                    Binding binding;
                    binding.category = cat;
                    binding.attr_values = values;
                    binding.agreement = agreement_forms(*cat, item.piece_count);
                    binding.location = tax.location_for(*cat, item.has_person);

                    // perturb one constituent into a verified negative
                    size_t constituents = values.size() + 1;
                    size_t which = static_cast<size_t>(rng.bounded(constituents));
                    std::vector<ValueKey> neg_values = values;
                    std::string neg_category = item.category;
                    bool found = false;
                    if (which < values.size()) {
                        const auto& [attr_name, value] = values[which];
                        const auto& vocab = index.vocab.at(attr_name);
                        std::vector<std::string> candidates(vocab.begin(), vocab.end());
                        size_t start = static_cast<size_t>(rng.bounded(candidates.size()));
                        for (size_t k = 0; k < candidates.size() && !found; ++k) {
                            const std::string& u = candidates[(start + k) % candidates.size()];
                            if (u == value) continue;
                            neg_values[which] = {attr_name, u};
                            found = image_based_negatives(item, neg_values, neg_category, index) ==
                                    TriState::no;
                        }
                    } else {
                        std::vector<std::string> candidates(index.categories.begin(),
                                                            index.categories.end());
                        size_t start = static_cast<size_t>(rng.bounded(candidates.size()));
                        for (size_t k = 0; k < candidates.size() && !found; ++k) {
                            const std::string& u = candidates[(start + k) % candidates.size()];
                            if (u == item.category || !tax.find_category(u)) continue;
                            neg_category = u;
                            found = image_based_negatives(item, neg_values, neg_category, index) ==
                                    TriState::no;
                        }
                    }
                    if (!found) continue; // no usable negative; skip the pair to stay balanced

                    auto emit = [&](const std::vector<ValueKey>& vals, const std::string& cname,
                                    const char* answer) {
                        Binding b = binding;
                        b.attr_values = vals;
                        const Category* c2 = tax.find_category(cname);
                        if (!c2) return false;
                        b.category = c2;
                        Triplet t;
                        t.image_id = item.image_id;
                        t.question = render(variant, b);
                        t.answer = answer;
                        t.answer_type = "binary";
                        t.question_type = variant.question_type;
                        t.template_id = variant.template_id;
                        t.tier = tier;
                        t.noise = variant.agreement_noise;
                        out.push_back(std::move(t));
                        return true;
                    };
                    if (emit(values, item.category, "yes") && emit(neg_values, neg_category, "no"))
                        ++pairs[tier];
                }
            }
        }
    });

    BinaryGenResult result;
    for (size_t i = 0; i < chunks.size(); ++i) {
        result.triplets.insert(result.triplets.end(),
                               std::make_move_iterator(chunks[i].begin()),
                               std::make_move_iterator(chunks[i].end()));
        for (const auto& [tier, n] : pair_counts[i]) result.planned_pairs_by_tier[tier] += n;
    }
    return result;
}

} // namespace

BinaryGenResult generate_binary(const std::vector<FashionItem>& items, const TemplateLibrary& lib,
                                const Taxonomy& tax, const GenerationConfig& config) {
    ValueIndex index = compute_negatives(merge_synonyms(build_index(items), tax));
    if (config.strategy == Strategy::image_based)
        return generate_binary_image_based(items, index, lib, tax, config);

    BinaryPlan plan = plan_binary(index, lib, tax, config);
    BinaryGenResult result;
    result.triplets = emit_plan(plan, config);
    result.planned_pairs_by_tier = plan.planned_pairs_by_tier;
    return result;
}

std::vector<Triplet> generate_non_binary(const std::vector<FashionItem>& items,
                                         const TemplateLibrary& lib, const Taxonomy& tax,
                                         const GenerationConfig& config) {
    std::vector<std::vector<Triplet>> chunks(
        static_cast<size_t>(std::max(1, config.workers)));
    run_chunks(items.size(), config.workers, [&](size_t begin, size_t end, size_t slot) {
        auto& out = chunks[slot];
        for (size_t i = begin; i < end; ++i) {
            const FashionItem& item = items[i];
            const Category* cat = tax.find_category(item.category);
            if (!cat) continue;
            auto location = tax.location_for(*cat, item.has_person);
            AgreementBundle agreement = agreement_forms(*cat, item.piece_count);

            for (const auto& [attr_name, values] : item.values) {
                if (values.empty()) continue;
                auto templates =
                    lib.templates_for(attr_name, *cat, AnswerType::non_binary, tax);
                for (const auto& base : templates) {
                    if (base.decorated && !config.enable_decorated_non_binary) continue;
                    if (base.requires_location && !location) continue;
                    std::string key = "nb|" + item.image_id + "|" + attr_name;
                    for (const auto& variant : diversify(base, config.diversify, key)) {
                        Binding binding;
                        binding.category = cat;
                        binding.agreement = agreement;
                        binding.location = location;
                        binding.attribute_display = attr_name;
                        constexpr std::string_view kCountPrefix = "number of ";
                        if (attr_name.rfind(kCountPrefix, 0) == 0)
                            binding.part = attr_name.substr(kCountPrefix.size());

                        if (variant.has_slot(Slot::attr1)) {
                            // decoration: one value from a different attribute
                            std::vector<ValueKey> others;
                            for (const auto& [a2, vals2] : item.values)
                                if (a2 != attr_name)
                                    for (const auto& v2 : vals2) others.push_back({a2, v2});
                            if (others.empty()) continue;
                            SplitMix64 rng = rng_for(config.master_seed, "decorate|" + key);
                            binding.attr_values = {others[rng.bounded(others.size())]};
                        }

                        std::string question = render(variant, binding);
                        for (const auto& value : values) {
                            Triplet t;
                            t.image_id = item.image_id;
                            t.question = question;
                            t.answer = value;
                            t.answer_type = "non_binary";
                            t.question_type = variant.question_type;
                            t.template_id = variant.template_id;
                            t.tier = -1;
                            t.noise = variant.agreement_noise;
                            out.push_back(std::move(t));
                        }
                    }
                }
            }
        }
    });
    std::vector<Triplet> out;
    for (auto& c : chunks)
        out.insert(out.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
    return out;
}

std::vector<std::string> build_vocabulary(const std::vector<Triplet>& triplets) {
    std::set<std::string> answers;
    bool any_binary = false;
    for (const auto& t : triplets) {
        answers.insert(t.answer);
        any_binary = any_binary || t.answer_type == "binary";
    }
    if (any_binary) {
        answers.insert("yes");
        answers.insert("no");
    }
    return {answers.begin(), answers.end()};
}

StatsReport compute_stats(const std::vector<Triplet>& triplets, uint64_t vocabulary_size) {
    StatsReport report;
    report.vocabulary_size = vocabulary_size;
    report.total = triplets.size();
    std::map<std::string, std::pair<uint64_t, uint64_t>> balance; // question -> (yes, no)
    for (const auto& t : triplets) {
        SplitStats& s = report.splits[t.split];
        ++s.total;
        ++s.question_types[t.question_type];
        if (t.noise) ++s.noise;
        if (t.answer_type == "binary") {
            ++s.binary;
            ++s.binary_by_tier[t.tier];
            auto& [yes, no] = balance[t.question];
            t.answer == "yes" ? ++yes : ++no;
        } else {
            ++s.non_binary;
        }
    }
    for (const auto& [_, counts] : balance)
        if (counts.first != counts.second) ++report.unbalanced_questions;
    report.balanced = report.unbalanced_questions == 0;
    return report;
}

std::string StatsReport::to_json_text() const {
    ordered_json d;
    d["schema_version"] = 1;
    d["total"] = total;
    ordered_json splits_json = ordered_json::object();
    for (const auto& [name, s] : splits) {
        ordered_json sj;
        sj["total"] = s.total;
        sj["non_binary"] = s.non_binary;
        sj["binary"] = s.binary;
        ordered_json tiers = ordered_json::object();
        for (const auto& [tier, n] : s.binary_by_tier) tiers[std::to_string(tier)] = n;
        sj["binary_by_tier"] = tiers;
        ordered_json qt = ordered_json::object();
        for (const auto& [name2, n] : s.question_types) qt[name2] = n;
        sj["question_types"] = qt;
        sj["noise"] = s.noise;
        splits_json[name] = sj;
    }
    d["splits"] = splits_json;
    d["vocabulary_size"] = vocabulary_size;
    d["balance"] = {{"balanced", balanced}, {"unbalanced_questions", unbalanced_questions}};
    return d.dump(2) + "\n";
}

DatasetBundle generate_dataset(const std::vector<FashionItem>& items, const TemplateLibrary& lib,
                               const Taxonomy& tax, const GenerationConfig& config) {
    config.validate();

    std::vector<std::string> image_ids;
    image_ids.reserve(items.size());
    for (const auto& item : items) image_ids.push_back(item.image_id);
    auto assignment = split_images(image_ids, config.split_ratio, config.master_seed);

    DatasetBundle bundle;
    for (const std::string split : {"train", "val"}) {
        std::vector<FashionItem> split_items;
        for (const auto& item : items)
            if (assignment.at(item.image_id) == split) split_items.push_back(item);

        auto non_binary = generate_non_binary(split_items, lib, tax, config);
        auto binary = generate_binary(split_items, lib, tax, config);
        for (auto& t : non_binary) t.split = split;
        for (auto& t : binary.triplets) t.split = split;
        bundle.planned_pairs[split] = binary.planned_pairs_by_tier;
        bundle.triplets.insert(bundle.triplets.end(),
                               std::make_move_iterator(non_binary.begin()),
                               std::make_move_iterator(non_binary.end()));
        bundle.triplets.insert(bundle.triplets.end(),
                               std::make_move_iterator(binary.triplets.begin()),
                               std::make_move_iterator(binary.triplets.end()));
    }

    std::stable_sort(bundle.triplets.begin(), bundle.triplets.end(), triplet_less);
    char qid[24];
    for (size_t i = 0; i < bundle.triplets.size(); ++i) {
        std::snprintf(qid, sizeof(qid), "t%09zu", i + 1);
        bundle.triplets[i].qid = qid;
    }
    bundle.vocabulary = build_vocabulary(bundle.triplets);
    bundle.stats = compute_stats(bundle.triplets, bundle.vocabulary.size());
    bundle.config_echo_json = config.to_json_text();
    return bundle;
}

DatasetBundle subsample(const DatasetBundle& bundle, const SubsampleQuotas& quotas, uint64_t seed,
                        std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };
    std::vector<bool> keep(bundle.triplets.size(), true);

    for (const std::string split : {"train", "val"}) {
        for (const std::string answer_type : {"non_binary", "binary"}) {
            std::vector<size_t> members;
            for (size_t i = 0; i < bundle.triplets.size(); ++i)
                if (bundle.triplets[i].split == split &&
                    bundle.triplets[i].answer_type == answer_type)
                    members.push_back(i);

            auto quota_it = quotas.find(split + "_" + answer_type);
            if (quota_it == quotas.end()) continue; // stratum kept whole
            uint64_t quota = quota_it->second;

            if (answer_type == "non_binary") {
                if (quota >= members.size()) {
                    if (quota > members.size())
                        warn("quota " + std::to_string(quota) + " for " + quota_it->first +
                             " clamped to " + std::to_string(members.size()));
                    continue;
                }
                for (size_t i : members) keep[i] = false;
                SplitMix64 rng = rng_for(seed, "subsample|" + split + "|non_binary");
                for (size_t pick : sample_indices(rng, members.size(), quota))
                    keep[members[pick]] = true;
            } else {
                // canonical order interleaves (question, no*) before
                // (question, yes*); pair the i-th no with the i-th yes
                std::vector<std::pair<size_t, size_t>> pairs;
                size_t run_begin = 0;
                auto flush_run = [&](size_t run_end) {
                    std::vector<size_t> nos, yeses;
                    for (size_t k = run_begin; k < run_end; ++k) {
                        const Triplet& t = bundle.triplets[members[k]];
                        (t.answer == "yes" ? yeses : nos).push_back(members[k]);
                    }
                    size_t paired = std::min(nos.size(), yeses.size());
                    if (nos.size() != yeses.size())
                        warn("unbalanced question dropped from pair pool: " +
                             bundle.triplets[members[run_begin]].question);
                    for (size_t k = 0; k < paired; ++k) pairs.push_back({nos[k], yeses[k]});
                };
                for (size_t k = 1; k <= members.size(); ++k) {
                    if (k == members.size() ||
                        bundle.triplets[members[k]].question !=
                            bundle.triplets[members[run_begin]].question ||
                        bundle.triplets[members[k]].template_id !=
                            bundle.triplets[members[run_begin]].template_id) {
                        flush_run(k);
                        run_begin = k;
                    }
                }

                uint64_t want_pairs = quota / 2;
                if (quota % 2 != 0)
                    warn("odd binary quota " + std::to_string(quota) + " rounded down to " +
                         std::to_string(want_pairs * 2));
                if (want_pairs >= pairs.size()) {
                    if (want_pairs > pairs.size())
                        warn("quota " + std::to_string(quota) + " for " + quota_it->first +
                             " clamped to " + std::to_string(pairs.size() * 2));
                    continue;
                }
                for (size_t i : members) keep[i] = false;
                SplitMix64 rng = rng_for(seed, "subsample|" + split + "|binary");
                for (size_t pick : sample_indices(rng, pairs.size(), want_pairs)) {
                    keep[pairs[pick].first] = true;
                    keep[pairs[pick].second] = true;
                }
            }
        }
    }

    DatasetBundle out;
    for (size_t i = 0; i < bundle.triplets.size(); ++i)
        if (keep[i]) out.triplets.push_back(bundle.triplets[i]);
    out.vocabulary = build_vocabulary(out.triplets);
    out.stats = compute_stats(out.triplets, out.vocabulary.size());

    json echo;
    try {
        echo["source_config"] = json::parse(bundle.config_echo_json);
    } catch (const json::exception&) {
        echo["source_config"] = nullptr;
    }
    json quota_json;
    for (const auto& [k, v] : quotas) quota_json[k] = v;
    echo["subsample"] = {{"seed", seed}, {"quotas", quota_json}};
    out.config_echo_json = echo.dump(2) + "\n";
    return out;
}

} // namespace fvqa
