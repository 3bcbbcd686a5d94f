#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fvqa/balancer.hpp"
#include "fvqa/ingest.hpp"
#include "fvqa/template_engine.hpp"
#include "fvqa/triplet.hpp"

namespace fvqa {

enum class Strategy { attribute_based, image_based };
const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view s);

struct GenerationConfig {
    uint64_t master_seed = 0;
    double split_ratio = 0.816; // train fraction
    std::map<int, int> tier_weights = {{0, 1}, {1, 6}, {2, 134}};
    int per_question_quota = 134; // yes/no pairs per tier-2 question; lower tiers scale down
    DiversifyPolicy diversify;
    Strategy strategy = Strategy::attribute_based;
    int workers = 1;
    int shard_records = 100000;
    bool enable_decorated_non_binary = false;

    /// Pairs of images requested per question of the given tier:
    /// round(per_question_quota * weight / max weight), at least 1.
    int quota_for_tier(int tier) const;

    void validate() const; // throws ConfigError
    static GenerationConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

/// Deterministic per-image split assignment by keyed hash; no image ever
/// lands in both splits.
std::map<std::string, std::string> split_images(const std::vector<std::string>& image_ids,
                                                double ratio, uint64_t master_seed);

/// One planned binary question: everything needed to emit and to re-render.
struct BinaryQuestionPlan {
    size_t combo_index = 0;
    std::string template_id; // variant id, resolvable via TemplateLibrary::resolve
    std::string question;
    std::string question_type;
    int tier = 0;
    bool noise = false;
    int quota = 0;
    std::string rng_key;
    uint64_t pairs = 0; // min(quota, |pos|, |neg|)
};

struct BinaryPlan {
    std::vector<ComboSets> combos;
    std::vector<BinaryQuestionPlan> questions;
    std::map<int, uint64_t> planned_pairs_by_tier;
};

/// Rebuilds the binding a binary question was rendered with. Used by the
/// emitter and by round-trip checks.
Binding binary_binding(const std::vector<ValueKey>& values, const std::string& category,
                       const Taxonomy& tax);

/// Enumerates combinations with non-empty positive and negative sets,
/// selects applicable templates and diversified variants, renders question
/// text and fixes per-question quotas.
BinaryPlan plan_binary(const ValueIndex& index, const TemplateLibrary& lib, const Taxonomy& tax,
                       const GenerationConfig& config);

struct BinaryGenResult {
    std::vector<Triplet> triplets;
    std::map<int, uint64_t> planned_pairs_by_tier;
};

/// Balanced binary generation (Strategy per config). Split field is left
/// empty; the orchestrator stamps it.
BinaryGenResult generate_binary(const std::vector<FashionItem>& items, const TemplateLibrary& lib,
                                const Taxonomy& tax, const GenerationConfig& config);

/// Open-answer questions per item and labeled attribute; one triplet per
/// acceptable answer.
std::vector<Triplet> generate_non_binary(const std::vector<FashionItem>& items,
                                         const TemplateLibrary& lib, const Taxonomy& tax,
                                         const GenerationConfig& config);

std::vector<std::string> build_vocabulary(const std::vector<Triplet>& triplets);

struct SplitStats {
    uint64_t total = 0;
    uint64_t non_binary = 0;
    uint64_t binary = 0;
    std::map<int, uint64_t> binary_by_tier; // triplet counts
    std::map<std::string, uint64_t> question_types;
    uint64_t noise = 0;
};

struct StatsReport {
    std::map<std::string, SplitStats> splits;
    uint64_t vocabulary_size = 0;
    bool balanced = true;
    uint64_t unbalanced_questions = 0;
    uint64_t total = 0;

    std::string to_json_text() const;
};

struct DatasetBundle {
    std::vector<Triplet> triplets; // canonical order, qids assigned
    std::vector<std::string> vocabulary;
    StatsReport stats;
    std::string config_echo_json;
    std::map<std::string, std::map<int, uint64_t>> planned_pairs; // split -> tier -> pairs
};

/// Full generation: split, generate both answer types per split, order
/// canonically, assign qids, build vocabulary and statistics.
DatasetBundle generate_dataset(const std::vector<FashionItem>& items, const TemplateLibrary& lib,
                               const Taxonomy& tax, const GenerationConfig& config);

StatsReport compute_stats(const std::vector<Triplet>& triplets, uint64_t vocabulary_size);

/// Per-stratum subsample quotas; key "<split>_<answer_type>", e.g.
/// "train_binary". Strata without a quota are kept whole.
using SubsampleQuotas = std::map<std::string, uint64_t>;

/// Uniform without-replacement subsample per stratum. Binary triplets are
/// sampled as yes/no pairs so per-question balance survives. Quotas above
/// availability clamp with a warning.
DatasetBundle subsample(const DatasetBundle& bundle, const SubsampleQuotas& quotas, uint64_t seed,
                        std::vector<std::string>* warnings = nullptr);

} // namespace fvqa
