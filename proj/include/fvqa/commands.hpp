#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fvqa/dataset.hpp"

namespace fvqa {

// process exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInternal = 3;

/// One structured log record per line on the diagnostic stream; data outputs
/// never share it.
void log_event(const std::string& level, const std::string& event, const std::string& detail);
void set_verbose_logging(bool on);

struct ValidateOptions {
    std::string taxonomy_path;
    std::string templates_path;
    std::string rules_path;
};

/// Prints one JSON line per diagnostic on stdout; nonzero on any error.
int cmd_validate(const ValidateOptions& opts);

struct IngestOptions {
    std::string catalog_path;
    std::string taxonomy_path;
    std::string rules_path;
    std::string out_dir; // receives items.jsonl + ingest_report.json
};

int cmd_ingest(const IngestOptions& opts);

struct GenerateOptions {
    std::string catalog_path;
    std::string taxonomy_path;
    std::string templates_path;
    std::string rules_path;
    std::string config_path; // optional
    std::string out_dir;
    bool dump_index = false;

    // flag overrides; unset means "keep config value"
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> strategy;
    std::optional<double> split_ratio;
    std::optional<int> quota;
    std::optional<std::string> tier_weights; // "2=134,1=6,0=1"
};

int cmd_generate(const GenerateOptions& opts);

struct SubsampleOptions {
    std::string in_dir;
    std::string out_dir;
    std::string quotas; // "train_non_binary=110,train_binary=90,..."
    uint64_t seed = 0;
};

int cmd_subsample(const SubsampleOptions& opts);

struct StatsOptions {
    std::string in_dir;
    std::string out_path; // empty -> stdout
};

int cmd_stats(const StatsOptions& opts);

struct SampleOptions {
    std::string in_dir;
    uint64_t n = 10;
    uint64_t seed = 0;
};

int cmd_sample(const SampleOptions& opts);

struct ScoreOptions {
    std::string in_dir;
    std::string predictions_path;
    std::string split = "val";
    std::string out_path; // empty -> stdout
};

int cmd_score(const ScoreOptions& opts);

/// Resolves the effective generation config from file plus flag overrides.
GenerationConfig effective_config(const GenerateOptions& opts);

} // namespace fvqa
