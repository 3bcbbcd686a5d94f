#pragma once

#include <map>
#include <string>
#include <vector>

#include "fvqa/dataset.hpp"

namespace fvqa {

struct Prediction {
    std::string qid;
    std::string predicted_answer;
};

struct ScoreCell {
    uint64_t n = 0;
    uint64_t correct = 0;
    double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / n; }
};

/// Top-1 accuracy over a split, broken out by answer type, difficulty tier
/// and question type.
struct ScoreReport {
    std::string split;
    ScoreCell overall;
    ScoreCell non_binary;
    ScoreCell binary;
    std::map<int, ScoreCell> per_tier;
    std::map<std::string, ScoreCell> per_question_type;
    uint64_t missing_predictions = 0; // counted as wrong, tallied separately

    std::string to_json_text() const;
};

/// Parses line-delimited {"qid", "predicted_answer"} records. Throws
/// InputError on malformed lines or duplicate qids.
std::vector<Prediction> load_predictions(const std::string& path);

/// Exact-string match after lowercase/trim normalization. Unknown qids are an
/// input error listing the offenders; gold records without a prediction count
/// as wrong.
ScoreReport score(const std::vector<Prediction>& predictions, const DatasetBundle& bundle,
                  const std::string& split);

} // namespace fvqa
