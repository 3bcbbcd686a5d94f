#include "fvqa/metrics.hpp"

#include <fstream>

#include <json.hpp>

#include "fvqa/taxonomy.hpp" // canonicalize

namespace fvqa {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<Prediction> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open predictions file: " + path);
    std::vector<Prediction> out;
    std::set<std::string> seen;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw InputError("predictions line " + std::to_string(line_no) + ": " + e.what());
        }
        Prediction p;
        p.qid = doc.value("qid", "");
        p.predicted_answer = doc.value("predicted_answer", "");
        if (p.qid.empty())
            throw InputError("predictions line " + std::to_string(line_no) + ": missing qid");
        if (!seen.insert(p.qid).second)
            throw InputError("duplicate qid in predictions: " + p.qid);
        out.push_back(std::move(p));
    }
    return out;
}

ScoreReport score(const std::vector<Prediction>& predictions, const DatasetBundle& bundle,
                  const std::string& split) {
    std::map<std::string, const Triplet*> gold;
    for (const auto& t : bundle.triplets)
        if (t.split == split) gold[t.qid] = &t;

    std::map<std::string, std::string> predicted;
    std::vector<std::string> unknown;
    for (const auto& p : predictions) {
        if (!gold.count(p.qid)) {
            unknown.push_back(p.qid);
            continue;
        }
        if (!predicted.emplace(p.qid, canonicalize(p.predicted_answer)).second)
            throw InputError("duplicate qid in predictions: " + p.qid);
    }
    if (!unknown.empty()) {
        std::string msg = "predictions reference qids outside split '" + split + "':";
        for (size_t i = 0; i < unknown.size() && i < 10; ++i) msg += " " + unknown[i];
        if (unknown.size() > 10) msg += " (+" + std::to_string(unknown.size() - 10) + " more)";
        throw InputError(msg);
    }

    ScoreReport report;
    report.split = split;
    for (const auto& [qid, t] : gold) {
        bool correct = false;
        auto it = predicted.find(qid);
        if (it == predicted.end())
            ++report.missing_predictions;
        else
            correct = it->second == canonicalize(t->answer);

        auto tally = [&](ScoreCell& cell) {
            ++cell.n;
            if (correct) ++cell.correct;
        };
        tally(report.overall);
        tally(t->answer_type == "binary" ? report.binary : report.non_binary);
        if (t->answer_type == "binary") tally(report.per_tier[t->tier]);
        tally(report.per_question_type[t->question_type]);
    }
    return report;
}

std::string ScoreReport::to_json_text() const {
    auto cell = [](const ScoreCell& c) {
        return ordered_json{{"n", c.n}, {"correct", c.correct}, {"accuracy", c.accuracy()}};
    };
    ordered_json d;
    d["schema_version"] = 1;
    d["split"] = split;
    d["top1"] = {{"all", cell(overall)}, {"non_binary", cell(non_binary)}, {"binary", cell(binary)}};
    ordered_json tiers = ordered_json::object();
    for (const auto& [tier, c] : per_tier) tiers[std::to_string(tier)] = cell(c);
    d["per_tier"] = tiers;
    ordered_json qt = ordered_json::object();
    for (const auto& [name, c] : per_question_type) qt[name] = cell(c);
    d["per_question_type"] = qt;
    d["missing_predictions"] = missing_predictions;
    return d.dump(2) + "\n";
}

} // namespace fvqa
