#include "fvqa/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "fvqa/io.hpp"
#include "fvqa/metrics.hpp"
#include "fvqa/rng.hpp"
#include "fvqa/version.hpp"

namespace fvqa {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

bool g_verbose = false;

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw InputError(std::string("cannot open ") + what + ": " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_diagnostics(const Diagnostics& diags) {
    for (const auto& d : diags) {
        ordered_json j;
        j["level"] = d.level == Diagnostic::Level::error ? "error" : "warning";
        j["code"] = d.code;
        j["message"] = d.message;
        std::cout << j.dump() << "\n";
    }
}

struct LoadedInputs {
    Taxonomy taxonomy;
    TemplateLibrary templates;
    NormalizationRules rules;
    Diagnostics diags;
};

LoadedInputs load_inputs(const std::string& taxonomy_path, const std::string& templates_path,
                         const std::string& rules_path) {
    LoadedInputs in;
    in.taxonomy = Taxonomy::load_file(taxonomy_path, in.diags);
    if (!templates_path.empty()) in.templates = TemplateLibrary::load_file(templates_path, in.diags);
    if (!rules_path.empty())
        in.rules = NormalizationRules::load_file(rules_path, in.taxonomy, in.diags);
    return in;
}

} // namespace

void set_verbose_logging(bool on) { g_verbose = on; }

void log_event(const std::string& level, const std::string& event, const std::string& detail) {
    if (level == "debug" && !g_verbose) return;
    ordered_json j;
    j["level"] = level;
    j["event"] = event;
    if (!detail.empty()) j["detail"] = detail;
    std::cerr << j.dump() << "\n";
}

int cmd_validate(const ValidateOptions& opts) {
    LoadedInputs in = load_inputs(opts.taxonomy_path, opts.templates_path, opts.rules_path);
    print_diagnostics(in.diags);
    if (has_errors(in.diags)) {
        log_event("error", "validate.failed",
                  std::to_string(in.diags.size()) + " diagnostics reported");
        return kExitValidation;
    }
    log_event("info", "validate.ok", "");
    return kExitOk;
}

namespace {

std::string ingest_report_json(const IngestReport& report) {
    ordered_json d;
    d["schema_version"] = 1;
    d["records_read"] = report.records_read;
    d["accepted"] = report.accepted;
    ordered_json rejected = ordered_json::object();
    for (const auto& [reason, n] : report.rejected) rejected[to_string(reason)] = n;
    d["rejected"] = rejected;
    ordered_json dropped = ordered_json::object();
    for (const auto& [reason, n] : report.dropped_values) dropped[to_string(reason)] = n;
    d["dropped_values"] = dropped;
    d["has_person_defaulted"] = report.has_person_defaulted;
    return d.dump(2) + "\n";
}

IngestResult run_ingest(const std::string& catalog_path, const Taxonomy& tax,
                        const NormalizationRules& rules) {
    IngestResult result = ingest_catalog_file(catalog_path, rules, tax);
    for (const auto& rej : result.rejects)
        log_event("debug", "ingest.reject",
                  rej.item_id + "/" + rej.image_id + ": " + to_string(rej.reason) +
                      (rej.detail.empty() ? "" : " (" + rej.detail + ")"));
    log_event("info", "ingest.done",
              std::to_string(result.report.accepted) + " accepted, " +
                  std::to_string(result.report.rejected_total()) + " rejected");
    return result;
}

} // namespace

int cmd_ingest(const IngestOptions& opts) {
    LoadedInputs in = load_inputs(opts.taxonomy_path, "", opts.rules_path);
    print_diagnostics(in.diags);
    if (has_errors(in.diags)) return kExitValidation;

    IngestResult result = run_ingest(opts.catalog_path, in.taxonomy, in.rules);
    fs::create_directories(opts.out_dir);
    {
        std::ofstream out(fs::path(opts.out_dir) / "items.jsonl", std::ios::binary);
        for (const auto& item : result.items) {
            ordered_json d;
            d["image_id"] = item.image_id;
            d["category"] = item.category;
            ordered_json values = ordered_json::object();
            for (const auto& [attr, vals] : item.values)
                values[attr] = std::vector<std::string>(vals.begin(), vals.end());
            d["values"] = values;
            d["has_person"] = item.has_person;
            d["piece_count"] = item.piece_count;
            out << d.dump() << "\n";
        }
    }
    {
        std::ofstream out(fs::path(opts.out_dir) / "ingest_report.json", std::ios::binary);
        out << ingest_report_json(result.report);
    }
    return kExitOk;
}

GenerationConfig effective_config(const GenerateOptions& opts) {
    GenerationConfig cfg;
    if (!opts.config_path.empty())
        cfg = GenerationConfig::from_json_text(read_file(opts.config_path, "config"));
    if (opts.seed) {
        cfg.master_seed = *opts.seed;
        cfg.diversify.rng_seed = *opts.seed;
    }
    if (opts.workers) cfg.workers = *opts.workers;
    if (opts.strategy) {
        auto s = strategy_from_string(*opts.strategy);
        if (!s) throw ConfigError("unknown strategy: " + *opts.strategy);
        cfg.strategy = *s;
    }
    if (opts.split_ratio) cfg.split_ratio = *opts.split_ratio;
    if (opts.quota) cfg.per_question_quota = *opts.quota;
    if (opts.tier_weights) {
        std::map<int, int> weights;
        std::stringstream ss(*opts.tier_weights);
        std::string part;
        while (std::getline(ss, part, ',')) {
            size_t eq = part.find('=');
            if (eq == std::string::npos)
                throw ConfigError("tier weights must look like 2=134,1=6,0=1");
            weights[std::stoi(part.substr(0, eq))] = std::stoi(part.substr(eq + 1));
        }
        cfg.tier_weights = weights;
    }
    cfg.validate();
    return cfg;
}

namespace {

void dump_index_report(const ValueIndex& index, const std::string& path) {
    ordered_json d;
    d["schema_version"] = 1;
    ordered_json attrs = ordered_json::object();
    for (const auto& [key, pos] : index.value_pos) {
        const auto& [attr, value] = key;
        attrs[attr][value] = {{"pos", pos.size()}, {"neg", index.negatives(attr, value).size()}};
    }
    d["attributes"] = attrs;
    ordered_json cats = ordered_json::object();
    for (const auto& [cat, pos] : index.cat_pos)
        cats[cat] = {{"pos", pos.size()}, {"neg", index.cat_neg.at(cat).size()}};
    d["categories"] = cats;
    std::ofstream out(path, std::ios::binary);
    out << d.dump(2) << "\n";
}

} // namespace

int cmd_generate(const GenerateOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();

    LoadedInputs in = load_inputs(opts.taxonomy_path, opts.templates_path, opts.rules_path);
    print_diagnostics(in.diags);
    if (has_errors(in.diags)) return kExitValidation;

    GenerationConfig cfg = effective_config(opts);
    IngestResult ingest = run_ingest(opts.catalog_path, in.taxonomy, in.rules);

    DatasetBundle bundle = generate_dataset(ingest.items, in.templates, in.taxonomy, cfg);

    std::map<std::string, std::string> input_digests = {
        {"catalog", digest_file(opts.catalog_path)},
        {"taxonomy", digest_file(opts.taxonomy_path)},
        {"templates", digest_file(opts.templates_path)},
        {"rules", digest_file(opts.rules_path)},
    };
    if (!opts.config_path.empty()) input_digests["config"] = digest_file(opts.config_path);

    auto wall_ms = static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                             std::chrono::steady_clock::now() - t0)
                                             .count());
    RunManifest manifest = write_bundle(bundle, opts.out_dir, cfg.shard_records, input_digests,
                                        wall_ms);
    {
        std::ofstream out(fs::path(opts.out_dir) / "ingest_report.json", std::ios::binary);
        out << ingest_report_json(ingest.report);
    }
    if (opts.dump_index) {
        ValueIndex index =
            compute_negatives(merge_synonyms(build_index(ingest.items), in.taxonomy));
        dump_index_report(index, (fs::path(opts.out_dir) / "index_report.json").string());
    }

    log_event("info", "generate.done",
              std::to_string(bundle.triplets.size()) + " triplets in " +
                  std::to_string(manifest.shards.size()) + " shards, " +
                  std::to_string(wall_ms) + " ms");
    return kExitOk;
}

int cmd_subsample(const SubsampleOptions& opts) {
    DatasetBundle bundle = load_bundle(opts.in_dir);

    SubsampleQuotas quotas;
    std::stringstream ss(opts.quotas);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        size_t eq = part.find('=');
        if (eq == std::string::npos)
            throw ConfigError("quotas must look like train_non_binary=110,train_binary=90");
        quotas[part.substr(0, eq)] = std::stoull(part.substr(eq + 1));
    }
    for (const auto& [key, _] : quotas)
        if (key != "train_non_binary" && key != "train_binary" && key != "val_non_binary" &&
            key != "val_binary")
            throw ConfigError("unknown quota stratum: " + key);

    std::vector<std::string> warnings;
    auto t0 = std::chrono::steady_clock::now();
    DatasetBundle mini = subsample(bundle, quotas, opts.seed, &warnings);
    for (const auto& w : warnings) log_event("warning", "subsample.clamp", w);

    auto wall_ms = static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                             std::chrono::steady_clock::now() - t0)
                                             .count());
    write_bundle(mini, opts.out_dir, 100000, {{"source", digest_file(
                                                  (fs::path(opts.in_dir) / "manifest.json")
                                                      .string())}},
                 wall_ms);
    log_event("info", "subsample.done", std::to_string(mini.triplets.size()) + " triplets kept");
    return kExitOk;
}

int cmd_stats(const StatsOptions& opts) {
    DatasetBundle bundle = load_bundle(opts.in_dir);
    std::string text = bundle.stats.to_json_text();
    if (opts.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(opts.out_path, std::ios::binary);
        if (!out) throw InputError("cannot write stats to " + opts.out_path);
        out << text;
    }
    return kExitOk;
}

int cmd_sample(const SampleOptions& opts) {
    DatasetBundle bundle = load_bundle(opts.in_dir);
    uint64_t n = opts.n;
    if (n > bundle.triplets.size()) {
        log_event("warning", "sample.clamp",
                  "requested " + std::to_string(n) + " of " +
                      std::to_string(bundle.triplets.size()) + " triplets");
        n = bundle.triplets.size();
    }
    SplitMix64 rng = rng_for(opts.seed, "sample");
    for (size_t idx : sample_indices(rng, bundle.triplets.size(), n)) {
        const Triplet& t = bundle.triplets[idx];
        std::string tier = t.tier >= 0 ? std::to_string(t.tier) : "n/a";
        std::cout << t.qid << "  [" << t.split << ", tier " << tier << "]  " << t.question
                  << "  ->  " << t.answer << "  (image " << t.image_id << ")\n";
    }
    return kExitOk;
}

int cmd_score(const ScoreOptions& opts) {
    DatasetBundle bundle = load_bundle(opts.in_dir);
    auto predictions = load_predictions(opts.predictions_path);
    ScoreReport report = score(predictions, bundle, opts.split);
    std::string text = report.to_json_text();
    if (opts.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(opts.out_path, std::ios::binary);
        if (!out) throw InputError("cannot write report to " + opts.out_path);
        out << text;
    }
    return kExitOk;
}

} // namespace fvqa
