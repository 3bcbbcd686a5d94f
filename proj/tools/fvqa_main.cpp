#include <iostream>

#include <CLI11.hpp>

#include "fvqa/commands.hpp"
#include "fvqa/version.hpp"

using namespace fvqa;

int main(int argc, char** argv) {
    CLI::App app{"fvqa - balanced fashion VQA dataset synthesis and scoring"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("--verbose", verbose, "emit debug-level log records");

    ValidateOptions validate_opts;
    auto* validate = app.add_subcommand("validate", "check taxonomy, templates and rules files");
    validate->add_option("--taxonomy", validate_opts.taxonomy_path)->required();
    validate->add_option("--templates", validate_opts.templates_path)->required();
    validate->add_option("--rules", validate_opts.rules_path)->required();

    IngestOptions ingest_opts;
    auto* ingest = app.add_subcommand("ingest", "normalize a raw catalog into canonical items");
    ingest->add_option("--catalog", ingest_opts.catalog_path)->required();
    ingest->add_option("--taxonomy", ingest_opts.taxonomy_path)->required();
    ingest->add_option("--rules", ingest_opts.rules_path)->required();
    ingest->add_option("--out", ingest_opts.out_dir)->required();

    GenerateOptions gen_opts;
    uint64_t gen_seed = 0;
    int gen_workers = 1;
    std::string gen_strategy;
    double gen_ratio = 0.0;
    int gen_quota = 0;
    std::string gen_weights;
    auto* generate = app.add_subcommand("generate", "run the full dataset pipeline");
    generate->add_option("--catalog", gen_opts.catalog_path)->required();
    generate->add_option("--taxonomy", gen_opts.taxonomy_path)->required();
    generate->add_option("--templates", gen_opts.templates_path)->required();
    generate->add_option("--rules", gen_opts.rules_path)->required();
    generate->add_option("--config", gen_opts.config_path);
    generate->add_option("--out", gen_opts.out_dir)->required();
    auto* seed_opt = generate->add_option("--seed", gen_seed, "master seed; all randomness");
    auto* workers_opt = generate->add_option("--workers", gen_workers);
    auto* strategy_opt =
        generate->add_option("--strategy", gen_strategy)->check(CLI::IsMember({"attribute", "image"}));
    auto* ratio_opt = generate->add_option("--split-ratio", gen_ratio);
    auto* quota_opt = generate->add_option("--quota", gen_quota, "pairs per tier-2 question");
    auto* weights_opt = generate->add_option("--tier-weights", gen_weights, "e.g. 2=134,1=6,0=1");
    generate->add_flag("--dump-index", gen_opts.dump_index, "write per-value pos/neg counts");

    SubsampleOptions sub_opts;
    auto* subsample = app.add_subcommand("subsample", "stratified pair-preserving mini dataset");
    subsample->add_option("--in", sub_opts.in_dir)->required();
    subsample->add_option("--out", sub_opts.out_dir)->required();
    subsample->add_option("--mini-quotas", sub_opts.quotas, "train_non_binary=110,train_binary=90,...")
        ->required();
    subsample->add_option("--seed", sub_opts.seed);

    StatsOptions stats_opts;
    auto* stats = app.add_subcommand("stats", "recompute bundle statistics");
    stats->add_option("--in", stats_opts.in_dir)->required();
    stats->add_option("--out", stats_opts.out_path);

    SampleOptions sample_opts;
    auto* sample = app.add_subcommand("sample", "print random triplets");
    sample->add_option("--in", sample_opts.in_dir)->required();
    sample->add_option("-n,--n", sample_opts.n);
    sample->add_option("--seed", sample_opts.seed);

    ScoreOptions score_opts;
    auto* score = app.add_subcommand("score", "top-1 accuracy of a predictions file");
    score->add_option("--in", score_opts.in_dir)->required();
    score->add_option("--predictions", score_opts.predictions_path)->required();
    score->add_option("--split", score_opts.split)->check(CLI::IsMember({"train", "val"}));
    score->add_option("--out", score_opts.out_path);

    CLI11_PARSE(app, argc, argv);
    set_verbose_logging(verbose);

    try {
        if (*validate) return cmd_validate(validate_opts);
        if (*ingest) return cmd_ingest(ingest_opts);
        if (*generate) {
            if (*seed_opt) gen_opts.seed = gen_seed;
            if (*workers_opt) gen_opts.workers = gen_workers;
            if (*strategy_opt) gen_opts.strategy = gen_strategy;
            if (*ratio_opt) gen_opts.split_ratio = gen_ratio;
            if (*quota_opt) gen_opts.quota = gen_quota;
            if (*weights_opt) gen_opts.tier_weights = gen_weights;
            return cmd_generate(gen_opts);
        }
        if (*subsample) return cmd_subsample(sub_opts);
        if (*stats) return cmd_stats(stats_opts);
        if (*sample) return cmd_sample(sample_opts);
        if (*score) return cmd_score(score_opts);
    } catch (const ConfigError& e) {
        log_event("error", "config", e.what());
        return kExitValidation;
    } catch (const InputError& e) {
        log_event("error", "input", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        log_event("error", "internal", e.what());
        return kExitInternal;
    }
    return kExitOk;
}
