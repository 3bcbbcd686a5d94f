#include "fvqa/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fvqa/rng.hpp"
#include "fvqa/version.hpp"

namespace fvqa {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string digest_bytes(std::string_view bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file for digest: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return digest_bytes(buf.str());
}

std::string triplet_to_jsonl(const Triplet& t) {
    ordered_json d;
    d["qid"] = t.qid;
    d["image_id"] = t.image_id;
    d["question"] = t.question;
    d["answer"] = t.answer;
    d["answer_type"] = t.answer_type;
    d["question_type"] = t.question_type;
    d["template_id"] = t.template_id;
    if (t.tier >= 0)
        d["difficulty_tier"] = t.tier;
    else
        d["difficulty_tier"] = nullptr;
    d["split"] = t.split;
    d["noise_flag"] = t.noise;
    return d.dump();
}

Triplet triplet_from_jsonl(const std::string& line) {
    json d;
    try {
        d = json::parse(line);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad triplet record: ") + e.what());
    }
    Triplet t;
    t.qid = d.value("qid", "");
    t.image_id = d.value("image_id", "");
    t.question = d.value("question", "");
    t.answer = d.value("answer", "");
    t.answer_type = d.value("answer_type", "");
    t.question_type = d.value("question_type", "");
    t.template_id = d.value("template_id", "");
    t.tier = d.contains("difficulty_tier") && !d["difficulty_tier"].is_null()
                 ? d["difficulty_tier"].get<int>()
                 : -1;
    t.split = d.value("split", "");
    t.noise = d.value("noise_flag", false);
    return t;
}

std::string RunManifest::to_json_text() const {
    ordered_json d;
    d["schema_version"] = 1;
    d["tool_version"] = tool_version;
    d["config_digest"] = config_digest;
    ordered_json inputs = ordered_json::object();
    for (const auto& [name, digest] : input_digests) inputs[name] = digest;
    d["inputs"] = inputs;
    ordered_json shards_json = ordered_json::array();
    for (const auto& s : shards)
        shards_json.push_back({{"file", s.file}, {"digest", s.digest}, {"records", s.records}});
    d["shards"] = shards_json;
    ordered_json plan = ordered_json::object();
    for (const auto& [split, tiers] : planned_pairs) {
        ordered_json tj = ordered_json::object();
        for (const auto& [tier, pairs] : tiers) tj[std::to_string(tier)] = pairs;
        plan[split] = tj;
    }
    d["planned_pairs"] = plan;
    d["records"] = records;
    d["wall_ms"] = wall_ms;
    return d.dump(2) + "\n";
}

RunManifest RunManifest::from_json_text(const std::string& text) {
    json d;
    try {
        d = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad manifest: ") + e.what());
    }
    RunManifest m;
    m.tool_version = d.value("tool_version", "");
    m.config_digest = d.value("config_digest", "");
    if (d.contains("inputs"))
        for (auto it = d["inputs"].begin(); it != d["inputs"].end(); ++it)
            m.input_digests[it.key()] = it.value().get<std::string>();
    for (const auto& s : d.value("shards", json::array()))
        m.shards.push_back(
            {s.value("file", ""), s.value("digest", ""), s.value("records", 0ULL)});
    if (d.contains("planned_pairs"))
        for (auto it = d["planned_pairs"].begin(); it != d["planned_pairs"].end(); ++it)
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
                m.planned_pairs[it.key()][std::stoi(jt.key())] = jt.value().get<uint64_t>();
    m.records = d.value("records", 0ULL);
    m.wall_ms = d.value("wall_ms", 0ULL);
    return m;
}

RunManifest write_bundle(const DatasetBundle& bundle, const std::string& out_dir,
                         int shard_records, const std::map<std::string, std::string>& input_digests,
                         uint64_t wall_ms) {
    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.config_digest = digest_bytes(bundle.config_echo_json);
    manifest.input_digests = input_digests;
    manifest.planned_pairs = bundle.planned_pairs;
    manifest.records = bundle.triplets.size();
    manifest.wall_ms = wall_ms;

    // triplets arrive in canonical order; cut shards per (split, answer_type)
    std::string cur_stream;
    int shard_idx = 0;
    uint64_t in_shard = 0;
    std::string shard_buf;
    auto flush = [&]() {
        if (cur_stream.empty() || in_shard == 0) return;
        char name[64];
        std::snprintf(name, sizeof(name), "%s-%05d.jsonl", cur_stream.c_str(), shard_idx);
        fs::path path = fs::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InputError("cannot write shard: " + path.string());
        out << shard_buf;
        out.close();
        manifest.shards.push_back({name, digest_bytes(shard_buf), in_shard});
        shard_buf.clear();
        in_shard = 0;
        ++shard_idx;
    };
    for (const auto& t : bundle.triplets) {
        std::string stream = t.split + "_" + t.answer_type;
        if (stream != cur_stream) {
            flush();
            cur_stream = stream;
            shard_idx = 0;
        } else if (in_shard >= static_cast<uint64_t>(shard_records)) {
            flush();
        }
        shard_buf += triplet_to_jsonl(t);
        shard_buf += "\n";
        ++in_shard;
    }
    flush();

    {
        std::ofstream out(fs::path(out_dir) / "vocabulary.tsv", std::ios::binary);
        for (size_t i = 0; i < bundle.vocabulary.size(); ++i)
            out << bundle.vocabulary[i] << "\t" << i << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "stats.json", std::ios::binary);
        out << bundle.stats.to_json_text();
    }
    {
        std::ofstream out(fs::path(out_dir) / "config.json", std::ios::binary);
        out << bundle.config_echo_json;
    }
    {
        std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
        out << manifest.to_json_text();
    }
    return manifest;
}

DatasetBundle load_bundle(const std::string& dir) {
    fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw InputError("cannot open manifest: " + manifest_path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    RunManifest manifest = RunManifest::from_json_text(buf.str());

    DatasetBundle bundle;
    bundle.planned_pairs = manifest.planned_pairs;
    for (const auto& shard : manifest.shards) {
        fs::path path = fs::path(dir) / shard.file;
        std::ifstream shard_in(path);
        if (!shard_in) throw InputError("manifest references missing shard: " + path.string());
        std::string line;
        while (std::getline(shard_in, line)) {
            if (line.empty()) continue;
            bundle.triplets.push_back(triplet_from_jsonl(line));
        }
    }

    fs::path vocab_path = fs::path(dir) / "vocabulary.tsv";
    std::ifstream vocab_in(vocab_path);
    if (vocab_in) {
        std::string line;
        while (std::getline(vocab_in, line)) {
            if (line.empty()) continue;
            size_t tab = line.find('\t');
            bundle.vocabulary.push_back(line.substr(0, tab));
        }
    } else {
        bundle.vocabulary = build_vocabulary(bundle.triplets);
    }

    fs::path config_path = fs::path(dir) / "config.json";
    std::ifstream config_in(config_path);
    if (config_in) {
        std::stringstream cbuf;
        cbuf << config_in.rdbuf();
        bundle.config_echo_json = cbuf.str();
    }

    bundle.stats = compute_stats(bundle.triplets, bundle.vocabulary.size());
    return bundle;
}

} // namespace fvqa
