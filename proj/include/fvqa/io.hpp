#pragma once

#include <map>
#include <string>
#include <vector>

#include "fvqa/dataset.hpp"

namespace fvqa {

/// FNV-1a 64 content digest, formatted "fnv1a64:<16 hex digits>".
std::string digest_bytes(std::string_view bytes);
std::string digest_file(const std::string& path);

std::string triplet_to_jsonl(const Triplet& t);
Triplet triplet_from_jsonl(const std::string& line);

struct ShardInfo {
    std::string file;
    std::string digest;
    uint64_t records = 0;
};

struct RunManifest {
    std::string tool_version;
    std::string config_digest;
    std::map<std::string, std::string> input_digests;
    std::vector<ShardInfo> shards;
    std::map<std::string, std::map<int, uint64_t>> planned_pairs; // split -> tier -> pairs
    uint64_t wall_ms = 0;
    uint64_t records = 0;

    std::string to_json_text() const;
    static RunManifest from_json_text(const std::string& text);
};

/// Writes shards, vocabulary, stats, config echo and the manifest into
/// `out_dir` (created if missing). Shards are cut every `shard_records`
/// records, per (split, answer_type) stream, in canonical triplet order.
RunManifest write_bundle(const DatasetBundle& bundle, const std::string& out_dir,
                         int shard_records, const std::map<std::string, std::string>& input_digests,
                         uint64_t wall_ms);

/// Reads a bundle back through its manifest.
DatasetBundle load_bundle(const std::string& dir);

} // namespace fvqa
