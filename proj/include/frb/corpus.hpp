#pragma once

// Campaign corpus ingestion.
//
// A trial directory holds queue/ and crashes/ seed files plus a
// fuzz_log.jsonl whose lines look like {"file": "queue/id42", "t": 13.25,
// "kind": "queue"}. Timestamps are seconds since campaign start. Seeds on
// disk that the log never mentions fall back to file-mtime timestamps
// (normalized to the earliest such file) and are flagged, since mtimes are
// not comparable to log times; setting FRB_SEED_MTIME_FALLBACK=0 skips those
// seeds instead. Multi-stream archive seeds (FRBS container) are flattened
// to one byte stream in declared access order at ingest time.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "frb/bug_oracle.hpp"

namespace frb {

struct InputRecord {
    std::string input_id;       // trial-relative path, '/'-separated
    std::vector<uint8_t> bytes; // already adapter-normalized
    double timestamp_s = 0;
    InputLabel label = InputLabel::Queue;
    std::string fuzzer_name;
    int trial_index = 0;
    bool mtime_fallback = false;
};

struct IngestResult {
    std::vector<InputRecord> records;       // sorted by (timestamp_s, input_id)
    std::vector<std::string> warnings;
    int malformed_log_lines = 0;
    int missing_log_files = 0;
    int mtime_fallbacks = 0;
    int skipped_unlogged = 0;
    int unreadable_files = 0;
};

struct IngestOptions {
    std::string fuzzer_name = "fuzzer";
    int trial_index = 0;
    // Mirrors FRB_SEED_MTIME_FALLBACK (anything but "0" enables).
    bool mtime_fallback_enabled = [] {
        const char* v = std::getenv("FRB_SEED_MTIME_FALLBACK");
        return !(v && std::string(v) == "0");
    }();
};

// "FRBS" archive: magic, u32 LE stream count, then per stream u32 LE length
// plus payload. Flattening concatenates payloads in declared order.
inline bool is_multi_stream(std::span<const uint8_t> bytes) {
    return bytes.size() >= 8 && bytes[0] == 'F' && bytes[1] == 'R' && bytes[2] == 'B' &&
           bytes[3] == 'S';
}

inline std::optional<std::vector<uint8_t>> flatten_multi_stream(std::span<const uint8_t> bytes) {
    if (!is_multi_stream(bytes)) return std::nullopt;
    auto get32 = [&](size_t off) {
        uint32_t v = 0;
        for (int i = 0; i < 4; i++) v |= uint32_t(bytes[off + i]) << (8 * i);
        return v;
    };
    uint32_t count = get32(4);
    std::vector<uint8_t> out;
    size_t off = 8;
    for (uint32_t s = 0; s < count; s++) {
        if (off + 4 > bytes.size()) return std::nullopt;   // truncated archive
        uint32_t len = get32(off);
        off += 4;
        if (off + len > bytes.size()) return std::nullopt;
        out.insert(out.end(), bytes.begin() + std::ptrdiff_t(off),
                   bytes.begin() + std::ptrdiff_t(off + len));
        off += len;
    }
    return out;
}

inline std::vector<uint8_t> normalize_input(std::vector<uint8_t> bytes) {
    if (auto flat = flatten_multi_stream(bytes)) return std::move(*flat);
    return bytes;
}

namespace corpus_detail {

inline std::optional<std::vector<uint8_t>> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
}

inline double mtime_seconds(const std::filesystem::path& p) {
    auto ft = std::filesystem::last_write_time(p);
    return double(std::chrono::duration_cast<std::chrono::milliseconds>(
                      ft.time_since_epoch())
                      .count()) /
           1000.0;
}

} // namespace corpus_detail

inline IngestResult ingest_campaign(const std::string& trial_dir,
                                    const std::optional<std::string>& log_path,
                                    const IngestOptions& opts = {}) {
    namespace fs = std::filesystem;
    IngestResult res;
    fs::path root(trial_dir);
    if (!fs::is_directory(root))
        throw std::runtime_error("trial directory does not exist: " + trial_dir);

    // Seeds on disk, keyed by trial-relative id.
    std::map<std::string, InputLabel> on_disk;
    for (const char* sub : {"queue", "crashes"}) {
        fs::path dir = root / sub;
        if (!fs::is_directory(dir)) continue;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file())
                on_disk.emplace(std::string(sub) + "/" + e.path().filename().string(),
                                std::string(sub) == "crashes" ? InputLabel::Crash
                                                              : InputLabel::Queue);
    }

    std::set<std::string> logged;
    auto push_record = [&](const std::string& rel, double t, InputLabel label,
                           bool from_mtime) {
        auto bytes = corpus_detail::read_file(root / rel);
        if (!bytes) {
            res.unreadable_files++;
            res.warnings.push_back("unreadable input skipped: " + rel);
            return;
        }
        InputRecord rec;
        rec.input_id = rel;
        rec.bytes = normalize_input(std::move(*bytes));
        rec.timestamp_s = t;
        rec.label = label;
        rec.fuzzer_name = opts.fuzzer_name;
        rec.trial_index = opts.trial_index;
        rec.mtime_fallback = from_mtime;
        res.records.push_back(std::move(rec));
    };

    fs::path log = log_path ? fs::path(*log_path) : root / "fuzz_log.jsonl";
    if (fs::is_regular_file(log)) {
        std::ifstream in(log);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            line_no++;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
            if (doc.is_discarded() || !doc.is_object() || !doc.contains("file") ||
                !doc.contains("t") || !doc.contains("kind") ||
                !doc["file"].is_string() || !doc["t"].is_number() ||
                !doc["kind"].is_string()) {
                res.malformed_log_lines++;
                res.warnings.push_back("malformed log line " + std::to_string(line_no) +
                                       " skipped");
                continue;
            }
            std::string rel = doc["file"].get<std::string>();
            std::string kind = doc["kind"].get<std::string>();
            if (kind != "queue" && kind != "crash") {
                res.malformed_log_lines++;
                res.warnings.push_back("malformed log line " + std::to_string(line_no) +
                                       " skipped (bad kind '" + kind + "')");
                continue;
            }
            if (!fs::is_regular_file(root / rel)) {
                res.missing_log_files++;
                res.warnings.push_back("log references missing file: " + rel);
                continue;
            }
            logged.insert(rel);
            push_record(rel, doc["t"].get<double>(),
                        kind == "crash" ? InputLabel::Crash : InputLabel::Queue, false);
        }
    } else if (log_path) {
        throw std::runtime_error("fuzz log does not exist: " + *log_path);
    }

    // Seeds the log never mentioned.
    std::vector<std::pair<std::string, InputLabel>> unlogged;
    for (const auto& [rel, label] : on_disk)
        if (!logged.count(rel)) unlogged.emplace_back(rel, label);

    if (!unlogged.empty()) {
        if (!opts.mtime_fallback_enabled) {
            res.skipped_unlogged = int(unlogged.size());
            res.warnings.push_back(
                std::to_string(unlogged.size()) +
                " input(s) absent from the fuzz log skipped (mtime fallback disabled)");
        } else {
            double min_mtime = 0;
            bool first = true;
            std::vector<std::pair<std::string, double>> mtimes;
            for (const auto& [rel, label] : unlogged) {
                double m = corpus_detail::mtime_seconds(root / rel);
                mtimes.emplace_back(rel, m);
                if (first || m < min_mtime) min_mtime = m;
                first = false;
            }
            for (size_t i = 0; i < unlogged.size(); i++) {
                res.mtime_fallbacks++;
                res.warnings.push_back("no log entry for " + unlogged[i].first +
                                       ": provenance falls back to file mtime");
                push_record(unlogged[i].first, mtimes[i].second - min_mtime,
                            unlogged[i].second, true);
            }
        }
    }

    std::stable_sort(res.records.begin(), res.records.end(),
                     [](const InputRecord& a, const InputRecord& b) {
                         if (a.timestamp_s != b.timestamp_s)
                             return a.timestamp_s < b.timestamp_s;
                         return a.input_id < b.input_id;
                     });
    return res;
}

} // namespace frb
