// Campaign ingestion: provenance logs, ordering, fallback policies, and
// multi-stream input flattening.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "frb/corpus.hpp"

namespace fs = std::filesystem;

namespace {

struct TempTree {
    fs::path root;
    explicit TempTree(const std::string& tag) {
        root = fs::temp_directory_path() / ("frb_corpus_" + tag);
        fs::remove_all(root);
        fs::create_directories(root / "queue");
        fs::create_directories(root / "crashes");
    }
    ~TempTree() { fs::remove_all(root); }

    void file(const std::string& rel, const std::vector<uint8_t>& bytes) {
        fs::path p = root / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }
    void text(const std::string& rel, const std::string& s) {
        file(rel, std::vector<uint8_t>(s.begin(), s.end()));
    }
};

frb::IngestOptions opts_no_fallback() {
    frb::IngestOptions o;
    o.fuzzer_name = "testfz";
    o.trial_index = 3;
    o.mtime_fallback_enabled = false;
    return o;
}

} // namespace

TEST_CASE("logged campaign ingests sorted by time then id") {
    TempTree t("logged");
    t.file("queue/b", {1});
    t.file("queue/a", {2});
    t.file("crashes/c", {3});
    t.text("fuzz_log.jsonl",
           R"({"file":"queue/b","t":5.0,"kind":"queue"})" "\n"
           R"({"file":"queue/a","t":5.0,"kind":"queue"})" "\n"
           R"({"file":"crashes/c","t":2.5,"kind":"crash"})" "\n");

    auto res = frb::ingest_campaign(t.root.string(), std::nullopt, opts_no_fallback());
    CHECK(res.warnings.empty());
    REQUIRE(res.records.size() == 3);
    CHECK(res.records[0].input_id == "crashes/c");
    CHECK(res.records[0].timestamp_s == 2.5);
    CHECK(res.records[0].label == frb::InputLabel::Crash);
    // equal timestamps tie-break on id
    CHECK(res.records[1].input_id == "queue/a");
    CHECK(res.records[2].input_id == "queue/b");
    CHECK(res.records[1].bytes == std::vector<uint8_t>{2});
    for (const auto& r : res.records) {
        CHECK(r.fuzzer_name == "testfz");
        CHECK(r.trial_index == 3);
        CHECK_FALSE(r.mtime_fallback);
    }
}

TEST_CASE("malformed and unknown-kind log lines warn and are skipped") {
    TempTree t("malformed");
    t.file("queue/ok", {1});
    t.text("fuzz_log.jsonl",
           "this is not json\n"
           R"({"file":"queue/ok","t":1.0,"kind":"queue"})" "\n"
           R"({"file":"queue/ok","t":2.0,"kind":"mystery"})" "\n"
           R"({"t":3.0,"kind":"queue"})" "\n");
    auto res = frb::ingest_campaign(t.root.string(), std::nullopt, opts_no_fallback());
    REQUIRE(res.records.size() == 1);
    CHECK(res.malformed_log_lines == 3);
    CHECK(res.warnings.size() >= 3);
}

TEST_CASE("log entries naming missing files warn") {
    TempTree t("missing");
    t.file("queue/real", {1});
    t.text("fuzz_log.jsonl",
           R"({"file":"queue/real","t":1.0,"kind":"queue"})" "\n"
           R"({"file":"queue/ghost","t":2.0,"kind":"queue"})" "\n");
    auto res = frb::ingest_campaign(t.root.string(), std::nullopt, opts_no_fallback());
    CHECK(res.records.size() == 1);
    CHECK(res.missing_log_files == 1);
    REQUIRE_FALSE(res.warnings.empty());
    bool named = false;
    for (const auto& w : res.warnings)
        if (w.find("ghost") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("unlogged seeds fall back to normalized mtimes with a warning") {
    TempTree t("fallback");
    t.file("queue/logged", {1});
    t.file("queue/stray1", {2});
    t.file("crashes/stray2", {3});
    t.text("fuzz_log.jsonl", R"({"file":"queue/logged","t":7.0,"kind":"queue"})" "\n");

    frb::IngestOptions o;
    o.fuzzer_name = "fz";
    o.mtime_fallback_enabled = true;
    auto res = frb::ingest_campaign(t.root.string(), std::nullopt, o);
    REQUIRE(res.records.size() == 3);
    CHECK(res.mtime_fallbacks == 2);
    int flagged = 0;
    double min_fallback_t = 1e300;
    for (const auto& r : res.records)
        if (r.mtime_fallback) {
            flagged++;
            min_fallback_t = std::min(min_fallback_t, r.timestamp_s);
            CHECK(r.timestamp_s >= 0.0);
        }
    CHECK(flagged == 2);
    // normalization anchors the earliest fallback seed at zero
    CHECK(min_fallback_t == 0.0);
    CHECK_FALSE(res.warnings.empty());

    // stray crash keeps its label
    for (const auto& r : res.records)
        if (r.input_id == "crashes/stray2") CHECK(r.label == frb::InputLabel::Crash);
}

TEST_CASE("disabled fallback skips unlogged seeds and counts them") {
    TempTree t("nofall");
    t.file("queue/logged", {1});
    t.file("queue/stray", {2});
    t.text("fuzz_log.jsonl", R"({"file":"queue/logged","t":7.0,"kind":"queue"})" "\n");
    auto res = frb::ingest_campaign(t.root.string(), std::nullopt, opts_no_fallback());
    REQUIRE(res.records.size() == 1);
    CHECK(res.records[0].input_id == "queue/logged");
    CHECK(res.skipped_unlogged == 1);
}

TEST_CASE("an explicitly named but absent log is an error") {
    TempTree t("nolog");
    t.file("queue/x", {1});
    CHECK_THROWS(frb::ingest_campaign(t.root.string(),
                                      (t.root / "nope.jsonl").string(), opts_no_fallback()));
}

TEST_CASE("campaign without any log ingests everything via fallback") {
    TempTree t("bare");
    t.file("queue/a", {1});
    t.file("crashes/b", {2});
    frb::IngestOptions o;
    o.mtime_fallback_enabled = true;
    auto res = frb::ingest_campaign(t.root.string(), std::nullopt, o);
    CHECK(res.records.size() == 2);
    CHECK(res.mtime_fallbacks == 2);
}

TEST_CASE("multi-stream archives flatten to concatenated payloads") {
    // magic "FRBS", count=2, then (len=3,"abc"), (len=2,"de")
    std::vector<uint8_t> arc = {'F', 'R', 'B', 'S', 2, 0, 0, 0,
                                3,   0,   0,   0,   'a', 'b', 'c',
                                2,   0,   0,   0,   'd', 'e'};
    CHECK(frb::is_multi_stream(arc));
    auto flat = frb::flatten_multi_stream(arc);
    REQUIRE(flat.has_value());
    CHECK(*flat == std::vector<uint8_t>{'a', 'b', 'c', 'd', 'e'});
    CHECK(frb::normalize_input(arc) == *flat);
}

TEST_CASE("truncated multi-stream archives pass through untouched") {
    std::vector<uint8_t> bad = {'F', 'R', 'B', 'S', 2, 0, 0, 0, 9, 0, 0, 0, 'a'};
    CHECK(frb::is_multi_stream(bad));
    CHECK_FALSE(frb::flatten_multi_stream(bad).has_value());
    CHECK(frb::normalize_input(bad) == bad); // raw passthrough
}

TEST_CASE("ordinary inputs are not multi-stream and normalize to themselves") {
    std::vector<uint8_t> plain = {'F', 'R', 'B', '!', 0x42};
    CHECK_FALSE(frb::is_multi_stream(plain));
    CHECK(frb::normalize_input(plain) == plain);
    std::vector<uint8_t> empty;
    CHECK(frb::normalize_input(empty) == empty);
}

TEST_CASE("multi-stream seeds are normalized during ingestion") {
    TempTree t("frbs");
    t.file("queue/arc", {'F', 'R', 'B', 'S', 1, 0, 0, 0, 2, 0, 0, 0, 'h', 'i'});
    t.text("fuzz_log.jsonl", R"({"file":"queue/arc","t":1.0,"kind":"queue"})" "\n");
    auto res = frb::ingest_campaign(t.root.string(), std::nullopt, opts_no_fallback());
    REQUIRE(res.records.size() == 1);
    CHECK(res.records[0].bytes == std::vector<uint8_t>{'h', 'i'});
}

TEST_CASE("every committed fixture corpus ingests with no warnings") {
    fs::path root = fs::path(FRB_SOURCE_DIR) / "fixtures/corpora";
    int campaigns = 0;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_directory() || !fs::exists(e.path() / "fuzz_log.jsonl")) continue;
        auto res = frb::ingest_campaign(e.path().string(), std::nullopt, opts_no_fallback());
        CHECK(res.warnings.empty());
        CHECK(res.skipped_unlogged == 0);
        CHECK_FALSE(res.records.empty());
        for (size_t i = 1; i < res.records.size(); i++) {
            bool ordered =
                res.records[i - 1].timestamp_s < res.records[i].timestamp_s ||
                (res.records[i - 1].timestamp_s == res.records[i].timestamp_s &&
                 res.records[i - 1].input_id < res.records[i].input_id);
            CHECK(ordered);
        }
        campaigns++;
    }
    CHECK(campaigns >= 27); // 7 targets + 20 demo trials
}
