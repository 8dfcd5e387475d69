#pragma once

// Subcommand implementations behind the `frb` binary. Each returns a
// process exit code: 0 success, 1 usage error (argument parsing, handled by
// the binary), 2 data error (unreadable/inconsistent inputs), 3 validation
// failure (an incomplete oracle set). They write human output to `out` and
// warnings/errors to `err` so tests can capture both.

#include <iostream>
#include <sstream>

#include "frb/analysis.hpp"
#include "frb/assembler.hpp"
#include "frb/charts.hpp"
#include "frb/report.hpp"

namespace frb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitValidationFailure = 3;

struct AsmOverrides {
    std::optional<uint32_t> entry;
    std::optional<uint32_t> handler;
    std::optional<uint32_t> period;
    std::optional<uint32_t> ram_size;
};

inline int cmd_asm(const std::string& source_path, const std::string& image_path,
                   const AsmOverrides& over, std::ostream& out, std::ostream& err) {
    try {
        TargetImage image = assemble_file(source_path);
        if (over.entry) image.entry = *over.entry;
        if (over.handler) image.handler = *over.handler;
        if (over.period) image.period = *over.period;
        if (over.ram_size) image.ram_size = *over.ram_size;
        save_image_file(image, image_path);
        out << "assembled " << source_path << " -> " << image_path << " (" << image.rom.size()
            << " bytes of rom)\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

struct ReplayArgs {
    std::string target_path;
    std::string ravens_dir;
    std::string corpus_dir;
    std::optional<std::string> log_path;
    std::string out_dir;
    std::string fuzzer_name = "fuzzer";
    int trial_index = 0;
    int jobs = 1;
    bool live = false;
    std::optional<std::set<std::string>> active_bugs;
};

inline int cmd_replay(const ReplayArgs& args, std::ostream& out, std::ostream& err) {
    try {
        TargetImage image = load_image_file(args.target_path);
        RavenSet ravens;
        try {
            ravens = load_raven_dir(args.ravens_dir);
        } catch (const RavenLoadError& e) {
            err << "error: " << e.what() << "\n";
            return kExitDataError;
        }
        for (const auto& w : ravens.warnings) err << "warning: " << w.to_string() << "\n";

        IngestOptions iopts;
        iopts.fuzzer_name = args.fuzzer_name;
        iopts.trial_index = args.trial_index;
        IngestResult corpus = ingest_campaign(args.corpus_dir, args.log_path, iopts);
        for (const auto& w : corpus.warnings) err << "warning: " << w << "\n";

        ReplayOptions ropts;
        ropts.mode = args.live ? OracleMode::Live : OracleMode::Replay;
        ropts.active_bugs = args.active_bugs;
        ropts.jobs = args.jobs;
        std::vector<ReplayOutcome> outcomes = replay_all(image, ravens, corpus.records, ropts);

        std::filesystem::create_directories(args.out_dir);
        auto out_path = std::filesystem::path(args.out_dir);
        write_outcomes_jsonl((out_path / "outcomes.jsonl").string(), outcomes);
        ReplayMeta meta = make_replay_meta(image, ravens, corpus.records, args.fuzzer_name,
                                           args.trial_index, corpus.warnings);
        write_replay_meta((out_path / "replay_meta.json").string(), meta);

        int crashes = 0, mismatches = 0;
        for (const auto& o : outcomes) {
            if (o.termination.kind == TerminationKind::Crash ||
                o.termination.kind == TerminationKind::OracleAbort)
                crashes++;
            if (o.label_mismatch) mismatches++;
        }
        out << "replayed " << outcomes.size() << " input(s): " << crashes
            << " crash(es), " << mismatches << " label mismatch(es) -> " << args.out_dir
            << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

namespace cli_detail {

// Minimal '*' glob over path components, for callers that quote patterns.
inline bool glob_match(const std::string& pat, const std::string& name) {
    size_t np = pat.size(), nn = name.size();
    std::vector<std::vector<char>> dp(np + 1, std::vector<char>(nn + 1, 0));
    dp[0][0] = 1;
    for (size_t i = 1; i <= np; i++)
        if (pat[i - 1] == '*') dp[i][0] = dp[i - 1][0];
    for (size_t i = 1; i <= np; i++)
        for (size_t j = 1; j <= nn; j++)
            dp[i][j] = pat[i - 1] == '*'
                           ? (dp[i - 1][j] || dp[i][j - 1])
                           : (dp[i - 1][j - 1] && pat[i - 1] == name[j - 1]);
    return dp[np][nn];
}

inline std::vector<std::string> expand_glob(const std::string& pattern) {
    namespace fs = std::filesystem;
    if (pattern.find('*') == std::string::npos) return {pattern};
    fs::path p(pattern);
    std::vector<fs::path> frontier = {p.is_absolute() ? p.root_path() : fs::path(".")};
    for (const auto& comp : p.relative_path()) {
        std::string c = comp.string();
        std::vector<fs::path> next;
        for (const auto& base : frontier) {
            if (c.find('*') == std::string::npos) {
                if (fs::exists(base / c)) next.push_back(base / c);
            } else if (fs::is_directory(base)) {
                std::vector<fs::path> names;
                for (const auto& e : fs::directory_iterator(base))
                    if (glob_match(c, e.path().filename().string()))
                        names.push_back(e.path());
                std::sort(names.begin(), names.end());
                next.insert(next.end(), names.begin(), names.end());
            }
        }
        frontier = std::move(next);
    }
    std::vector<std::string> out;
    for (const auto& f : frontier) out.push_back(f.string());
    return out;
}

} // namespace cli_detail

struct AnalyzeArgs {
    std::vector<std::string> outcome_paths; // files or quoted globs
    double horizon_s = 86400;
    std::string out_dir;
};

inline int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
    try {
        std::vector<std::string> paths;
        for (const auto& p : args.outcome_paths) {
            auto expanded = cli_detail::expand_glob(p);
            paths.insert(paths.end(), expanded.begin(), expanded.end());
        }
        if (paths.empty()) {
            err << "error: no outcome files matched\n";
            return kExitDataError;
        }
        std::vector<TrialData> trials;
        for (const auto& p : paths) trials.push_back(load_trial(p));
        AnalysisOptions opts;
        opts.horizon_s = args.horizon_s;
        Analysis a = analyze(std::move(trials), opts);
        auto written = write_report(args.out_dir, a);
        out << "analyzed " << paths.size() << " trial(s) across " << a.fuzzers.size()
            << " fuzzer(s); wrote " << written.size() << " file(s) -> " << args.out_dir << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

inline int cmd_chart(const std::string& report_path, const std::string& out_dir,
                     std::ostream& out, std::ostream& err) {
    try {
        std::ifstream in(report_path);
        if (!in) throw std::runtime_error("cannot read " + report_path);
        nlohmann::json report = nlohmann::json::parse(in, nullptr, false);
        if (report.is_discarded() || report.value("schema", "") != kReportSchema)
            throw std::runtime_error("not a recognized report: " + report_path);
        auto written = write_charts(out_dir, report);
        out << "wrote " << written.size() << " chart(s) -> " << out_dir << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

struct ValidateArgs {
    std::string target_path;
    std::string ravens_dir;
    std::string crashes_dir; // flat directory of crash inputs
};

inline int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
    try {
        TargetImage image = load_image_file(args.target_path);
        RavenSet ravens;
        try {
            ravens = load_raven_dir(args.ravens_dir);
        } catch (const RavenLoadError& e) {
            err << "error: " << e.what() << "\n";
            return kExitDataError;
        }
        for (const auto& w : ravens.warnings) err << "warning: " << w.to_string() << "\n";

        namespace fs = std::filesystem;
        if (!fs::is_directory(args.crashes_dir))
            throw std::runtime_error("crash directory does not exist: " + args.crashes_dir);
        std::vector<InputRecord> records;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(args.crashes_dir))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto bytes = corpus_detail::read_file(f);
            if (!bytes) {
                err << "warning: unreadable input skipped: " << f.string() << "\n";
                continue;
            }
            InputRecord rec;
            rec.input_id = f.filename().string();
            rec.bytes = normalize_input(std::move(*bytes));
            rec.label = InputLabel::Crash;
            records.push_back(std::move(rec));
        }

        auto outcomes = replay_all(image, ravens, records);
        ValidateReport rep = validate_ravens(outcomes);

        out << "crash inputs: " << rep.crash_inputs << "\n";
        for (const auto& [bug, n] : rep.per_bug) out << "  " << bug << ": " << n << "\n";
        for (const auto& id : rep.unlabeled) out << "unlabeled: " << id << "\n";
        for (const auto& [id, bugs] : rep.cross) {
            out << "cross-match: " << id << " ->";
            for (const auto& b : bugs) out << " " << b;
            out << "\n";
        }
        for (const auto& id : rep.stale) out << "stale (did not crash): " << id << "\n";
        out << "oracle set is " << (rep.complete ? "COMPLETE" : "INCOMPLETE") << " ("
            << rep.unlabeled.size() << " unlabeled crash(es))\n";
        return rep.complete ? kExitOk : kExitValidationFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

} // namespace frb
