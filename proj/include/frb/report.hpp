#pragma once

// Benchmark report emission.
//
// One versioned JSON document plus flat CSV sidecars: bugs.csv with one row
// per (fuzzer, bug) and survival/<fuzzer>_<bug>.csv step curves. All float
// text uses shortest-round-trip (JSON) or %.17g (CSV) so reruns are
// byte-identical.

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "frb/analysis.hpp"

namespace frb {

inline constexpr const char* kReportSchema = "frb_report_v1";

namespace report_detail {

inline std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

inline nlohmann::ordered_json curve_json(const SurvivalCurve& c) {
    using J = nlohmann::ordered_json;
    J arr = J::array();
    for (const auto& p : c.points)
        arr.push_back(J{{"time_s", p.time_s},
                        {"at_risk", p.at_risk},
                        {"events", p.events},
                        {"prob", p.survival},
                        {"ci_low", p.ci_low},
                        {"ci_high", p.ci_high}});
    return arr;
}

inline nlohmann::ordered_json rollup_json(const std::string& id, bool fp, int trials,
                                          const BugRollup& r) {
    using J = nlohmann::ordered_json;
    J e;
    e["bug_id"] = id;
    e["false_positive"] = fp;
    e["trials"] = trials;
    e["trials_triggered"] = r.trials_triggered;
    e["fraction"] = r.fraction.value();
    e["median_s"] = r.median ? J(*r.median) : J(nullptr);
    e["median_hhmm"] = format_median(r.median);
    e["survival"] = curve_json(r.curve);
    return e;
}

} // namespace report_detail

inline nlohmann::ordered_json report_to_json(const Analysis& a) {
    using J = nlohmann::ordered_json;
    J doc;
    doc["schema"] = kReportSchema;
    doc["target_hash"] = a.target_hash;
    doc["horizon_s"] = a.horizon;
    doc["bugs"] = J{{"tp", a.tp_bugs}, {"fp", a.fp_bugs}};
    J fuzzers = J::array();
    for (const auto& f : a.fuzzers) {
        J e;
        e["name"] = f.fuzzer;
        e["trials"] = f.trials;
        e["consistency"] = f.consistency;
        J bugs = J::array();
        for (const auto& [id, r] : f.bugs)
            bugs.push_back(report_detail::rollup_json(id, false, f.trials, r));
        for (const auto& [id, r] : f.fp_bugs)
            bugs.push_back(report_detail::rollup_json(id, true, f.trials, r));
        e["bugs"] = std::move(bugs);
        e["dedup"] = J{{"labeled_crashes", f.dedup.labeled_crashes},
                       {"unlabeled_crashes", f.dedup.unlabeled_crashes},
                       {"pc_lr", J{{"groups", f.dedup.pc_lr_groups},
                                   {"conflated", f.dedup.pc_lr_conflated},
                                   {"split", f.dedup.pc_lr_split}}},
                       {"stack", J{{"groups", f.dedup.stack_groups},
                                   {"conflated", f.dedup.stack_conflated},
                                   {"split", f.dedup.stack_split}}}};
        fuzzers.push_back(std::move(e));
    }
    doc["fuzzers"] = std::move(fuzzers);
    J inter = J::array();
    for (const auto& row : a.intersections)
        inter.push_back(J{{"fuzzers", row.fuzzers},
                          {"tp_bugs", row.tp_bugs},
                          {"fp_bugs", row.fp_bugs}});
    doc["intersections"] = std::move(inter);
    return doc;
}

inline std::string bugs_csv(const Analysis& a) {
    std::string out =
        "fuzzer,bug_id,false_positive,trials,trials_triggered,fraction,median_s,median_hhmm\n";
    auto row = [&](const FuzzerAnalysis& f, const std::string& id, bool fp, const BugRollup& r) {
        out += f.fuzzer + "," + id + "," + (fp ? "1" : "0") + "," + std::to_string(f.trials) +
               "," + std::to_string(r.trials_triggered) + "," +
               report_detail::g17(r.fraction.value()) + "," +
               (r.median ? report_detail::g17(*r.median) : "") + "," + format_median(r.median) +
               "\n";
    };
    for (const auto& f : a.fuzzers) {
        for (const auto& [id, r] : f.bugs) row(f, id, false, r);
        for (const auto& [id, r] : f.fp_bugs) row(f, id, true, r);
    }
    return out;
}

inline std::string survival_csv(const SurvivalCurve& c) {
    std::string out = "time_s,prob,ci_low,ci_high\n";
    out += "0,1,1,1\n";
    for (const auto& p : c.points)
        out += report_detail::g17(p.time_s) + "," + report_detail::g17(p.survival) + "," +
               report_detail::g17(p.ci_low) + "," + report_detail::g17(p.ci_high) + "\n";
    return out;
}

// Writes report.json, bugs.csv and survival/*.csv under out_dir.
// Returns the relative paths written, in write order.
inline std::vector<std::string> write_report(const std::string& out_dir, const Analysis& a) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    fs::create_directories(fs::path(out_dir) / "survival");
    auto emit = [&](const std::string& rel, const std::string& body) {
        std::ofstream f(fs::path(out_dir) / rel, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + rel + " under " + out_dir);
        f << body;
        written.push_back(rel);
    };
    emit("report.json", report_to_json(a).dump(2) + "\n");
    emit("bugs.csv", bugs_csv(a));
    for (const auto& f : a.fuzzers) {
        auto one = [&](const std::string& id, const BugRollup& r) {
            emit("survival/" + report_detail::sanitize(f.fuzzer) + "_" +
                     report_detail::sanitize(id) + ".csv",
                 survival_csv(r.curve));
        };
        for (const auto& [id, r] : f.bugs) one(id, r);
        for (const auto& [id, r] : f.fp_bugs) one(id, r);
    }
    return written;
}

} // namespace frb
