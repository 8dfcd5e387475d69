#pragma once

// Cross-trial benchmark analysis.
//
// Input: one outcome stream plus metadata sidecar per (fuzzer, trial).
// Output: per-fuzzer consistency, per-bug time-to-trigger survival,
// exclusive bug-set intersections across fuzzers, and a comparison of
// crash-deduplication schemes against the oracle's ground-truth bug ids.
// All aggregation is deterministic: maps are ordered, float accumulation
// order is fixed (sorted bug ids), and trials sort by (fuzzer, trial).

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "frb/replay.hpp"
#include "frb/survival.hpp"

namespace frb {

struct TrialData {
    ReplayMeta meta;
    std::vector<ReplayOutcome> outcomes;
};

// Loads an outcome stream plus the replay_meta.json sitting next to it.
inline TrialData load_trial(const std::string& outcomes_path) {
    TrialData t;
    t.outcomes = read_outcomes_jsonl(outcomes_path);
    auto meta_path = std::filesystem::path(outcomes_path).parent_path() / "replay_meta.json";
    t.meta = read_replay_meta(meta_path.string());
    return t;
}

// Mean over bugs of the fraction of trials that triggered each bug.
// Summation order is the order of `counts` iteration (sorted bug ids).
inline double consistency_score(const std::map<std::string, int>& counts, int trials) {
    if (counts.empty() || trials == 0) return 0.0;
    double sum = 0.0;
    for (const auto& [bug, c] : counts) sum += double(c) / double(trials);
    return sum / double(counts.size());
}

struct BugRollup {
    int trials_triggered = 0;
    TriggerFraction fraction;
    SurvivalCurve curve;
    std::optional<double> median;
};

struct DedupStats {
    int labeled_crashes = 0;
    int unlabeled_crashes = 0;
    int pc_lr_groups = 0;
    int pc_lr_conflated = 0; // groups mixing >= 2 oracle bug ids
    int pc_lr_split = 0;     // bug ids scattered across >= 2 groups
    int stack_groups = 0;
    int stack_conflated = 0;
    int stack_split = 0;
};

struct FuzzerAnalysis {
    std::string fuzzer;
    int trials = 0;
    double consistency = 0.0;
    std::map<std::string, BugRollup> bugs;    // real bugs
    std::map<std::string, BugRollup> fp_bugs; // decoy oracles, tracked apart
    std::set<std::string> triggered_any;      // pooled over trials, real + decoy
    DedupStats dedup;
};

struct IntersectionRow {
    std::vector<std::string> fuzzers; // the exact subset, sorted
    std::set<std::string> tp_bugs;    // triggered by all of them and nobody else
    std::set<std::string> fp_bugs;
};

struct Analysis {
    std::string target_hash;
    double horizon = 0;
    std::set<std::string> tp_bugs;
    std::set<std::string> fp_bugs;
    std::vector<FuzzerAnalysis> fuzzers; // sorted by name
    std::vector<IntersectionRow> intersections;
};

namespace analysis_detail {

inline bool triggered(BugState s) { return s >= BugState::Triggered; }

// Bug ids the oracle saw at >= Triggered for one input.
inline std::set<std::string> triggered_ids(const ReplayOutcome& o) {
    std::set<std::string> ids;
    for (const auto& ob : o.observations)
        if (triggered(ob.state)) ids.insert(ob.bug_id);
    return ids;
}

inline DedupStats dedup_compare(const std::vector<const ReplayOutcome*>& crashes) {
    DedupStats d;
    std::map<std::pair<uint64_t, uint64_t>, std::set<std::string>> by_pc_lr;
    std::map<uint64_t, std::set<std::string>> by_stack;
    for (const ReplayOutcome* o : crashes) {
        auto ids = triggered_ids(*o);
        if (ids.empty()) {
            d.unlabeled_crashes++;
            continue;
        }
        d.labeled_crashes++;
        by_pc_lr[*o->crash_sig_pc_lr].insert(ids.begin(), ids.end());
        by_stack[*o->crash_sig_stack].insert(ids.begin(), ids.end());
    }
    auto tally = [](const auto& groups, int& n_groups, int& conflated, int& split) {
        std::map<std::string, int> group_count;
        n_groups = int(groups.size());
        for (const auto& [sig, ids] : groups) {
            if (ids.size() >= 2) conflated++;
            for (const auto& id : ids) group_count[id]++;
        }
        for (const auto& [id, n] : group_count)
            if (n >= 2) split++;
    };
    tally(by_pc_lr, d.pc_lr_groups, d.pc_lr_conflated, d.pc_lr_split);
    tally(by_stack, d.stack_groups, d.stack_conflated, d.stack_split);
    return d;
}

} // namespace analysis_detail

struct AnalysisOptions {
    double horizon_s = 86400; // campaign budget; later triggers count as censored
};

inline Analysis analyze(std::vector<TrialData> trials, const AnalysisOptions& opts = {}) {
    if (trials.empty()) throw std::runtime_error("no trials to analyze");
    Analysis a;
    a.horizon = opts.horizon_s;
    a.target_hash = trials.front().meta.target_hash;
    for (const auto& t : trials)
        if (t.meta.target_hash != a.target_hash)
            throw std::runtime_error("trials mix different target images: " + a.target_hash +
                                     " vs " + t.meta.target_hash);

    // Bug universe from metadata, split real vs decoy.
    for (const auto& t : trials)
        for (const auto& b : t.meta.bugs)
            (b.false_positive ? a.fp_bugs : a.tp_bugs).insert(b.bug_id);

    std::stable_sort(trials.begin(), trials.end(), [](const TrialData& x, const TrialData& y) {
        if (x.meta.fuzzer_name != y.meta.fuzzer_name)
            return x.meta.fuzzer_name < y.meta.fuzzer_name;
        return x.meta.trial_index < y.meta.trial_index;
    });

    std::map<std::string, std::vector<const TrialData*>> by_fuzzer;
    for (const auto& t : trials) by_fuzzer[t.meta.fuzzer_name].push_back(&t);

    for (const auto& [fuzzer, group] : by_fuzzer) {
        FuzzerAnalysis fa;
        fa.fuzzer = fuzzer;
        fa.trials = int(group.size());

        // Per trial, per bug: earliest within-horizon trigger time.
        std::map<std::string, std::vector<SurvivalObservation>> obs; // bug -> per trial
        std::vector<const ReplayOutcome*> pooled_crashes;
        for (const TrialData* t : group) {
            std::map<std::string, double> stamp;
            for (const auto& i : t->meta.inputs) stamp[i.input_id] = i.timestamp_s;
            std::map<std::string, double> first;
            for (const auto& o : t->outcomes) {
                auto it = stamp.find(o.input_id);
                double when = it != stamp.end() ? it->second : 0.0;
                for (const auto& id : analysis_detail::triggered_ids(o)) {
                    auto [f, inserted] = first.emplace(id, when);
                    if (!inserted && when < f->second) f->second = when;
                }
                if (o.termination.kind == TerminationKind::Crash) pooled_crashes.push_back(&o);
            }
            for (const auto& id : a.tp_bugs) {
                auto f = first.find(id);
                if (f != first.end() && f->second <= opts.horizon_s)
                    obs[id].push_back({f->second, true});
                else
                    obs[id].push_back({opts.horizon_s, false});
            }
            for (const auto& id : a.fp_bugs) {
                auto f = first.find(id);
                if (f != first.end() && f->second <= opts.horizon_s)
                    obs[id].push_back({f->second, true});
                else
                    obs[id].push_back({opts.horizon_s, false});
            }
        }

        std::map<std::string, int> tp_counts;
        auto roll = [&](const std::string& id) {
            BugRollup r;
            auto& v = obs[id];
            for (const auto& ob : v)
                if (ob.event) r.trials_triggered++;
            r.fraction = {r.trials_triggered, int(v.size())};
            r.curve = km_curve(v);
            r.median = median_time(r.curve);
            if (r.trials_triggered > 0) fa.triggered_any.insert(id);
            return r;
        };
        for (const auto& id : a.tp_bugs) {
            fa.bugs[id] = roll(id);
            tp_counts[id] = fa.bugs[id].trials_triggered;
        }
        for (const auto& id : a.fp_bugs) fa.fp_bugs[id] = roll(id);

        fa.consistency = consistency_score(tp_counts, fa.trials);
        fa.dedup = analysis_detail::dedup_compare(pooled_crashes);
        a.fuzzers.push_back(std::move(fa));
    }

    // Exclusive intersections over the pooled triggered sets.
    size_t nf = a.fuzzers.size();
    if (nf > 16) throw std::runtime_error("intersection breakdown supports at most 16 fuzzers");
    for (uint32_t mask = 1; mask < (1u << nf); mask++) {
        IntersectionRow row;
        for (size_t i = 0; i < nf; i++)
            if (mask & (1u << i)) row.fuzzers.push_back(a.fuzzers[i].fuzzer);
        auto exclusive = [&](const std::string& id) {
            for (size_t i = 0; i < nf; i++) {
                bool has = a.fuzzers[i].triggered_any.count(id) != 0;
                bool want = (mask & (1u << i)) != 0;
                if (has != want) return false;
            }
            return true;
        };
        for (const auto& id : a.tp_bugs)
            if (exclusive(id)) row.tp_bugs.insert(id);
        for (const auto& id : a.fp_bugs)
            if (exclusive(id)) row.fp_bugs.insert(id);
        a.intersections.push_back(std::move(row));
    }
    return a;
}

// ---- oracle-set validation --------------------------------------------------
//
// Replays a crashes-only corpus and checks every crash is attributed to at
// least one bug oracle. Inputs that trigger two or more oracles are listed
// as cross-matches (over-broad or overlapping oracles); inputs that no
// longer crash at all are listed separately as stale.

struct ValidateReport {
    bool complete = false;
    int crash_inputs = 0;
    std::vector<std::string> unlabeled;                                  // input ids
    std::vector<std::pair<std::string, std::vector<std::string>>> cross; // input -> ids
    std::vector<std::string> stale; // labeled crash seeds that do not crash
    std::map<std::string, int> per_bug;
};

inline ValidateReport validate_ravens(const std::vector<ReplayOutcome>& outcomes) {
    ValidateReport r;
    for (const auto& o : outcomes) {
        bool crashed = o.termination.kind == TerminationKind::Crash ||
                       o.termination.kind == TerminationKind::OracleAbort;
        if (!crashed) {
            r.stale.push_back(o.input_id);
            continue;
        }
        r.crash_inputs++;
        auto ids = analysis_detail::triggered_ids(o);
        if (ids.empty()) {
            r.unlabeled.push_back(o.input_id);
            continue;
        }
        if (ids.size() >= 2)
            r.cross.emplace_back(o.input_id, std::vector<std::string>(ids.begin(), ids.end()));
        for (const auto& id : ids) r.per_bug[id]++;
    }
    r.complete = r.unlabeled.empty();
    return r;
}

} // namespace frb
