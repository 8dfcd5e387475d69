#pragma once

// Deterministic corpus replay.
//
// Every input gets a fresh VM and a fresh oracle session; bug states never
// leak between inputs. Outcomes serialize to one JSON line each, written in
// record order no matter how many worker threads ran the batch, so reruns
// are byte-identical. Crashing inputs additionally carry two dedup
// signatures: the (pc, lr) pair and a 64-bit hash of the whole shadow stack.

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "frb/bug_oracle.hpp"
#include "frb/corpus.hpp"
#include "frb/hash.hpp"
#include "frb/minivm.hpp"

namespace frb {

// FNV-1a over the shadow stack, each frame as 8 little-endian bytes.
inline uint64_t stack_hash(std::span<const uint64_t> frames) {
    Fnv1a64 h;
    for (uint64_t f : frames) h.feed_u64(f);
    return h.state;
}

inline std::string target_hash_hex(const TargetImage& image) {
    auto bytes = serialize_image(image);
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

struct ReplayOutcome {
    std::string input_id;
    std::vector<BugObservation> observations; // full bug universe, sorted by id
    Termination termination;
    std::optional<std::pair<uint64_t, uint64_t>> crash_sig_pc_lr; // crashes only
    std::optional<uint64_t> crash_sig_stack;                      // crashes only
    std::set<uint64_t> covered_blocks;
    std::optional<std::string> first_triggered;
    bool multi_bug = false;
    bool label_mismatch = false;
    std::vector<std::string> diagnostics;

    bool operator==(const ReplayOutcome&) const = default;
};

struct ReplayOptions {
    OracleMode mode = OracleMode::Replay;
    std::optional<std::set<std::string>> active_bugs; // Live mode only
    RunLimits limits{};
    uint64_t hook_step_budget = kDefaultHookStepBudget;
    int jobs = 1;
};

inline ReplayOutcome replay_one(const TargetImage& image, const RavenSet& ravens,
                                const InputRecord& record, const ReplayOptions& opts = {}) {
    MiniVm vm(image);
    OracleSession oracle(ravens, opts.mode, opts.active_bugs, opts.hook_step_budget);
    oracle.attach(vm);
    ExecutionResult exec = vm.run(record.bytes, opts.limits);
    FinalizedInput fin = oracle.finalize(exec, record.label);

    ReplayOutcome out;
    out.input_id = record.input_id;
    out.observations = std::move(fin.observations);
    out.termination = exec.termination;
    if (exec.termination.kind == TerminationKind::Crash) {
        out.crash_sig_pc_lr = std::pair{exec.termination.pc, exec.termination.lr};
        out.crash_sig_stack = stack_hash(exec.termination.shadow_stack);
    }
    out.covered_blocks = exec.covered_blocks;
    out.first_triggered = fin.first_triggered;
    out.multi_bug = fin.multi_bug;
    out.label_mismatch = fin.label_mismatch;
    out.diagnostics = oracle.diagnostics();
    return out;
}

inline std::vector<ReplayOutcome> replay_all(const TargetImage& image, const RavenSet& ravens,
                                             const std::vector<InputRecord>& records,
                                             const ReplayOptions& opts = {}) {
    std::vector<ReplayOutcome> outcomes(records.size());
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || records.size() <= 1) {
        for (size_t i = 0; i < records.size(); i++)
            outcomes[i] = replay_one(image, ravens, records[i], opts);
        return outcomes;
    }
    std::atomic<size_t> next{0};
    std::mutex error_mu;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= records.size()) return;
            try {
                outcomes[i] = replay_one(image, ravens, records[i], opts);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (size_t j = 0; j < std::min(size_t(jobs), records.size()); j++)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return outcomes;
}

// ---- outcome JSONL ---------------------------------------------------------

inline nlohmann::ordered_json outcome_to_json(const ReplayOutcome& o) {
    using J = nlohmann::ordered_json;
    J doc;
    doc["input_id"] = o.input_id;
    J obs = J::array();
    for (const auto& b : o.observations)
        obs.push_back(J{{"bug_id", b.bug_id}, {"state", bug_state_name(b.state)}});
    doc["observations"] = std::move(obs);
    J term;
    term["kind"] = termination_kind_name(o.termination.kind);
    if (o.termination.kind == TerminationKind::Crash) {
        term["reason"] = crash_reason_name(o.termination.reason);
        term["pc"] = o.termination.pc;
        term["lr"] = o.termination.lr;
        term["shadow_stack"] = o.termination.shadow_stack;
    }
    if (o.termination.kind == TerminationKind::OracleAbort)
        term["bug_id"] = o.termination.bug_id;
    doc["termination"] = std::move(term);
    if (o.crash_sig_pc_lr)
        doc["crash_sig_pc_lr"] = J::array({o.crash_sig_pc_lr->first, o.crash_sig_pc_lr->second});
    if (o.crash_sig_stack) doc["crash_sig_stack"] = *o.crash_sig_stack;
    doc["covered_blocks"] = o.covered_blocks;
    if (o.first_triggered) doc["first_triggered"] = *o.first_triggered;
    J flags;
    flags["multi_bug"] = o.multi_bug;
    flags["label_mismatch"] = o.label_mismatch;
    if (!o.diagnostics.empty()) flags["diagnostics"] = o.diagnostics;
    doc["flags"] = std::move(flags);
    return doc;
}

inline ReplayOutcome outcome_from_json(const nlohmann::json& doc) {
    ReplayOutcome o;
    o.input_id = doc.at("input_id").get<std::string>();
    for (const auto& b : doc.at("observations")) {
        auto state = bug_state_from_name(b.at("state").get<std::string>());
        if (!state) throw std::runtime_error("unknown bug state in outcome line");
        o.observations.push_back({b.at("bug_id").get<std::string>(), *state});
    }
    const auto& term = doc.at("termination");
    std::string kind = term.at("kind").get<std::string>();
    for (auto k : {TerminationKind::HaltedNormally, TerminationKind::InputExhausted,
                   TerminationKind::Crash, TerminationKind::StepLimit,
                   TerminationKind::OracleAbort})
        if (termination_kind_name(k) == kind) o.termination.kind = k;
    if (term.contains("reason")) {
        std::string reason = term["reason"].get<std::string>();
        for (auto r : {CrashReason::UnmappedRead, CrashReason::UnmappedWrite,
                       CrashReason::ExecOutsideRom, CrashReason::InvalidOpcode,
                       CrashReason::StackUnderflow})
            if (crash_reason_name(r) == reason) o.termination.reason = r;
    }
    o.termination.pc = term.value("pc", uint64_t{0});
    o.termination.lr = term.value("lr", uint64_t{0});
    if (term.contains("shadow_stack"))
        o.termination.shadow_stack = term["shadow_stack"].get<std::vector<uint64_t>>();
    o.termination.bug_id = term.value("bug_id", "");
    if (doc.contains("crash_sig_pc_lr")) {
        const auto& sig = doc["crash_sig_pc_lr"];
        o.crash_sig_pc_lr = {sig.at(0).get<uint64_t>(), sig.at(1).get<uint64_t>()};
    }
    if (doc.contains("crash_sig_stack"))
        o.crash_sig_stack = doc["crash_sig_stack"].get<uint64_t>();
    o.covered_blocks = doc.at("covered_blocks").get<std::set<uint64_t>>();
    if (doc.contains("first_triggered"))
        o.first_triggered = doc["first_triggered"].get<std::string>();
    const auto& flags = doc.at("flags");
    o.multi_bug = flags.at("multi_bug").get<bool>();
    o.label_mismatch = flags.at("label_mismatch").get<bool>();
    if (flags.contains("diagnostics"))
        o.diagnostics = flags["diagnostics"].get<std::vector<std::string>>();
    return o;
}

inline void write_outcomes_jsonl(const std::string& path,
                                 const std::vector<ReplayOutcome>& outcomes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& o : outcomes) out << outcome_to_json(o).dump() << "\n";
}

inline std::vector<ReplayOutcome> read_outcomes_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<ReplayOutcome> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": invalid outcome line");
        out.push_back(outcome_from_json(doc));
    }
    return out;
}

// ---- replay metadata sidecar ----------------------------------------------
//
// Keeps campaign context (who fuzzed, when inputs arrived, which bugs are
// decoys) next to the outcome stream without polluting the per-input schema.

struct ReplayMeta {
    std::string target_hash;
    std::string fuzzer_name;
    int trial_index = 0;
    std::vector<RavenMeta> bugs;
    struct InputInfo {
        std::string input_id;
        double timestamp_s = 0;
        InputLabel label = InputLabel::Queue;
    };
    std::vector<InputInfo> inputs;
    std::vector<std::string> warnings;
};

inline constexpr const char* kReplayMetaSchema = "frb_replay_meta_v1";

inline nlohmann::ordered_json replay_meta_to_json(const ReplayMeta& m) {
    using J = nlohmann::ordered_json;
    J doc;
    doc["schema"] = kReplayMetaSchema;
    doc["target_hash"] = m.target_hash;
    doc["fuzzer"] = m.fuzzer_name;
    doc["trial_index"] = m.trial_index;
    J bugs = J::array();
    for (const auto& b : m.bugs) {
        J e;
        e["bug_id"] = b.bug_id;
        e["false_positive"] = b.false_positive;
        if (!b.cwe.empty()) e["cwe"] = b.cwe;
        e["active"] = b.active;
        bugs.push_back(std::move(e));
    }
    doc["bugs"] = std::move(bugs);
    J inputs = J::array();
    for (const auto& i : m.inputs)
        inputs.push_back(J{{"input_id", i.input_id},
                           {"timestamp_s", i.timestamp_s},
                           {"label", i.label == InputLabel::Crash ? "crash" : "queue"}});
    doc["inputs"] = std::move(inputs);
    if (!m.warnings.empty()) doc["warnings"] = m.warnings;
    return doc;
}

inline ReplayMeta replay_meta_from_json(const nlohmann::json& doc) {
    if (doc.value("schema", "") != kReplayMetaSchema)
        throw std::runtime_error("unrecognized replay metadata schema");
    ReplayMeta m;
    m.target_hash = doc.at("target_hash").get<std::string>();
    m.fuzzer_name = doc.at("fuzzer").get<std::string>();
    m.trial_index = doc.at("trial_index").get<int>();
    for (const auto& b : doc.at("bugs")) {
        RavenMeta rm;
        rm.bug_id = b.at("bug_id").get<std::string>();
        rm.false_positive = b.at("false_positive").get<bool>();
        rm.cwe = b.value("cwe", "");
        rm.active = b.value("active", true);
        m.bugs.push_back(std::move(rm));
    }
    for (const auto& i : doc.at("inputs")) {
        ReplayMeta::InputInfo info;
        info.input_id = i.at("input_id").get<std::string>();
        info.timestamp_s = i.at("timestamp_s").get<double>();
        info.label =
            i.at("label").get<std::string>() == "crash" ? InputLabel::Crash : InputLabel::Queue;
        m.inputs.push_back(std::move(info));
    }
    if (doc.contains("warnings"))
        m.warnings = doc["warnings"].get<std::vector<std::string>>();
    return m;
}

inline ReplayMeta make_replay_meta(const TargetImage& image, const RavenSet& ravens,
                                   const std::vector<InputRecord>& records,
                                   const std::string& fuzzer_name, int trial_index,
                                   std::vector<std::string> warnings = {}) {
    ReplayMeta m;
    m.target_hash = target_hash_hex(image);
    m.fuzzer_name = fuzzer_name;
    m.trial_index = trial_index;
    for (const auto& id : ravens.bug_ids()) {
        auto it = ravens.meta.find(id);
        if (it != ravens.meta.end()) {
            m.bugs.push_back(it->second);
        } else {
            RavenMeta rm;
            rm.bug_id = id;
            m.bugs.push_back(std::move(rm));
        }
    }
    for (const auto& r : records)
        m.inputs.push_back({r.input_id, r.timestamp_s, r.label});
    m.warnings = std::move(warnings);
    return m;
}

inline void write_replay_meta(const std::string& path, const ReplayMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << replay_meta_to_json(meta).dump(2) << "\n";
}

inline ReplayMeta read_replay_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw std::runtime_error("invalid replay metadata: " + path);
    return replay_meta_from_json(doc);
}

} // namespace frb
