#pragma once

// Bug-state bookkeeping on top of the Raven interpreter.
//
// Per input, each bug climbs a lattice NotReached < Reached < Triggered <
// Detected and its final state is the maximum over all hook observations.
// A trigger report without a prior reach report still implies the bug was
// reached. Detection is decided at finalization: a bug whose trigger
// condition fired is Detected when the input's replay ended in a crash (or
// in an oracle abort attributed to that bug). In Live mode a trigger of an
// active bug aborts execution at the hook, before the hooked instruction.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "frb/emulator_api.hpp"
#include "frb/raven_eval.hpp"
#include "frb/raven_parser.hpp"

namespace frb {

enum class BugState { NotReached = 0, Reached = 1, Triggered = 2, Detected = 3 };

inline const char* bug_state_name(BugState s) {
    switch (s) {
        case BugState::NotReached: return "not_reached";
        case BugState::Reached: return "reached";
        case BugState::Triggered: return "triggered";
        case BugState::Detected: return "detected";
    }
    return "?";
}

inline std::optional<BugState> bug_state_from_name(const std::string& s) {
    for (BugState st : {BugState::NotReached, BugState::Reached, BugState::Triggered,
                        BugState::Detected})
        if (s == bug_state_name(st)) return st;
    return std::nullopt;
}

enum class InputLabel { Queue, Crash };

enum class OracleMode { Replay, Live };

struct RavenMeta {
    std::string bug_id;
    std::string cwe;
    bool false_positive = false;
    bool active = false;
};

struct RavenLoadError : std::runtime_error {
    explicit RavenLoadError(const std::string& what) : std::runtime_error(what) {}
};

// A parsed oracle set: programs plus per-bug metadata. Bug IDs starting with
// FP_ are false positives by convention; a sidecar JSON can override.
struct RavenSet {
    std::vector<RavenProgram> programs;
    std::map<std::string, RavenMeta> meta;
    std::vector<Diagnostic> warnings;

    std::vector<std::string> bug_ids() const {
        std::set<std::string> ids;
        for (const auto& p : programs)
            for (const auto& id : p.declared_bug_ids()) ids.insert(id);
        for (const auto& [id, m] : meta) ids.insert(id);
        return {ids.begin(), ids.end()};
    }

    void add_program(RavenProgram prog) {
        for (const auto& id : prog.declared_bug_ids())
            if (!meta.count(id))
                meta[id] = {id, "", id.rfind("FP_", 0) == 0, false};
        programs.push_back(std::move(prog));
    }
};

namespace oracle_detail {

inline void merge_meta_json(RavenSet& set, const nlohmann::json& doc,
                            const std::string& origin) {
    auto apply = [&](const nlohmann::json& obj) {
        if (!obj.is_object() || !obj.contains("bug_id"))
            throw RavenLoadError(origin + ": metadata entries need a bug_id");
        std::string id = obj.at("bug_id").get<std::string>();
        RavenMeta& m = set.meta[id];
        m.bug_id = id;
        if (m.cwe.empty() && !obj.value("cwe", std::string()).empty())
            m.cwe = obj.at("cwe").get<std::string>();
        if (obj.contains("false_positive")) m.false_positive = obj.at("false_positive").get<bool>();
        else if (id.rfind("FP_", 0) == 0) m.false_positive = true;
        if (obj.contains("active")) m.active = obj.at("active").get<bool>();
    };
    if (doc.is_array())
        for (const auto& e : doc) apply(e);
    else
        apply(doc);
}

} // namespace oracle_detail

// Loads every *.raven in a directory (sorted by name, which fixes hook
// registration order) together with optional *.json metadata sidecars.
inline RavenSet load_raven_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    RavenSet set;
    if (!fs::is_directory(dir))
        throw RavenLoadError("raven directory does not exist: " + dir);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".raven")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        std::ifstream in(path);
        std::string src((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        ParseResult res = parse_raven(src, path.filename().string());
        for (const auto& d : res.diagnostics)
            if (d.severity == Diagnostic::Severity::Warning) set.warnings.push_back(d);
        if (!res.ok())
            throw RavenLoadError(res.first_error());
        set.add_program(std::move(*res.program));

        fs::path sidecar = path;
        sidecar.replace_extension(".json");
        if (fs::is_regular_file(sidecar)) {
            std::ifstream meta_in(sidecar);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(meta_in);
            } catch (const nlohmann::json::exception& ex) {
                throw RavenLoadError(sidecar.string() + ": " + ex.what());
            }
            oracle_detail::merge_meta_json(set, doc, sidecar.string());
        }
    }
    return set;
}

struct BugObservation {
    std::string bug_id;
    BugState state = BugState::NotReached;

    bool operator==(const BugObservation&) const = default;
};

struct FinalizedInput {
    std::vector<BugObservation> observations;   // sorted by bug_id, full universe
    std::optional<std::string> first_triggered; // hook-dispatch-order first
    bool multi_bug = false;
    bool label_mismatch = false;
};

// Drives one input's oracle evaluation against one backend session. Raven
// globals persist across hooks within the input and die with the session.
class OracleSession {
public:
    // `active_override`, when present, replaces the metadata-derived set of
    // bugs armed for Live-Mode aborts (it may narrow or widen it).
    OracleSession(const RavenSet& set, OracleMode mode,
                  std::optional<std::set<std::string>> active_override = std::nullopt,
                  uint64_t step_budget = kDefaultHookStepBudget)
        : set_(set), mode_(mode), budget_(step_budget) {
        for (const auto& id : set.bug_ids()) states_[id] = BugState::NotReached;
        if (active_override) {
            active_ = std::move(*active_override);
        } else {
            for (const auto& [id, m] : set.meta)
                if (m.active) active_.insert(id);
        }
        globals_.reserve(set.programs.size());
        for (const auto& p : set.programs) globals_.push_back(make_globals(p));
    }

    // Registers every reflection entry with the backend. Throws BackendError
    // annotated with the Raven's origin when an address is rejected.
    void attach(BackendSession& backend) {
        for (size_t i = 0; i < set_.programs.size(); i++) {
            const RavenProgram& prog = set_.programs[i];
            for (const auto& entry : prog.reflection_table) {
                std::string hook_id = prog.origin + ":" + entry.function_name;
                try {
                    backend.register_hook(
                        entry.address, hook_id,
                        [this, i, fn = entry.function_name](BackendSession& b) {
                            return fire(i, fn, b);
                        });
                } catch (const BackendError& err) {
                    throw BackendError(std::string(err.what()) + " (from " + prog.origin + ")");
                }
            }
        }
    }

    FinalizedInput finalize(const ExecutionResult& result, InputLabel label) const {
        std::map<std::string, BugState> final_states = states_;

        if (result.termination.kind == TerminationKind::Crash) {
            for (auto& [id, st] : final_states)
                if (st >= BugState::Triggered) st = BugState::Detected;
        } else if (result.termination.kind == TerminationKind::OracleAbort) {
            auto it = final_states.find(result.termination.bug_id);
            if (it != final_states.end() && it->second >= BugState::Triggered)
                it->second = BugState::Detected;
        }

        FinalizedInput fin;
        for (const auto& [id, st] : final_states) fin.observations.push_back({id, st});
        if (!trigger_order_.empty()) fin.first_triggered = trigger_order_.front();
        fin.multi_bug = trigger_order_.size() >= 2;
        bool crashed = result.termination.kind == TerminationKind::Crash ||
                       result.termination.kind == TerminationKind::OracleAbort;
        fin.label_mismatch = (label == InputLabel::Crash) != crashed;
        return fin;
    }

    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

    // Test support: every state transition in observation order.
    struct FireEvent {
        std::string bug_id;
        BugState state;
    };
    const std::vector<FireEvent>& fire_log() const { return fire_log_; }
    BugState state_of(const std::string& bug) const {
        auto it = states_.find(bug);
        return it == states_.end() ? BugState::NotReached : it->second;
    }

private:
    HookAction fire(size_t program_idx, const std::string& function_name,
                    BackendSession& backend) {
        IntrinsicBinding binding;
        binding.reg_state = [&backend](uint64_t reg) { return backend.read_register(reg); };
        binding.mem_read = [&backend](uint64_t addr, uint64_t size) {
            return backend.read_memory(addr, size);
        };
        std::optional<std::string> abort_bug;
        binding.report_reached = [this](const std::string& id) {
            raise(id, BugState::Reached);
        };
        binding.report_detected_triggered = [this, &abort_bug](const std::string& id) {
            raise(id, BugState::Triggered);
            if (mode_ == OracleMode::Live && active_.count(id) && !abort_bug)
                abort_bug = id;
        };

        HookEvalResult res = eval_hook(set_.programs[program_idx], function_name, binding,
                                       globals_[program_idx], budget_);
        if (res.diagnostic)
            diagnostics_.push_back(set_.programs[program_idx].origin + ": " + *res.diagnostic);

        if (abort_bug) return HookAction::abort_for(*abort_bug);
        return HookAction::proceed();
    }

    void raise(const std::string& id, BugState at_least) {
        BugState& st = states_[id];
        bool newly_triggered = at_least >= BugState::Triggered && st < BugState::Triggered;
        st = std::max(st, at_least);
        if (newly_triggered) trigger_order_.push_back(id);
        fire_log_.push_back({id, at_least});
    }

    const RavenSet& set_;
    OracleMode mode_;
    uint64_t budget_;
    std::set<std::string> active_;
    std::vector<GlobalsState> globals_;
    std::map<std::string, BugState> states_;
    std::vector<std::string> trigger_order_;
    std::vector<std::string> diagnostics_;
    std::vector<FireEvent> fire_log_;
};

} // namespace frb
