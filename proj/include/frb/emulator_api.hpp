#pragma once

// Backend-neutral emulator session contract, version 1.
//
// A backend adapter exposes exactly this surface: address hooks that fire
// before the hooked instruction executes, read-only register and memory
// introspection usable from inside a hook, and a run loop that reports how
// an input's execution terminated. docs/backend_api.md carries the prose
// description for out-of-tree adapter authors.

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "frb/value.hpp"

namespace frb {

constexpr int kBackendApiVersion = 1;

struct BackendError : std::runtime_error {
    explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

enum class CrashReason {
    UnmappedRead,
    UnmappedWrite,
    ExecOutsideRom,
    InvalidOpcode,
    StackUnderflow,
};

inline const char* crash_reason_name(CrashReason r) {
    switch (r) {
        case CrashReason::UnmappedRead: return "unmapped_read";
        case CrashReason::UnmappedWrite: return "unmapped_write";
        case CrashReason::ExecOutsideRom: return "exec_outside_rom";
        case CrashReason::InvalidOpcode: return "invalid_opcode";
        case CrashReason::StackUnderflow: return "stack_underflow";
    }
    return "?";
}

enum class TerminationKind {
    HaltedNormally,
    InputExhausted,
    Crash,
    StepLimit,
    OracleAbort,    // only ever produced by a Live-Mode oracle
};

inline const char* termination_kind_name(TerminationKind k) {
    switch (k) {
        case TerminationKind::HaltedNormally: return "halted_normally";
        case TerminationKind::InputExhausted: return "input_exhausted";
        case TerminationKind::Crash: return "crash";
        case TerminationKind::StepLimit: return "step_limit";
        case TerminationKind::OracleAbort: return "oracle_abort";
    }
    return "?";
}

struct Termination {
    TerminationKind kind = TerminationKind::HaltedNormally;
    CrashReason reason = CrashReason::UnmappedRead;  // Crash only
    uint64_t pc = 0;                                 // Crash: fault site
    uint64_t lr = 0;                                 // Crash: link register at fault
    std::vector<uint64_t> shadow_stack;              // Crash: frames, entry first
    std::string bug_id;                              // OracleAbort only

    bool operator==(const Termination&) const = default;
};

struct ExecutionResult {
    Termination termination;
    uint64_t instructions_executed = 0;
    std::set<uint64_t> covered_blocks;   // block-start addresses, see docs

    bool operator==(const ExecutionResult&) const = default;
};

struct RunLimits {
    uint64_t max_instructions = 10'000'000;
};

// A hook decides whether execution continues; aborting attributes the stop
// to a bug (Live-Mode safeguards).
struct HookAction {
    bool abort = false;
    std::string bug_id;

    static HookAction proceed() { return {}; }
    static HookAction abort_for(std::string bug) { return {true, std::move(bug)}; }
};

struct BackendCapabilities {
    bool shadow_stack = false;
    bool interrupts = false;
};

class BackendSession {
public:
    virtual ~BackendSession() = default;

    virtual BackendCapabilities capabilities() const = 0;

    // Registers a pre-instruction hook. Hooks at one address fire in
    // registration order. Throws BackendError if `address` is outside the
    // executable region.
    virtual void register_hook(uint64_t address, std::string hook_id,
                               std::function<HookAction(BackendSession&)> fn) = 0;

    // Introspection, valid while paused at a hook. Never perturbs the target:
    // reads do not consume input or touch device state.
    // read_register yields the value zero-extended to 64 bits; unknown
    // register ids throw IntrinsicError (as do bad widths / unmapped reads).
    virtual Value read_register(uint64_t reg_id) = 0;
    virtual Value read_memory(uint64_t addr, uint64_t size) = 0;

    // Runs one input to termination. A session instance runs one input.
    virtual ExecutionResult run(std::span<const uint8_t> input, const RunLimits& limits) = 0;

    // Digest of all mutable machine state; equal digests before/after an
    // introspection call demonstrate the call was pure.
    virtual uint64_t state_fingerprint() const = 0;
};

} // namespace frb
