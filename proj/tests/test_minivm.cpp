// VM behavior: ISA semantics, device-port input consumption, crash
// classification, hooks, introspection purity, interrupts, and block
// coverage.

#include <catch2/catch_amalgamated.hpp>

#include "frb/assembler.hpp"
#include "frb/minivm.hpp"

using frb::CrashReason;
using frb::TerminationKind;

namespace {

struct Built {
    frb::TargetImage img;
    std::map<std::string, uint32_t> labels;
};

Built build(const std::string& src) {
    Built b;
    b.img = frb::assemble(src, "test.asm", &b.labels);
    return b;
}

frb::ExecutionResult run_program(const std::string& src, std::vector<uint8_t> input = {},
                                 frb::RunLimits limits = {}) {
    Built b = build(src);
    frb::MiniVm vm(b.img);
    return vm.run(input, limits);
}

uint64_t reg_at(const std::string& src, uint32_t hook_addr, uint64_t reg,
                std::vector<uint8_t> input = {}) {
    Built b = build(src);
    frb::MiniVm vm(b.img);
    uint64_t got = ~uint64_t(0);
    vm.register_hook(hook_addr, "probe", [&](frb::BackendSession& s) {
        got = s.read_register(reg).as_unsigned();
        return frb::HookAction::proceed();
    });
    vm.run(input, {});
    return got;
}

} // namespace

TEST_CASE("alu and move semantics") {
    const char* src = R"(
.entry 0
    movi r1, #7
    movi r2, #3
    add  r3, r1, r2
    sub  r4, r1, r2
    mul  r5, r1, r2
    and  r6, r1, r2
    or   r7, r1, r2
    xor  r8, r1, r2
    movi r9, #1
    shl  r10, r2, r9
    shr  r11, r1, r9
    mov  r12, r3
done:
    halt
)";
    Built b = build(src);
    frb::MiniVm vm(b.img);
    std::map<uint64_t, uint64_t> regs;
    vm.register_hook(b.labels.at("done"), "probe", [&](frb::BackendSession& s) {
        for (uint64_t r = 0; r <= 15; r++) regs[r] = s.read_register(r).as_unsigned();
        return frb::HookAction::proceed();
    });
    auto res = vm.run({}, {});
    CHECK(res.termination.kind == TerminationKind::HaltedNormally);
    CHECK(regs[3] == 10);
    CHECK(regs[4] == 4);
    CHECK(regs[5] == 21);
    CHECK(regs[6] == 3);
    CHECK(regs[7] == 7);
    CHECK(regs[8] == 4);
    CHECK(regs[10] == 6);
    CHECK(regs[11] == 3);
    CHECK(regs[12] == 10);
}

TEST_CASE("arithmetic wraps at 32 bits; sub borrows wrap") {
    const char* src = R"(
.entry 0
    movi r1, #0xffffffff
    movi r2, #1
    add  r3, r1, r2
    movi r4, #0
    sub  r5, r4, r2
chk:
    halt
)";
    Built b = build(src);
    frb::MiniVm vm(b.img);
    uint64_t r3 = 1, r5 = 0;
    vm.register_hook(b.labels.at("chk"), "probe", [&](frb::BackendSession& s) {
        r3 = s.read_register(3).as_unsigned();
        r5 = s.read_register(5).as_unsigned();
        return frb::HookAction::proceed();
    });
    vm.run({}, {});
    CHECK(r3 == 0);
    CHECK(r5 == 0xffffffffull);
}

TEST_CASE("device port consumes input little-endian and writes through") {
    const char* src = R"(
.entry 0
    movi r1, #0x40000000
    ldw  r2, [r1]
    ldb  r3, [r1+0x10]
chk:
    halt
)";
    Built b = build(src);
    frb::MiniVm vm(b.img);
    uint64_t r2 = 0, r3 = 0, backing = 0, far_backing = 1;
    vm.register_hook(b.labels.at("chk"), "probe", [&](frb::BackendSession& s) {
        r2 = s.read_register(2).as_unsigned();
        r3 = s.read_register(3).as_unsigned();
        backing = s.read_memory(0x40000000, 4).as_unsigned();
        far_backing = s.read_memory(0x40000800, 4).as_unsigned();
        return frb::HookAction::proceed();
    });
    auto res = vm.run(std::vector<uint8_t>{0x11, 0x22, 0x33, 0x44, 0xaa}, {});
    CHECK(res.termination.kind == TerminationKind::HaltedNormally);
    CHECK(r2 == 0x44332211);
    CHECK(r3 == 0xaa);
    CHECK(backing == 0x44332211);  // write-through visible to introspection
    CHECK(far_backing == 0);       // untouched port bytes read back zero
}

TEST_CASE("input exhaustion ends the run, even mid-word") {
    auto res = run_program(R"(
.entry 0
    movi r1, #0x40000000
    ldw  r2, [r1]
    halt
)",
                           {0x01, 0x02, 0x03}); // one byte short
    CHECK(res.termination.kind == TerminationKind::InputExhausted);
}

TEST_CASE("ram loads and stores round-trip; sp starts at top of ram") {
    const char* src = R"(
.entry 0
    movi r1, #0x20000040
    movi r2, #0x12345678
    stw  r2, [r1]
    ldh  r3, [r1]
    ldb  r4, [r1+3]
    ldw  r5, [r1]
chk:
    halt
)";
    Built b = build(src);
    frb::MiniVm vm(b.img);
    uint64_t r3 = 0, r4 = 0, r5 = 0, sp = 0;
    vm.register_hook(b.labels.at("chk"), "probe", [&](frb::BackendSession& s) {
        r3 = s.read_register(3).as_unsigned();
        r4 = s.read_register(4).as_unsigned();
        r5 = s.read_register(5).as_unsigned();
        sp = s.read_register(13).as_unsigned();
        return frb::HookAction::proceed();
    });
    vm.run({}, {});
    CHECK(r3 == 0x5678);
    CHECK(r4 == 0x12);
    CHECK(r5 == 0x12345678);
    CHECK(sp == 0x20000000ull + 0x10000);
}

TEST_CASE("crash classification") {
    SECTION("unmapped write") {
        auto res = run_program(".entry 0\nmovi r1, #0x50000000\nstw r1, [r1]\nhalt\n");
        REQUIRE(res.termination.kind == TerminationKind::Crash);
        CHECK(res.termination.reason == CrashReason::UnmappedWrite);
        CHECK(res.termination.pc == 8);
    }
    SECTION("unmapped read") {
        auto res = run_program(".entry 0\nmovi r1, #0x90000000\nldw r2, [r1]\nhalt\n");
        REQUIRE(res.termination.kind == TerminationKind::Crash);
        CHECK(res.termination.reason == CrashReason::UnmappedRead);
    }
    SECTION("write into rom is rejected") {
        auto res = run_program(".entry 0\nmovi r1, #0\nstw r1, [r1]\nhalt\n");
        REQUIRE(res.termination.kind == TerminationKind::Crash);
        CHECK(res.termination.reason == CrashReason::UnmappedWrite);
    }
    SECTION("jump outside rom reports the bad target as pc") {
        auto res = run_program(".entry 0\nmovi r1, #0xdead0000\njmpr r1\nhalt\n");
        REQUIRE(res.termination.kind == TerminationKind::Crash);
        CHECK(res.termination.reason == CrashReason::ExecOutsideRom);
        CHECK(res.termination.pc == 0xdead0000);
        // the unfetchable target is not coverage
        CHECK_FALSE(res.covered_blocks.count(0xdead0000));
    }
    SECTION("invalid opcode") {
        auto res = run_program(".entry 0\nmovi r1, #1\n.word 0xff\n.word 0\nhalt\n");
        REQUIRE(res.termination.kind == TerminationKind::Crash);
        CHECK(res.termination.reason == CrashReason::InvalidOpcode);
        CHECK(res.termination.pc == 8);
    }
    SECTION("ret with no frame") {
        auto res = run_program(".entry 0\nret\n");
        REQUIRE(res.termination.kind == TerminationKind::Crash);
        CHECK(res.termination.reason == CrashReason::StackUnderflow);
    }
    SECTION("crash captures lr and full shadow stack, outermost first") {
        auto res = run_program(R"(
.entry 0
    call a
    halt
a:
    call b
    ret
b:
    movi r1, #0x50000000
    stw  r1, [r1]
    ret
)");
        REQUIRE(res.termination.kind == TerminationKind::Crash);
        CHECK(res.termination.shadow_stack == std::vector<uint64_t>{8, 24});
        CHECK(res.termination.lr == 24); // set by the inner call
    }
}

TEST_CASE("step limit terminates long runs") {
    auto res = run_program(".entry 0\nspin: jmp spin\n", {}, frb::RunLimits{100});
    CHECK(res.termination.kind == TerminationKind::StepLimit);
    CHECK(res.instructions_executed == 100);
}

TEST_CASE("introspection rejects bad register ids and widths") {
    Built b = build(".entry 0\nchk: halt\n");
    frb::MiniVm vm(b.img);
    bool checked = false;
    vm.register_hook(b.labels.at("chk"), "probe", [&](frb::BackendSession& s) {
        CHECK_THROWS_AS(s.read_register(99), frb::IntrinsicError);
        CHECK_THROWS_AS(s.read_register(16), frb::IntrinsicError);
        CHECK_THROWS_AS(s.read_memory(0x20000000, 3), frb::IntrinsicError);
        CHECK_THROWS_AS(s.read_memory(0x20000000, 0), frb::IntrinsicError);
        CHECK_THROWS_AS(s.read_memory(0x90000000, 4), frb::IntrinsicError);
        // reads straddling the end of a region are unmapped too
        CHECK_THROWS_AS(s.read_memory(0x40000fff, 2), frb::IntrinsicError);
        CHECK(s.read_memory(0x40000fff, 1).as_unsigned() == 0);
        // rom bytes are readable
        CHECK(s.read_memory(0, 1).as_unsigned() == 0x7f); // the halt opcode at entry
        checked = true;
        return frb::HookAction::proceed();
    });
    vm.run({}, {});
    REQUIRE(checked);
}

TEST_CASE("hooks fire before their instruction, in registration order, every pass") {
    const char* src = R"(
.entry 0
    movi r2, #3
loop:
    movi r9, #1
target:
    sub  r2, r2, r9
    movi r8, #0
    cmp  r2, r8
    bne  loop
    halt
)";
    Built b = build(src);
    frb::MiniVm vm(b.img);
    std::vector<std::string> order;
    std::vector<uint64_t> r2_seen;
    vm.register_hook(b.labels.at("target"), "first", [&](frb::BackendSession& s) {
        order.push_back("first");
        r2_seen.push_back(s.read_register(2).as_unsigned());
        return frb::HookAction::proceed();
    });
    vm.register_hook(b.labels.at("target"), "second", [&](frb::BackendSession&) {
        order.push_back("second");
        return frb::HookAction::proceed();
    });
    auto res = vm.run({}, {});
    CHECK(res.termination.kind == TerminationKind::HaltedNormally);
    REQUIRE(order.size() == 6); // 3 loop passes, two hooks each
    CHECK(order == std::vector<std::string>{"first", "second", "first", "second", "first",
                                            "second"});
    // pre-instruction: the sub has not executed yet on each pass
    CHECK(r2_seen == std::vector<uint64_t>{3, 2, 1});
}

TEST_CASE("hook registration outside the executable region is rejected") {
    Built b = build(".entry 0\nhalt\n");
    frb::MiniVm vm(b.img);
    CHECK_THROWS_AS(
        vm.register_hook(0x20000000, "bad", [](frb::BackendSession&) {
            return frb::HookAction::proceed();
        }),
        frb::BackendError);
    CHECK_THROWS_AS(
        vm.register_hook(b.img.rom.size(), "past-end", [](frb::BackendSession&) {
            return frb::HookAction::proceed();
        }),
        frb::BackendError);
}

TEST_CASE("hook introspection is pure: fingerprint unchanged, input not consumed") {
    const char* src = R"(
.entry 0
    movi r1, #0x40000000
probe_at:
    ldb  r2, [r1]
    ldb  r3, [r1]
chk:
    halt
)";
    Built b = build(src);
    frb::MiniVm vm(b.img);
    vm.register_hook(b.labels.at("probe_at"), "probe", [&](frb::BackendSession& s) {
        uint64_t before = s.state_fingerprint();
        s.read_register(1);
        s.read_memory(0x40000000, 4); // device-port backing read must not consume
        s.read_memory(0x20000000, 8);
        s.read_memory(0, 4);
        uint64_t after = s.state_fingerprint();
        CHECK(before == after);
        return frb::HookAction::proceed();
    });
    uint64_t r2 = 0, r3 = 0;
    vm.register_hook(b.labels.at("chk"), "chk", [&](frb::BackendSession& s) {
        r2 = s.read_register(2).as_unsigned();
        r3 = s.read_register(3).as_unsigned();
        return frb::HookAction::proceed();
    });
    auto res = vm.run(std::vector<uint8_t>{0x5a, 0xa5}, {});
    CHECK(res.termination.kind == TerminationKind::HaltedNormally);
    CHECK(r2 == 0x5a); // the program still saw both bytes, in order
    CHECK(r3 == 0xa5);
}

TEST_CASE("aborting hook stops the run and attributes the bug") {
    Built b = build(".entry 0\nmovi r1, #1\ntrip: halt\n");
    frb::MiniVm vm(b.img);
    vm.register_hook(b.labels.at("trip"), "t", [](frb::BackendSession&) {
        return frb::HookAction::abort_for("BUG_X");
    });
    auto res = vm.run({}, {});
    CHECK(res.termination.kind == TerminationKind::OracleAbort);
    CHECK(res.termination.bug_id == "BUG_X");
    // the hooked instruction never executed
    CHECK(res.instructions_executed == 1);
    CHECK_FALSE(res.covered_blocks.count(b.labels.at("trip")));
}

TEST_CASE("a session runs exactly one input") {
    Built b = build(".entry 0\nhalt\n");
    frb::MiniVm vm(b.img);
    vm.run({}, {});
    CHECK_THROWS_AS(vm.run({}, {}), frb::BackendError);
}

TEST_CASE("interrupts bank pc, lr, and flags; handler runs between instructions") {
    const char* src = R"(
.entry start
.handler h
.period 3
start:
    movi r1, #5
    movi r2, #5
    cmp  r1, r2
    beq  good
    halt
good:
    halt
h:
    movi r3, #1
    movi r4, #2
    cmp  r3, r4
    ret
)";
    Built b = build(src);
    frb::MiniVm vm(b.img);
    auto res = vm.run({}, {});
    CHECK(res.termination.kind == TerminationKind::HaltedNormally);
    // The interrupt fired after the cmp; the handler's cmp clears eq, yet
    // the banked flags are restored so beq still takes its branch.
    CHECK(res.covered_blocks.count(b.labels.at("good")));
    // the vector target counts as a block
    CHECK(res.covered_blocks.count(b.labels.at("h")));
}

TEST_CASE("interrupts do not nest and do not refire at the same count") {
    const char* src = R"(
.entry start
.handler h
.period 2
start:
    movi r1, #0
    movi r1, #1
    movi r1, #2
    movi r1, #3
    movi r1, #4
    halt
h:
    movi r2, #0x20000000
    ldw  r3, [r2]
    ret
)";
    // Handler body is 3 instructions; with period 2, counts 4, 8, and 12
    // land inside a handler run and must not nest (nesting would never
    // terminate). The same-count guard also keeps the entry check from
    // refiring immediately after vectoring.
    Built b = build(src);
    frb::MiniVm vm(b.img);
    int handler_entries = 0;
    vm.register_hook(b.labels.at("h"), "h", [&](frb::BackendSession&) {
        handler_entries++;
        return frb::HookAction::proceed();
    });
    auto res = vm.run({}, {});
    CHECK(res.termination.kind == TerminationKind::HaltedNormally);
    // fires at counts 2, 6, 10, 14: one per remaining main instruction,
    // since each handler pass itself advances the count past odd parity
    CHECK(handler_entries == 4);
}

TEST_CASE("changing the timer period moves the interrupted frame") {
    frb::TargetImage base = frb::load_image_file(
        std::string(FRB_SOURCE_DIR) + "/fixtures/targets/irq_timing.img");
    std::vector<uint8_t> input = {0xee};

    frb::MiniVm vm40(base);
    auto r40 = vm40.run(input, {});

    frb::TargetImage alt = base;
    alt.period = 56;
    frb::MiniVm vm56(alt);
    auto r56 = vm56.run(input, {});

    REQUIRE(r40.termination.kind == TerminationKind::Crash);
    REQUIRE(r56.termination.kind == TerminationKind::Crash);
    // same fault site and lr (the shared helper), different interrupted frame
    CHECK(r40.termination.pc == r56.termination.pc);
    CHECK(r40.termination.lr == r56.termination.lr);
    CHECK(r40.termination.shadow_stack != r56.termination.shadow_stack);
}

TEST_CASE("block coverage records entry and taken-transfer targets only") {
    const char* src = R"(
.entry start
start:
    movi r1, #1
    movi r2, #2
    cmp  r1, r2
    beq  never
    call sub
after_call:
    halt
never:
    halt
sub:
    ret
)";
    Built b = build(src);
    frb::MiniVm vm(b.img);
    auto res = vm.run({}, {});
    CHECK(res.termination.kind == TerminationKind::HaltedNormally);
    std::set<uint64_t> want = {b.labels.at("start"), b.labels.at("sub"),
                               b.labels.at("after_call")};
    CHECK(res.covered_blocks == want);
    // fall-through past the untaken beq is NOT a block boundary, and the
    // untaken target is absent
    CHECK_FALSE(res.covered_blocks.count(b.labels.at("never")));
}

TEST_CASE("coverage equals the set of transfer targets seen in the trace") {
    // Cross-check coverage against the full instruction trace: a covered
    // block is exactly an executed pc that was entered by a transfer (or the
    // entry), never by fall-through.
    frb::TargetImage img = frb::load_image_file(std::string(FRB_SOURCE_DIR) +
                                                "/fixtures/targets/overflow.img");
    std::vector<uint8_t> input = {9, 'A', 'A', 'A', 'A', 'A', 'A', 'A', 'A'};
    frb::MiniVm vm(img);
    std::vector<uint32_t> trace;
    vm.enable_trace(trace);
    auto res = vm.run(input, {});
    REQUIRE_FALSE(trace.empty());
    std::set<uint64_t> from_trace = {trace[0]};
    for (size_t i = 1; i < trace.size(); i++)
        if (trace[i] != trace[i - 1] + frb::kInstrBytes) from_trace.insert(trace[i]);
    CHECK(res.covered_blocks == from_trace);
}

TEST_CASE("custom ram size bounds the writable region") {
    auto res = run_program(R"(
.entry 0
.ram 0x40
    movi r1, #0x20000040
    stw  r1, [r1]
    halt
)");
    REQUIRE(res.termination.kind == TerminationKind::Crash);
    CHECK(res.termination.reason == CrashReason::UnmappedWrite);
}

TEST_CASE("malformed images are rejected at construction") {
    frb::TargetImage empty;
    CHECK_THROWS_AS(frb::MiniVm(empty), frb::BackendError);

    frb::TargetImage bad_entry = frb::assemble(".entry 0\nhalt\n");
    bad_entry.entry = 0x1000;
    CHECK_THROWS_AS(frb::MiniVm(bad_entry), frb::BackendError);

    frb::TargetImage bad_handler = frb::assemble(".entry 0\nhalt\n");
    bad_handler.period = 4;
    bad_handler.handler = 0x1000;
    CHECK_THROWS_AS(frb::MiniVm(bad_handler), frb::BackendError);
}
