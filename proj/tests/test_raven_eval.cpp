// Hook evaluation semantics: report buffering, fault recovery, step budget,
// and global persistence, driven through mock intrinsic bindings.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "frb/raven_eval.hpp"
#include "frb/raven_parser.hpp"

namespace fs = std::filesystem;

namespace {

struct MockMachine {
    std::map<uint64_t, uint64_t> regs;
    std::map<uint64_t, uint8_t> mem;
    std::vector<std::string> reached, triggered;
    int reg_reads = 0, mem_reads = 0;

    frb::IntrinsicBinding binding() {
        frb::IntrinsicBinding b;
        b.reg_state = [this](uint64_t r) {
            reg_reads++;
            auto it = regs.find(r);
            if (it == regs.end()) throw frb::IntrinsicError{"unknown register"};
            return frb::Value::of_u64(it->second);
        };
        b.mem_read = [this](uint64_t addr, uint64_t size) {
            mem_reads++;
            if (size != 1 && size != 2 && size != 4 && size != 8)
                throw frb::IntrinsicError{"bad width"};
            uint64_t v = 0;
            for (uint64_t i = 0; i < size; i++) {
                auto it = mem.find(addr + i);
                if (it == mem.end()) throw frb::IntrinsicError{"unmapped"};
                v |= uint64_t(it->second) << (8 * i);
            }
            return frb::Value::of_u64(v);
        };
        b.report_reached = [this](const std::string& id) { reached.push_back(id); };
        b.report_detected_triggered = [this](const std::string& id) {
            triggered.push_back(id);
        };
        return b;
    }

    void put32(uint64_t addr, uint32_t v) {
        for (int i = 0; i < 4; i++) mem[addr + i] = uint8_t(v >> (8 * i));
    }
};

frb::RavenProgram parse(const std::string& src) {
    frb::ParseResult res = frb::parse_raven(src, "<test>");
    INFO(res.first_error());
    REQUIRE(res.ok());
    return std::move(*res.program);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("worked example: pointer-table mismatch reports both states") {
    std::string src = slurp(fs::path(FRB_SOURCE_DIR) / "fixtures/ravens/mf04/mf04.raven");
    frb::RavenProgram prog = parse(src);
    frb::GlobalsState globals = frb::make_globals(prog);

    SECTION("corrupted table entry: reached AND triggered, in source order") {
        MockMachine m;
        m.regs[0] = 0x20000100;
        m.put32(0x20000104, 0xdead0000); // != the expected handler address
        auto res = frb::eval_hook(prog, "BUG_MF04", m.binding(), globals);
        REQUIRE_FALSE(res.diagnostic.has_value());
        REQUIRE(res.reports.size() == 2);
        CHECK(res.reports[0].kind == frb::HookReport::Kind::Reached);
        CHECK(res.reports[0].bug_id == "MF04");
        CHECK(res.reports[1].kind == frb::HookReport::Kind::DetectedTriggered);
        CHECK(res.reports[1].bug_id == "MF04");
        CHECK(m.reached == std::vector<std::string>{"MF04"});
        CHECK(m.triggered == std::vector<std::string>{"MF04"});
    }

    SECTION("intact table entry: reached only") {
        MockMachine m;
        m.regs[0] = 0x20000100;
        m.put32(0x20000104, 0x0800f7e4); // the expected value
        auto res = frb::eval_hook(prog, "BUG_MF04", m.binding(), globals);
        REQUIRE_FALSE(res.diagnostic.has_value());
        REQUIRE(res.reports.size() == 1);
        CHECK(res.reports[0].kind == frb::HookReport::Kind::Reached);
        CHECK(m.triggered.empty());
    }

    SECTION("unmapped memory read faults and discards the reached report") {
        MockMachine m;
        m.regs[0] = 0x20000100; // memory left unmapped
        auto res = frb::eval_hook(prog, "BUG_MF04", m.binding(), globals);
        REQUIRE(res.diagnostic.has_value());
        CHECK(res.diagnostic->find("frb_mem_read") != std::string::npos);
        CHECK(res.reports.empty());
        CHECK(m.reached.empty()); // buffered report never flushed
        CHECK(m.triggered.empty());
    }
}

TEST_CASE("reports buffer until normal completion") {
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint32_t x;
void f() {
    report_reached("EARLY");
    x = frb_reg_state(0);
    report_detected_triggered("EARLY");
}
)");
    frb::GlobalsState globals = frb::make_globals(prog);

    MockMachine m;
    m.regs[0] = 7;
    // Arrange for the reg read to observe whether reports already flushed.
    bool reached_before_read = false;
    auto binding = m.binding();
    auto inner = binding.reg_state;
    binding.reg_state = [&](uint64_t r) {
        reached_before_read = !m.reached.empty();
        return inner(r);
    };
    auto res = frb::eval_hook(prog, "f", binding, globals);
    REQUIRE(res.reports.size() == 2);
    CHECK_FALSE(reached_before_read); // flushed only after the body finished
    CHECK(m.reached.size() == 1);
    CHECK(m.triggered.size() == 1);
}

TEST_CASE("fault restores globals to their pre-hook values") {
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint32_t counter = 10;
uint32_t scratch[2] = {1, 2};
void f() {
    counter = counter + 1;
    scratch[1] = 99;
    counter = counter / frb_reg_state(0);
}
)");
    frb::GlobalsState globals = frb::make_globals(prog);

    MockMachine m;
    m.regs[0] = 0; // division by zero
    auto res = frb::eval_hook(prog, "f", m.binding(), globals);
    REQUIRE(res.diagnostic.has_value());
    CHECK(res.diagnostic->find("division by zero") != std::string::npos);
    CHECK(globals.at("counter").cells[0].as_unsigned() == 10);
    CHECK(globals.at("scratch").cells[1].as_unsigned() == 2);

    // A successful invocation afterwards commits its mutations.
    m.regs[0] = 2;
    res = frb::eval_hook(prog, "f", m.binding(), globals);
    REQUIRE_FALSE(res.diagnostic.has_value());
    CHECK(globals.at("counter").cells[0].as_unsigned() == 5); // (10+1)/2
    CHECK(globals.at("scratch").cells[1].as_unsigned() == 99);
}

TEST_CASE("globals persist across hook invocations") {
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint64_t calls;
void f() {
    calls = calls + 1;
    if (calls == 3) {
        report_detected_triggered("THIRD");
    }
}
)");
    frb::GlobalsState globals = frb::make_globals(prog);
    MockMachine m;
    for (int i = 1; i <= 3; i++) {
        auto res = frb::eval_hook(prog, "f", m.binding(), globals);
        REQUIRE_FALSE(res.diagnostic.has_value());
        CHECK(globals.at("calls").cells[0].as_unsigned() == uint64_t(i));
    }
    CHECK(m.triggered == std::vector<std::string>{"THIRD"});
}

TEST_CASE("step budget stops runaway hooks; earlier reports still flush") {
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint32_t x;
void f() {
    report_reached("SPIN");
    while (1) {
        x = x + 1;
    }
}
)");
    frb::GlobalsState globals = frb::make_globals(prog);
    MockMachine m;
    auto res = frb::eval_hook(prog, "f", m.binding(), globals, 1000);
    CHECK(res.budget_exceeded);
    REQUIRE(res.diagnostic.has_value());
    CHECK(res.diagnostic->find("budget") != std::string::npos);
    CHECK(res.steps_used >= 1000);
    // The reached report survives; budget exhaustion is not a fault.
    REQUIRE(res.reports.size() == 1);
    CHECK(m.reached == std::vector<std::string>{"SPIN"});
    // Budget exhaustion keeps the mutated globals (documented behavior).
    CHECK(globals.at("x").cells[0].as_unsigned() > 0);
}

TEST_CASE("default budget runs a million steps") {
    CHECK(frb::kDefaultHookStepBudget == 1'000'000);
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint32_t i;
void f() {
    i = 0;
    while (i < 100000) {
        i = i + 1;
    }
    report_reached("LONG");
}
)");
    frb::GlobalsState globals = frb::make_globals(prog);
    MockMachine m;
    auto res = frb::eval_hook(prog, "f", m.binding(), globals);
    REQUIRE_FALSE(res.diagnostic.has_value());
    CHECK(res.reports.size() == 1);
}

TEST_CASE("array index out of bounds faults") {
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint32_t tab[4];
uint32_t i;
void f() {
    i = 4;
    tab[i] = 1;
}
)");
    frb::GlobalsState globals = frb::make_globals(prog);
    MockMachine m;
    auto res = frb::eval_hook(prog, "f", m.binding(), globals);
    REQUIRE(res.diagnostic.has_value());
    CHECK(res.diagnostic->find("out of bounds") != std::string::npos);
}

TEST_CASE("locals shadow globals and conversions follow declared types") {
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint32_t g = 5;
uint8_t  narrow;
void f() {
    uint32_t g = 100;
    narrow = g + 200;
}
)");
    frb::GlobalsState globals = frb::make_globals(prog);
    MockMachine m;
    auto res = frb::eval_hook(prog, "f", m.binding(), globals);
    REQUIRE_FALSE(res.diagnostic.has_value());
    CHECK(globals.at("g").cells[0].as_unsigned() == 5);       // untouched
    CHECK(globals.at("narrow").cells[0].as_unsigned() == 44); // 300 mod 256
}

TEST_CASE("return stops the body early") {
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
void f() {
    report_reached("A");
    if (frb_reg_state(0) == 1) {
        return;
    }
    report_detected_triggered("A");
}
)");
    frb::GlobalsState globals = frb::make_globals(prog);
    MockMachine m;
    m.regs[0] = 1;
    auto res = frb::eval_hook(prog, "f", m.binding(), globals);
    REQUIRE(res.reports.size() == 1);
    CHECK(res.reports[0].kind == frb::HookReport::Kind::Reached);

    m.regs[0] = 2;
    res = frb::eval_hook(prog, "f", m.binding(), globals);
    REQUIRE(res.reports.size() == 2);
}

TEST_CASE("missing function name yields a diagnostic, not a crash") {
    frb::RavenProgram prog = parse(R"(
context_struct hook_addresses[] = { {0x10, f} };
void f() { }
)");
    frb::GlobalsState globals = frb::make_globals(prog);
    MockMachine m;
    auto res = frb::eval_hook(prog, "nope", m.binding(), globals);
    REQUIRE(res.diagnostic.has_value());
    CHECK(res.diagnostic->find("nope") != std::string::npos);
}
