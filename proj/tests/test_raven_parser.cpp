// Oracle-script parsing: accepted shapes, named rejections, and
// print/re-parse stability over every committed fixture script.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "frb/raven_parser.hpp"
#include "frb/raven_printer.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

frb::RavenProgram parse_ok(const std::string& src) {
    frb::ParseResult res = frb::parse_raven(src, "<test>");
    INFO(res.first_error());
    REQUIRE(res.ok());
    return std::move(*res.program);
}

std::string first_error(const std::string& src) {
    frb::ParseResult res = frb::parse_raven(src, "<test>");
    REQUIRE_FALSE(res.ok());
    return res.first_error();
}

} // namespace

TEST_CASE("worked type-confusion example parses with its published shape") {
    std::string src = slurp(fs::path(FRB_SOURCE_DIR) / "fixtures/ravens/mf04/mf04.raven");
    frb::RavenProgram prog = parse_ok(src);

    REQUIRE(prog.reflection_table.size() == 1);
    CHECK(prog.reflection_table[0].address == 0x08005e28);
    CHECK(prog.reflection_table[0].function_name == "BUG_MF04");
    REQUIRE(prog.functions.size() == 1);
    CHECK(prog.functions[0].name == "BUG_MF04");
    CHECK(prog.declared_bug_ids() == std::vector<std::string>{"MF04"});

    // The hook body: reached report, register read with offset, guarded
    // memory comparison, triggered report.
    const auto& body = prog.functions[0].body;
    REQUIRE(body.size() == 3);
    CHECK(body[0]->kind == frb::Stmt::Kind::ExprStmt);
    CHECK(body[1]->kind == frb::Stmt::Kind::Decl);
    CHECK(body[1]->name == "read_addr");
    CHECK(body[1]->decl_type == frb::IntType{32, false});
    CHECK(body[2]->kind == frb::Stmt::Kind::If);
}

TEST_CASE("reflection table accepts both bracket styles and optional semicolon") {
    const char* with_semi = R"(
context_struct hook_addresses[] = {
    {0x1000, probe},
};
void probe() { report_reached("B"); }
)";
    const char* no_semi_no_comma = R"(
context_struct hook_addresses[] = {
    {0x1000, probe}
}
void probe() { report_reached("B"); }
)";
    for (const char* src : {with_semi, no_semi_no_comma}) {
        frb::RavenProgram prog = parse_ok(src);
        REQUIRE(prog.reflection_table.size() == 1);
        CHECK(prog.reflection_table[0].address == 0x1000);
        CHECK(prog.reflection_table[0].function_name == "probe");
    }
}

TEST_CASE("one script may hook several addresses and report several bugs") {
    frb::RavenProgram prog = parse_ok(R"(
context_struct hook_addresses[] = {
    {0x100, on_a},
    {0x200, on_b},
    {0x200, on_b_again},
};
void on_a() { report_reached("BUG_A"); }
void on_b() { report_detected_triggered("BUG_B"); }
void on_b_again() { report_reached("BUG_B"); }
)");
    REQUIRE(prog.reflection_table.size() == 3);
    CHECK(prog.declared_bug_ids() == std::vector<std::string>{"BUG_A", "BUG_B"});
}

TEST_CASE("register intrinsic accepts call and subscript spellings") {
    frb::RavenProgram prog = parse_ok(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint64_t a;
uint64_t b;
void f() {
    a = frb_reg_state(3);
    b = frb_reg_state[3];
}
)");
    const auto& body = prog.functions[0].body;
    REQUIRE(body.size() == 2);
    for (int i = 0; i < 2; i++) {
        REQUIRE(body[i]->value->kind == frb::Expr::Kind::Call);
        CHECK(body[i]->value->intrinsic == frb::Intrinsic::RegState);
    }
}

TEST_CASE("empty reflection table is a warning, not an error") {
    frb::ParseResult res = frb::parse_raven(R"(
context_struct hook_addresses[] = { };
void f() { report_reached("X"); }
)");
    REQUIRE(res.ok());
    bool warned = false;
    for (const auto& d : res.diagnostics)
        if (d.severity == frb::Diagnostic::Severity::Warning &&
            d.message.find("no reflection points") != std::string::npos)
            warned = true;
    CHECK(warned);
}

TEST_CASE("rejected constructs carry named diagnostics") {
    auto table = std::string("context_struct hook_addresses[] = { {0x10, f} };\n");

    CHECK(first_error(table + "int x;\nvoid f() { }\n").find("type 'int'") !=
          std::string::npos);
    CHECK(first_error(table + "void f(int x) { }\n").find("function parameters") !=
          std::string::npos);
    CHECK(first_error(table + "uint32_t* p;\nvoid f() { }\n").find("pointer") !=
          std::string::npos);
    CHECK(first_error(table + "void f() { return 3; }\n").find("return with a value") !=
          std::string::npos);
    CHECK(first_error("struct foo { int x; };\n" + table + "void f() { }\n")
              .find("definition") != std::string::npos);
    CHECK(first_error(table + "void f() { uint32_t q[4]; }\n").find("local array") !=
          std::string::npos);
    CHECK(first_error(table + "void f() { switch (1) { } }\n").find("unsupported construct") !=
          std::string::npos);
}

TEST_CASE("unknown function calls are rejected by name") {
    auto err = first_error(R"(
context_struct hook_addresses[] = { {0x10, f} };
void f() { memcpy(1, 2, 3); }
)");
    CHECK(err.find("memcpy") != std::string::npos);
}

TEST_CASE("stdint spellings map to the right types; width suffix drives semantics") {
    frb::RavenProgram prog = parse_ok(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint8_t  a;
int8_t   b;
uint16_t c;
int16_t  d;
uint32_t e;
int32_t  g;
uint64_t h;
int64_t  i;
void f() { }
)");
    REQUIRE(prog.globals.size() == 8);
    CHECK(prog.globals[0].type == frb::IntType{8, false});
    CHECK(prog.globals[1].type == frb::IntType{8, true});
    CHECK(prog.globals[2].type == frb::IntType{16, false});
    CHECK(prog.globals[3].type == frb::IntType{16, true});
    CHECK(prog.globals[4].type == frb::IntType{32, false});
    CHECK(prog.globals[5].type == frb::IntType{32, true});
    CHECK(prog.globals[6].type == frb::IntType{64, false});
    CHECK(prog.globals[7].type == frb::IntType{64, true});
}

TEST_CASE("global arrays take brace initializers") {
    frb::RavenProgram prog = parse_ok(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint32_t tab[4] = {1, 2, 3};
uint8_t  zeroed[8];
uint64_t big = 0xffffffffffffffff;
void f() { tab[3] = tab[0] + 1; }
)");
    REQUIRE(prog.globals.size() == 3);
    CHECK(prog.globals[0].array_len == 4);
    CHECK(prog.globals[0].init == std::vector<uint64_t>{1, 2, 3});
    CHECK(prog.globals[1].array_len == 8);
    CHECK(prog.globals[2].init == std::vector<uint64_t>{0xffffffffffffffffull});
}

TEST_CASE("control flow statements parse: if/else, while, for") {
    frb::RavenProgram prog = parse_ok(R"(
context_struct hook_addresses[] = { {0x10, f} };
uint32_t acc;
void f() {
    uint32_t i = 0;
    while (i < 4) {
        acc = acc + frb_mem_read(0x20000000 + i, 1);
        i = i + 1;
    }
    for (uint32_t j = 0; j < 2; j = j + 1) {
        if (acc > 100) {
            report_detected_triggered("HOT");
        } else {
            report_reached("HOT");
        }
    }
}
)");
    REQUIRE(prog.functions.size() == 1);
    CHECK(prog.declared_bug_ids() == std::vector<std::string>{"HOT"});
}

TEST_CASE("printer output re-parses to the same text (fixed point)") {
    std::vector<std::string> sources;
    sources.push_back(slurp(fs::path(FRB_SOURCE_DIR) / "fixtures/ravens/mf04/mf04.raven"));
    for (const auto& e :
         fs::recursive_directory_iterator(fs::path(FRB_SOURCE_DIR) / "fixtures/ravens"))
        if (e.is_regular_file() && e.path().extension() == ".raven")
            sources.push_back(slurp(e.path()));
    REQUIRE(sources.size() >= 10);

    for (const auto& src : sources) {
        frb::RavenProgram p1 = parse_ok(src);
        std::string printed = frb::print_raven(p1);
        frb::RavenProgram p2 = parse_ok(printed);
        CHECK(frb::print_raven(p2) == printed);
        CHECK(p2.declared_bug_ids() == p1.declared_bug_ids());
        REQUIRE(p2.reflection_table.size() == p1.reflection_table.size());
        for (size_t i = 0; i < p1.reflection_table.size(); i++) {
            CHECK(p2.reflection_table[i].address == p1.reflection_table[i].address);
            CHECK(p2.reflection_table[i].function_name ==
                  p1.reflection_table[i].function_name);
        }
    }
}

TEST_CASE("lexer errors: bad hex, oversized literal, unterminated string") {
    CHECK(first_error("context_struct hook_addresses[] = { {0xZZ, f} };\nvoid f() { }\n")
              .find("hex") != std::string::npos);
    CHECK(first_error("context_struct hook_addresses[] = { {0x10, f} };\n"
                      "uint64_t x = 99999999999999999999999;\nvoid f() { }\n")
              .find("out of range") != std::string::npos);
    CHECK(first_error("context_struct hook_addresses[] = { {0x10, f} };\n"
                      "void f() { report_reached(\"oops); }\n")
              .find("unterminated") != std::string::npos);
}
