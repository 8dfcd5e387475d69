#pragma once

// AST for the Raven oracle language: a small C-syntax subset with a
// reflection table binding target addresses to introspection functions.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frb/value.hpp"

namespace frb {

struct SourceLoc {
    int line = 0;       // 1-based
    int column = 0;     // 1-based
};

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string message;
    SourceLoc loc;
    std::string origin;     // file or label the source came from

    std::string to_string() const {
        std::string s = origin.empty() ? "" : origin + ":";
        s += std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": ";
        s += severity == Severity::Error ? "error: " : "warning: ";
        return s + message;
    }
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class Intrinsic { RegState, MemRead, ReportReached, ReportDetectedTriggered };

inline const char* intrinsic_name(Intrinsic k) {
    switch (k) {
        case Intrinsic::RegState: return "frb_reg_state";
        case Intrinsic::MemRead: return "frb_mem_read";
        case Intrinsic::ReportReached: return "report_reached";
        case Intrinsic::ReportDetectedTriggered: return "report_detected_triggered";
    }
    return "?";
}

struct Expr {
    enum class Kind { IntLit, StrLit, Var, Index, Unary, Binary, Call };

    Kind kind;
    SourceLoc loc;

    Value int_value;                 // IntLit
    std::string str_value;           // StrLit (bug IDs only)
    std::string name;                // Var / Index (array name)
    UnOp un_op{};                    // Unary
    BinOp bin_op{};                  // Binary
    Intrinsic intrinsic{};           // Call
    ExprPtr lhs, rhs;                // Unary uses lhs; Index uses lhs as subscript
    std::vector<ExprPtr> args;       // Call
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
    enum class Kind { Decl, Assign, ExprStmt, If, While, For, Return, Block };

    Kind kind;
    SourceLoc loc;

    // Decl
    IntType decl_type{};
    std::string name;
    std::optional<uint64_t> array_len;   // set for array declarations
    ExprPtr init;                        // optional scalar initializer
    std::vector<ExprPtr> array_init;     // optional brace initializer

    // Assign: name[index] = value
    ExprPtr index;                       // null for scalar targets
    ExprPtr value;

    // ExprStmt / If / While / For
    ExprPtr expr;                        // condition or bare expression
    std::vector<StmtPtr> body;           // If-then / loop body / Block
    std::vector<StmtPtr> else_body;      // If-else
    StmtPtr for_init, for_step;          // Assign or Decl (init), Assign (step)
};

struct GlobalDecl {
    IntType type;
    std::string name;
    std::optional<uint64_t> array_len;
    std::vector<uint64_t> init;          // raw payloads, converted at load
    SourceLoc loc;
};

struct RavenFunction {
    std::string name;
    std::vector<StmtPtr> body;
    SourceLoc loc;
};

struct ReflectionEntry {
    uint64_t address = 0;
    std::string function_name;
    SourceLoc loc;
};

// One parsed .raven source. A single program may report several bug IDs.
struct RavenProgram {
    std::string origin;
    std::vector<ReflectionEntry> reflection_table;
    std::vector<GlobalDecl> globals;
    std::vector<RavenFunction> functions;

    const RavenFunction* find_function(const std::string& fn) const {
        for (const auto& f : functions)
            if (f.name == fn) return &f;
        return nullptr;
    }

    // Bug IDs referenced by report_* string literals, in source order.
    std::vector<std::string> declared_bug_ids() const;
};

namespace detail {
inline void collect_bug_ids(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == Expr::Kind::Call &&
        (e.intrinsic == Intrinsic::ReportReached ||
         e.intrinsic == Intrinsic::ReportDetectedTriggered)) {
        if (!e.args.empty() && e.args[0]->kind == Expr::Kind::StrLit) {
            const std::string& id = e.args[0]->str_value;
            bool seen = false;
            for (const auto& s : out) seen = seen || s == id;
            if (!seen) out.push_back(id);
        }
    }
    if (e.lhs) collect_bug_ids(*e.lhs, out);
    if (e.rhs) collect_bug_ids(*e.rhs, out);
    for (const auto& a : e.args) collect_bug_ids(*a, out);
}

inline void collect_bug_ids(const Stmt& s, std::vector<std::string>& out) {
    for (const ExprPtr* e : {&s.init, &s.index, &s.value, &s.expr})
        if (*e) collect_bug_ids(**e, out);
    for (const auto& e : s.array_init) collect_bug_ids(*e, out);
    for (const StmtPtr* c : {&s.for_init, &s.for_step})
        if (*c) collect_bug_ids(**c, out);
    for (const auto& c : s.body) collect_bug_ids(*c, out);
    for (const auto& c : s.else_body) collect_bug_ids(*c, out);
}
} // namespace detail

inline std::vector<std::string> RavenProgram::declared_bug_ids() const {
    std::vector<std::string> out;
    for (const auto& f : functions)
        for (const auto& st : f.body) detail::collect_bug_ids(*st, out);
    return out;
}

} // namespace frb
