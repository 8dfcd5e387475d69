#pragma once

// Canonical source renderer for parsed Raven programs. print(parse(s)) is a
// fixed point: parsing the rendered text yields a structurally equal tree,
// which the round-trip tests check by comparing canonical prints.

#include <string>

#include "frb/raven_ast.hpp"

namespace frb {

namespace print_detail {

inline std::string hex_u64(uint64_t v) {
    char buf[20];
    snprintf(buf, sizeof buf, "0x%08llx", (unsigned long long)v);
    return buf;
}

inline int binop_level(BinOp op) {
    switch (op) {
        case BinOp::LogOr: return 0;
        case BinOp::LogAnd: return 1;
        case BinOp::BitOr: return 2;
        case BinOp::BitXor: return 3;
        case BinOp::BitAnd: return 4;
        case BinOp::Eq: case BinOp::Ne: return 5;
        case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 6;
        case BinOp::Shl: case BinOp::Shr: return 7;
        case BinOp::Add: case BinOp::Sub: return 8;
        case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 9;
    }
    return 0;
}

inline void print_expr(const Expr& e, std::string& out, int parent_level) {
    switch (e.kind) {
        case Expr::Kind::IntLit: {
            // Unsigned 64-bit literals render as hex so they re-lex to the
            // same type; everything else keeps the shorter decimal form.
            const Value& v = e.int_value;
            if (!v.is_signed() && v.width() == 64 && v.as_unsigned() > 0x7fffffffffffffffull)
                out += hex_u64(v.as_unsigned());
            else if (!v.is_signed() && v.width() == 32 && v.as_unsigned() > 0x7fffffffull)
                out += hex_u64(v.as_unsigned());
            else
                out += std::to_string(v.as_unsigned());
            break;
        }
        case Expr::Kind::StrLit:
            out += '"';
            out += e.str_value;
            out += '"';
            break;
        case Expr::Kind::Var:
            out += e.name;
            break;
        case Expr::Kind::Index:
            out += e.name;
            out += '[';
            print_expr(*e.lhs, out, 0);
            out += ']';
            break;
        case Expr::Kind::Unary:
            out += e.un_op == UnOp::Neg ? "-" : e.un_op == UnOp::BitNot ? "~" : "!";
            // Parenthesized nested unaries keep "-(-x)" from re-lexing as "--".
            if (e.lhs->kind == Expr::Kind::Binary || e.lhs->kind == Expr::Kind::Unary) {
                out += '(';
                print_expr(*e.lhs, out, 0);
                out += ')';
            } else {
                print_expr(*e.lhs, out, 10);
            }
            break;
        case Expr::Kind::Binary: {
            int level = binop_level(e.bin_op);
            bool parens = level < parent_level;
            if (parens) out += '(';
            print_expr(*e.lhs, out, level);
            out += ' ';
            out += bin_op_token(e.bin_op);
            out += ' ';
            print_expr(*e.rhs, out, level + 1);  // left-associative
            if (parens) out += ')';
            break;
        }
        case Expr::Kind::Call: {
            out += intrinsic_name(e.intrinsic);
            out += '(';
            for (size_t i = 0; i < e.args.size(); i++) {
                if (i) out += ", ";
                print_expr(*e.args[i], out, 0);
            }
            out += ')';
            break;
        }
    }
}

inline void indent(std::string& out, int depth) { out.append(size_t(depth) * 4, ' '); }

inline void print_stmt(const Stmt& s, std::string& out, int depth);

inline void print_body(const std::vector<StmtPtr>& body, std::string& out, int depth) {
    out += "{\n";
    for (const auto& st : body) print_stmt(*st, out, depth + 1);
    indent(out, depth);
    out += "}";
}

inline void print_assign_head(const Stmt& s, std::string& out) {
    out += s.name;
    if (s.index) {
        out += '[';
        print_expr(*s.index, out, 0);
        out += ']';
    }
    out += " = ";
    print_expr(*s.value, out, 0);
}

inline void print_stmt(const Stmt& s, std::string& out, int depth) {
    indent(out, depth);
    switch (s.kind) {
        case Stmt::Kind::Decl:
            out += s.decl_type.name();
            out += ' ';
            out += s.name;
            if (s.init) {
                out += " = ";
                print_expr(*s.init, out, 0);
            }
            out += ";\n";
            break;
        case Stmt::Kind::Assign:
            print_assign_head(s, out);
            out += ";\n";
            break;
        case Stmt::Kind::ExprStmt:
            print_expr(*s.expr, out, 0);
            out += ";\n";
            break;
        case Stmt::Kind::If:
            out += "if (";
            print_expr(*s.expr, out, 0);
            out += ") ";
            print_body(s.body, out, depth);
            if (!s.else_body.empty()) {
                out += " else ";
                print_body(s.else_body, out, depth);
            }
            out += "\n";
            break;
        case Stmt::Kind::While:
            out += "while (";
            print_expr(*s.expr, out, 0);
            out += ") ";
            print_body(s.body, out, depth);
            out += "\n";
            break;
        case Stmt::Kind::For:
            out += "for (";
            if (s.for_init) {
                if (s.for_init->kind == Stmt::Kind::Decl) {
                    out += s.for_init->decl_type.name();
                    out += ' ';
                    out += s.for_init->name;
                    if (s.for_init->init) {
                        out += " = ";
                        print_expr(*s.for_init->init, out, 0);
                    }
                } else {
                    print_assign_head(*s.for_init, out);
                }
            }
            out += "; ";
            if (s.expr) print_expr(*s.expr, out, 0);
            out += "; ";
            if (s.for_step) print_assign_head(*s.for_step, out);
            out += ") ";
            print_body(s.body, out, depth);
            out += "\n";
            break;
        case Stmt::Kind::Return:
            out += "return;\n";
            break;
        case Stmt::Kind::Block:
            print_body(s.body, out, depth);
            out += "\n";
            break;
    }
}

} // namespace print_detail

inline std::string print_raven(const RavenProgram& prog) {
    using namespace print_detail;
    std::string out;

    out += "context_struct hook_addresses[] = {\n";
    for (const auto& entry : prog.reflection_table) {
        out += "    {";
        out += hex_u64(entry.address);
        out += ", ";
        out += entry.function_name;
        out += "},\n";
    }
    out += "};\n";

    if (!prog.globals.empty()) out += "\n";
    for (const auto& g : prog.globals) {
        out += g.type.name();
        out += ' ';
        out += g.name;
        if (g.array_len) {
            out += '[';
            out += std::to_string(*g.array_len);
            out += ']';
        }
        if (!g.init.empty()) {
            if (g.array_len) {
                out += " = {";
                for (size_t i = 0; i < g.init.size(); i++) {
                    if (i) out += ", ";
                    out += std::to_string(Value::make(g.init[i], g.type).as_unsigned());
                }
                out += "}";
            } else {
                out += " = ";
                out += std::to_string(Value::make(g.init[0], g.type).as_unsigned());
            }
        }
        out += ";\n";
    }

    for (const auto& fn : prog.functions) {
        out += "\nvoid ";
        out += fn.name;
        out += "() {\n";
        for (const auto& st : fn.body) print_stmt(*st, out, 1);
        out += "}\n";
    }
    return out;
}

} // namespace frb
