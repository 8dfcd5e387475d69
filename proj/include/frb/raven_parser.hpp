#pragma once

// Recursive-descent parser for the Raven oracle language.
//
// Accepted subset: fixed-width integer types (u/int{8,16,32,64}_t), global
// scalars and arrays, parameterless void functions with local scalars,
// if/else, while, for, return, decimal/hex literals, the usual arithmetic,
// bitwise, logical and relational operators, string literals as bug-ID
// arguments, and the context_struct reflection-table idiom. Anything else is
// rejected with a diagnostic naming the construct. The register intrinsic is
// accepted in both call form frb_reg_state(0) and index form frb_reg_state[0];
// the AST normalizes to the call form.

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frb/raven_ast.hpp"

namespace frb {

struct ParseResult {
    std::optional<RavenProgram> program;
    std::vector<Diagnostic> diagnostics;    // errors and warnings, in order

    bool ok() const { return program.has_value(); }
    std::string first_error() const {
        for (const auto& d : diagnostics)
            if (d.severity == Diagnostic::Severity::Error) return d.to_string();
        return {};
    }
};

namespace raven_detail {

struct Token {
    enum class Kind { Ident, Int, Str, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    uint64_t int_value = 0;
    bool is_hex = false;
    SourceLoc loc;
};

class Lexer {
public:
    Lexer(std::string_view src, std::string origin)
        : src_(src), origin_(std::move(origin)) {}

    // Tokenizes the whole input; a lexical error produces a diagnostic.
    bool run(std::vector<Token>& out, Diagnostic& err) {
        while (true) {
            skip_ws_and_comments(err);
            if (!err.message.empty()) return false;
            if (pos_ >= src_.size()) break;
            SourceLoc loc{line_, col_};
            char c = src_[pos_];
            if (c == '#') {
                err = {Diagnostic::Severity::Error,
                       "unsupported construct: preprocessor directive", loc, origin_};
                return false;
            }
            if (std::isalpha(uint8_t(c)) || c == '_') {
                out.push_back(lex_ident(loc));
            } else if (std::isdigit(uint8_t(c))) {
                Token t;
                if (!lex_number(loc, t, err)) return false;
                out.push_back(t);
            } else if (c == '"') {
                Token t;
                if (!lex_string(loc, t, err)) return false;
                out.push_back(t);
            } else {
                out.push_back(lex_punct(loc, err));
                if (!err.message.empty()) return false;
            }
        }
        out.push_back(Token{Token::Kind::End, "", 0, false, {line_, col_}});
        return true;
    }

private:
    void advance() {
        if (src_[pos_] == '\n') { line_++; col_ = 1; } else { col_++; }
        pos_++;
    }

    void skip_ws_and_comments(Diagnostic& err) {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(uint8_t(c))) { advance(); continue; }
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                SourceLoc loc{line_, col_};
                advance(); advance();
                while (pos_ + 1 < src_.size() &&
                       !(src_[pos_] == '*' && src_[pos_ + 1] == '/'))
                    advance();
                if (pos_ + 1 >= src_.size()) {
                    err = {Diagnostic::Severity::Error, "unterminated comment", loc, origin_};
                    return;
                }
                advance(); advance();
                continue;
            }
            break;
        }
    }

    Token lex_ident(SourceLoc loc) {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(uint8_t(src_[pos_])) || src_[pos_] == '_'))
            advance();
        return {Token::Kind::Ident, std::string(src_.substr(start, pos_ - start)),
                0, false, loc};
    }

    bool lex_number(SourceLoc loc, Token& t, Diagnostic& err) {
        size_t start = pos_;
        bool hex = false;
        if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
            (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
            hex = true;
            advance(); advance();
        }
        size_t digits_start = pos_;
        while (pos_ < src_.size() &&
               (hex ? std::isxdigit(uint8_t(src_[pos_])) : std::isdigit(uint8_t(src_[pos_]))))
            advance();
        if (hex && pos_ == digits_start) {
            err = {Diagnostic::Severity::Error, "malformed hex literal", loc, origin_};
            return false;
        }
        std::string text(src_.substr(start, pos_ - start));
        uint64_t v = 0;
        bool overflow = false;
        for (char c : text.substr(hex ? 2 : 0)) {
            uint64_t digit = hex ? uint64_t(std::isdigit(uint8_t(c)) ? c - '0'
                                                                     : std::tolower(c) - 'a' + 10)
                                 : uint64_t(c - '0');
            uint64_t base = hex ? 16 : 10;
            if (v > (~uint64_t(0) - digit) / base) { overflow = true; break; }
            v = v * base + digit;
        }
        if (overflow) {
            err = {Diagnostic::Severity::Error, "integer literal out of range", loc, origin_};
            return false;
        }
        t = {Token::Kind::Int, text, v, hex, loc};
        return true;
    }

    bool lex_string(SourceLoc loc, Token& t, Diagnostic& err) {
        advance();  // opening quote
        std::string s;
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
            s += src_[pos_];
            advance();
        }
        if (pos_ >= src_.size() || src_[pos_] != '"') {
            err = {Diagnostic::Severity::Error, "unterminated string literal", loc, origin_};
            return false;
        }
        advance();  // closing quote
        t = {Token::Kind::Str, s, 0, false, loc};
        return true;
    }

    Token lex_punct(SourceLoc loc, Diagnostic& err) {
        static const char* two_char[] = {"==", "!=", "<=", ">=", "<<", ">>", "&&", "||",
                                         "++", "--", "+=", "-=", "*=", "/=", "%=",
                                         "&=", "|=", "^=", "->"};
        std::string_view rest = src_.substr(pos_);
        for (const char* op : two_char) {
            if (rest.size() >= 2 && rest.substr(0, 2) == op) {
                advance(); advance();
                return {Token::Kind::Punct, op, 0, false, loc};
            }
        }
        static const std::string singles = "+-*/%&|^~!<>=(){}[];,.";
        char c = src_[pos_];
        if (singles.find(c) == std::string::npos) {
            err = {Diagnostic::Severity::Error,
                   std::string("unexpected character '") + c + "'", loc, origin_};
            return {};
        }
        advance();
        return {Token::Kind::Punct, std::string(1, c), 0, false, loc};
    }

    std::string_view src_;
    std::string origin_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

class Parser {
public:
    Parser(std::vector<Token> toks, std::string origin)
        : toks_(std::move(toks)), origin_(std::move(origin)) {}

    ParseResult run() {
        ParseResult res;
        RavenProgram prog;
        prog.origin = origin_;
        try {
            while (!at_end()) parse_top_level(prog);
            check_semantics(prog);
        } catch (const Diagnostic& d) {
            res.diagnostics = warnings_;
            res.diagnostics.push_back(d);
            return res;
        }
        if (prog.reflection_table.empty())
            warn(toks_.empty() ? SourceLoc{1, 1} : toks_.back().loc,
                 "no reflection points: the oracle will never fire");
        res.diagnostics = warnings_;
        res.program = std::move(prog);
        return res;
    }

private:
    [[noreturn]] void fail(SourceLoc loc, std::string msg) const {
        throw Diagnostic{Diagnostic::Severity::Error, std::move(msg), loc, origin_};
    }
    void warn(SourceLoc loc, std::string msg) {
        warnings_.push_back({Diagnostic::Severity::Warning, std::move(msg), loc, origin_});
    }

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == Token::Kind::End; }

    bool is_punct(const Token& t, std::string_view p) const {
        return t.kind == Token::Kind::Punct && t.text == p;
    }
    bool accept_punct(std::string_view p) {
        if (is_punct(peek(), p)) { next(); return true; }
        return false;
    }
    void expect_punct(std::string_view p, const char* what) {
        if (!accept_punct(p))
            fail(peek().loc, std::string("expected '") + std::string(p) + "' " + what +
                                 ", got '" + describe(peek()) + "'");
    }
    static std::string describe(const Token& t) {
        switch (t.kind) {
            case Token::Kind::End: return "end of input";
            case Token::Kind::Str: return "\"" + t.text + "\"";
            default: return t.text;
        }
    }

    static std::optional<IntType> type_keyword(const Token& t) {
        if (t.kind != Token::Kind::Ident) return std::nullopt;
        static const std::map<std::string, IntType> types = {
            {"uint8_t", {8, false}},  {"uint16_t", {16, false}},
            {"uint32_t", {32, false}}, {"uint64_t", {64, false}},
            {"int8_t", {8, true}},    {"int16_t", {16, true}},
            {"int32_t", {32, true}},  {"int64_t", {64, true}},
        };
        auto it = types.find(t.text);
        if (it == types.end()) return std::nullopt;
        return it->second;
    }

    void reject_unsupported_type(const Token& t) const {
        static const char* plain_types[] = {"int", "unsigned", "char", "short",
                                            "long", "float", "double", "size_t"};
        for (const char* p : plain_types)
            if (t.text == p)
                fail(t.loc, "unsupported construct: type '" + t.text +
                                "' (only fixed-width integer types are allowed)");
        if (t.text == "struct" || t.text == "union" || t.text == "enum")
            fail(t.loc, "unsupported construct: " + t.text + " definition");
        if (t.text == "typedef")
            fail(t.loc, "unsupported construct: typedef");
    }

    void parse_top_level(RavenProgram& prog) {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident)
            fail(t.loc, "expected declaration, got '" + describe(t) + "'");
        if (t.text == "context_struct") { parse_reflection_table(prog); return; }
        if (t.text == "void") { parse_function(prog); return; }
        if (auto ty = type_keyword(t)) { parse_global(prog, *ty); return; }
        reject_unsupported_type(t);
        fail(t.loc, "expected declaration, got '" + t.text + "'");
    }

    // context_struct <name>[] = { {addr, func}, ... };
    void parse_reflection_table(RavenProgram& prog) {
        next();  // context_struct
        const Token& name = next();
        if (name.kind != Token::Kind::Ident)
            fail(name.loc, "expected reflection table name");
        expect_punct("[", "after reflection table name");
        expect_punct("]", "after '['");
        expect_punct("=", "in reflection table");
        expect_punct("{", "to open reflection table");
        while (!is_punct(peek(), "}")) {
            SourceLoc eloc = peek().loc;
            expect_punct("{", "to open reflection entry");
            const Token& addr = next();
            if (addr.kind != Token::Kind::Int)
                fail(addr.loc, "expected address literal in reflection entry");
            expect_punct(",", "between address and function name");
            const Token& fn = next();
            if (fn.kind != Token::Kind::Ident)
                fail(fn.loc, "expected function name in reflection entry");
            expect_punct("}", "to close reflection entry");
            prog.reflection_table.push_back({addr.int_value, fn.text, eloc});
            if (!accept_punct(",")) break;
        }
        expect_punct("}", "to close reflection table");
        accept_punct(";");   // trailing semicolon is optional
    }

    void parse_global(RavenProgram& prog, IntType ty) {
        SourceLoc loc = peek().loc;
        next();  // type
        if (is_punct(peek(), "*"))
            fail(peek().loc, "unsupported construct: pointer declaration");
        const Token& name = next();
        if (name.kind != Token::Kind::Ident)
            fail(name.loc, "expected variable name");
        GlobalDecl g;
        g.type = ty;
        g.name = name.text;
        g.loc = loc;
        if (accept_punct("[")) {
            const Token& len = next();
            if (len.kind != Token::Kind::Int || len.int_value == 0)
                fail(len.loc, "expected nonzero array length");
            g.array_len = len.int_value;
            expect_punct("]", "after array length");
        }
        if (accept_punct("=")) {
            if (accept_punct("{")) {
                if (!g.array_len)
                    fail(loc, "brace initializer on a scalar global");
                while (!is_punct(peek(), "}")) {
                    g.init.push_back(parse_const_int());
                    if (!accept_punct(",")) break;
                }
                expect_punct("}", "to close array initializer");
                if (g.init.size() > *g.array_len)
                    fail(loc, "too many array initializers");
            } else {
                if (g.array_len)
                    fail(loc, "array global needs a brace initializer");
                g.init.push_back(parse_const_int());
            }
        }
        expect_punct(";", "after global declaration");
        prog.globals.push_back(std::move(g));
    }

    // Global initializers are constant: a literal with an optional sign.
    uint64_t parse_const_int() {
        bool negate = accept_punct("-");
        const Token& t = next();
        if (t.kind != Token::Kind::Int)
            fail(t.loc, "expected constant integer initializer");
        return negate ? uint64_t(0) - t.int_value : t.int_value;
    }

    void parse_function(RavenProgram& prog) {
        SourceLoc loc = peek().loc;
        next();  // void
        const Token& name = next();
        if (name.kind != Token::Kind::Ident)
            fail(name.loc, "expected function name after 'void'");
        expect_punct("(", "after function name");
        if (!is_punct(peek(), ")")) {
            if (peek().kind == Token::Kind::Ident && peek().text == "void" &&
                is_punct(peek(1), ")")) {
                next();  // tolerate the explicit (void) spelling
            } else {
                fail(peek().loc, "unsupported construct: function parameters");
            }
        }
        expect_punct(")", "after parameter list");
        RavenFunction fn;
        fn.name = name.text;
        fn.loc = loc;
        expect_punct("{", "to open function body");
        while (!is_punct(peek(), "}")) fn.body.push_back(parse_stmt());
        expect_punct("}", "to close function body");
        prog.functions.push_back(std::move(fn));
    }

    std::vector<StmtPtr> parse_stmt_or_block() {
        std::vector<StmtPtr> body;
        if (accept_punct("{")) {
            while (!is_punct(peek(), "}")) body.push_back(parse_stmt());
            expect_punct("}", "to close block");
        } else {
            body.push_back(parse_stmt());
        }
        return body;
    }

    StmtPtr parse_stmt() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Punct && t.text == "{") {
            auto s = std::make_unique<Stmt>();
            s->kind = Stmt::Kind::Block;
            s->loc = t.loc;
            s->body = parse_stmt_or_block();
            return s;
        }
        if (t.kind != Token::Kind::Ident) {
            if (is_punct(t, "*"))
                fail(t.loc, "unsupported construct: pointer dereference");
            fail(t.loc, "expected statement, got '" + describe(t) + "'");
        }
        if (t.text == "if") return parse_if();
        if (t.text == "while") return parse_while();
        if (t.text == "for") return parse_for();
        if (t.text == "return") {
            auto s = std::make_unique<Stmt>();
            s->kind = Stmt::Kind::Return;
            s->loc = t.loc;
            next();
            if (!is_punct(peek(), ";"))
                fail(peek().loc, "unsupported construct: return with a value");
            next();
            return s;
        }
        for (const char* kw : {"switch", "do", "goto", "break", "continue"})
            if (t.text == kw)
                fail(t.loc, std::string("unsupported construct: ") + kw);
        reject_unsupported_type(t);
        if (auto ty = type_keyword(t)) return parse_local_decl(*ty);
        auto s = parse_assign_or_call();
        expect_punct(";", "after statement");
        return s;
    }

    StmtPtr parse_local_decl(IntType ty) {
        SourceLoc loc = peek().loc;
        next();  // type
        if (is_punct(peek(), "*"))
            fail(peek().loc, "unsupported construct: pointer declaration");
        const Token& name = next();
        if (name.kind != Token::Kind::Ident)
            fail(name.loc, "expected variable name");
        if (is_punct(peek(), "["))
            fail(peek().loc, "unsupported construct: local array (locals are scalars)");
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Decl;
        s->loc = loc;
        s->decl_type = ty;
        s->name = name.text;
        if (accept_punct("=")) s->init = parse_expr(0);
        expect_punct(";", "after declaration");
        return s;
    }

    StmtPtr parse_if() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::If;
        s->loc = peek().loc;
        next();  // if
        expect_punct("(", "after 'if'");
        s->expr = parse_expr(0);
        expect_punct(")", "after condition");
        s->body = parse_stmt_or_block();
        if (peek().kind == Token::Kind::Ident && peek().text == "else") {
            next();
            s->else_body = parse_stmt_or_block();
        }
        return s;
    }

    StmtPtr parse_while() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::While;
        s->loc = peek().loc;
        next();  // while
        expect_punct("(", "after 'while'");
        s->expr = parse_expr(0);
        expect_punct(")", "after condition");
        s->body = parse_stmt_or_block();
        return s;
    }

    StmtPtr parse_for() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::For;
        s->loc = peek().loc;
        next();  // for
        expect_punct("(", "after 'for'");
        if (!is_punct(peek(), ";")) {
            if (auto ty = type_keyword(peek())) {
                s->for_init = parse_local_decl(*ty);  // consumes the ';'
            } else {
                s->for_init = parse_assign_or_call();
                expect_punct(";", "after for-initializer");
            }
        } else {
            next();
        }
        if (!is_punct(peek(), ";")) s->expr = parse_expr(0);
        expect_punct(";", "after for-condition");
        if (!is_punct(peek(), ")")) s->for_step = parse_assign_or_call();
        expect_punct(")", "after for-step");
        s->body = parse_stmt_or_block();
        return s;
    }

    StmtPtr parse_assign_or_call() {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident)
            fail(t.loc, "expected statement, got '" + describe(t) + "'");

        if (intrinsic_of(t.text)) {
            auto s = std::make_unique<Stmt>();
            s->kind = Stmt::Kind::ExprStmt;
            s->loc = t.loc;
            s->expr = parse_primary();
            return s;
        }

        next();  // identifier
        ExprPtr index;
        if (accept_punct("[")) {
            index = parse_expr(0);
            expect_punct("]", "after array index");
        }
        const Token& op = peek();
        if (op.kind == Token::Kind::Punct)
            for (const char* c : {"+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "++", "--"})
                if (op.text == c)
                    fail(op.loc, "unsupported construct: '" + op.text +
                                     "' (write it as an explicit assignment)");
        if (op.kind == Token::Kind::Punct && op.text == "(")
            fail(op.loc, "unknown function '" + t.text +
                             "' (only the oracle intrinsics are callable)");
        expect_punct("=", "in assignment");
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Assign;
        s->loc = t.loc;
        s->name = t.text;
        s->index = std::move(index);
        s->value = parse_expr(0);
        return s;
    }

    static std::optional<Intrinsic> intrinsic_of(const std::string& name) {
        if (name == "frb_reg_state") return Intrinsic::RegState;
        if (name == "frb_mem_read") return Intrinsic::MemRead;
        if (name == "report_reached") return Intrinsic::ReportReached;
        if (name == "report_detected_triggered") return Intrinsic::ReportDetectedTriggered;
        return std::nullopt;
    }

    // Precedence-climbing expression parser; level 0 is the loosest (||).
    ExprPtr parse_expr(int min_level) {
        if (++depth_ > 200) fail(peek().loc, "expression nests too deeply");
        ExprPtr lhs = parse_unary();
        while (true) {
            const Token& t = peek();
            if (t.kind != Token::Kind::Punct) break;
            auto bin = binop_of(t.text);
            if (!bin || bin->second < min_level) break;
            next();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Binary;
            e->loc = t.loc;
            e->bin_op = bin->first;
            e->lhs = std::move(lhs);
            e->rhs = parse_expr(bin->second + 1);   // all binary ops associate left
            lhs = std::move(e);
        }
        depth_--;
        return lhs;
    }

    static std::optional<std::pair<BinOp, int>> binop_of(const std::string& p) {
        static const std::map<std::string, std::pair<BinOp, int>> ops = {
            {"||", {BinOp::LogOr, 0}},  {"&&", {BinOp::LogAnd, 1}},
            {"|", {BinOp::BitOr, 2}},   {"^", {BinOp::BitXor, 3}},
            {"&", {BinOp::BitAnd, 4}},
            {"==", {BinOp::Eq, 5}},     {"!=", {BinOp::Ne, 5}},
            {"<", {BinOp::Lt, 6}},      {"<=", {BinOp::Le, 6}},
            {">", {BinOp::Gt, 6}},      {">=", {BinOp::Ge, 6}},
            {"<<", {BinOp::Shl, 7}},    {">>", {BinOp::Shr, 7}},
            {"+", {BinOp::Add, 8}},     {"-", {BinOp::Sub, 8}},
            {"*", {BinOp::Mul, 9}},     {"/", {BinOp::Div, 9}},
            {"%", {BinOp::Mod, 9}},
        };
        auto it = ops.find(p);
        if (it == ops.end()) return std::nullopt;
        return it->second;
    }

    ExprPtr parse_unary() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Punct) {
            UnOp op;
            if (t.text == "-") op = UnOp::Neg;
            else if (t.text == "~") op = UnOp::BitNot;
            else if (t.text == "!") op = UnOp::LogNot;
            else if (t.text == "*")
                fail(t.loc, "unsupported construct: pointer dereference");
            else if (t.text == "&")
                fail(t.loc, "unsupported construct: address-of");
            else if (t.text == "++" || t.text == "--")
                fail(t.loc, "unsupported construct: '" + t.text + "'");
            else return parse_primary();
            next();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Unary;
            e->loc = t.loc;
            e->un_op = op;
            e->lhs = parse_unary();
            return e;
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Int) {
            next();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::IntLit;
            e->loc = t.loc;
            e->int_value = literal_value(t.int_value, t.is_hex);
            return e;
        }
        if (t.kind == Token::Kind::Str) {
            next();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::StrLit;
            e->loc = t.loc;
            e->str_value = t.text;
            return e;
        }
        if (is_punct(t, "(")) {
            next();
            ExprPtr e = parse_expr(0);
            expect_punct(")", "to close parenthesized expression");
            return e;
        }
        if (t.kind != Token::Kind::Ident)
            fail(t.loc, "expected expression, got '" + describe(t) + "'");

        if (auto intr = intrinsic_of(t.text)) {
            next();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Call;
            e->loc = t.loc;
            e->intrinsic = *intr;
            // Listing-style register access spells the intrinsic with index
            // brackets; accept it as sugar for the call form.
            bool bracket = *intr == Intrinsic::RegState && is_punct(peek(), "[");
            expect_punct(bracket ? "[" : "(", "after intrinsic name");
            if (!bracket && is_punct(peek(), ")")) {
                next();
            } else {
                do e->args.push_back(parse_expr(0));
                while (accept_punct(","));
                expect_punct(bracket ? "]" : ")", "to close intrinsic arguments");
            }
            check_intrinsic_args(*e);
            return e;
        }

        next();
        if (is_punct(peek(), "(")) {
            fail(t.loc, "unknown function '" + t.text +
                            "' (only the oracle intrinsics are callable)");
        }
        if (accept_punct("[")) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Index;
            e->loc = t.loc;
            e->name = t.text;
            e->lhs = parse_expr(0);
            expect_punct("]", "after array index");
            return e;
        }
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Var;
        e->loc = t.loc;
        e->name = t.text;
        return e;
    }

    void check_intrinsic_args(const Expr& call) const {
        size_t want =
            call.intrinsic == Intrinsic::MemRead ? 2 : 1;
        if (call.args.size() != want)
            fail(call.loc, std::string(intrinsic_name(call.intrinsic)) + " takes " +
                               std::to_string(want) + " argument" + (want > 1 ? "s" : ""));
        bool report = call.intrinsic == Intrinsic::ReportReached ||
                      call.intrinsic == Intrinsic::ReportDetectedTriggered;
        if (report && call.args[0]->kind != Expr::Kind::StrLit)
            fail(call.loc, std::string(intrinsic_name(call.intrinsic)) +
                               " takes a string bug-ID argument");
        if (!report)
            for (const auto& a : call.args)
                if (a->kind == Expr::Kind::StrLit)
                    fail(a->loc, "string literals are only allowed as bug-ID arguments");
    }

    // Name resolution and reflection-table checks, after the tree is built.
    void check_semantics(const RavenProgram& prog) const {
        std::map<std::string, bool> global_is_array;
        for (const auto& g : prog.globals) {
            if (global_is_array.count(g.name))
                fail(g.loc, "duplicate global '" + g.name + "'");
            global_is_array[g.name] = g.array_len.has_value();
        }
        std::map<std::string, const RavenFunction*> fns;
        for (const auto& f : prog.functions) {
            if (fns.count(f.name))
                fail(f.loc, "duplicate function '" + f.name + "'");
            if (global_is_array.count(f.name))
                fail(f.loc, "'" + f.name + "' is already a global variable");
            fns[f.name] = &f;
        }
        for (const auto& entry : prog.reflection_table)
            if (!fns.count(entry.function_name))
                fail(entry.loc, "reflection entry references undefined function '" +
                                    entry.function_name + "'");
        for (const auto& f : prog.functions) {
            // Frame 0 holds the globals; each nested block adds a frame.
            // Locals may shadow globals (and outer locals); only a duplicate
            // declaration within the same block is an error.
            std::vector<std::map<std::string, bool>> frames;
            frames.push_back(global_is_array);
            frames.emplace_back();
            for (const auto& st : f.body) check_stmt(*st, frames);
        }
    }

    using ScopeFrames = std::vector<std::map<std::string, bool>>;

    // Innermost declaration wins; returns its is_array flag, or nullptr.
    static const bool* scope_lookup(const ScopeFrames& frames, const std::string& name) {
        for (auto frame = frames.rbegin(); frame != frames.rend(); ++frame) {
            auto it = frame->find(name);
            if (it != frame->end()) return &it->second;
        }
        return nullptr;
    }

    void check_stmt(const Stmt& s, ScopeFrames& frames) const {
        switch (s.kind) {
            case Stmt::Kind::Decl:
                if (s.init) check_expr(*s.init, frames);
                if (frames.back().count(s.name))
                    fail(s.loc, "redeclaration of '" + s.name + "'");
                frames.back()[s.name] = false;
                break;
            case Stmt::Kind::Assign: {
                const bool* is_array = scope_lookup(frames, s.name);
                if (!is_array)
                    fail(s.loc, "unknown identifier '" + s.name + "'");
                if (s.index && !*is_array)
                    fail(s.loc, "'" + s.name + "' is not an array");
                if (!s.index && *is_array)
                    fail(s.loc, "array '" + s.name + "' needs an index to be assigned");
                if (s.index) check_expr(*s.index, frames);
                check_expr(*s.value, frames);
                break;
            }
            case Stmt::Kind::ExprStmt:
                check_expr(*s.expr, frames);
                break;
            case Stmt::Kind::If: {
                check_expr(*s.expr, frames);
                frames.emplace_back();
                for (const auto& c : s.body) check_stmt(*c, frames);
                frames.pop_back();
                frames.emplace_back();
                for (const auto& c : s.else_body) check_stmt(*c, frames);
                frames.pop_back();
                break;
            }
            case Stmt::Kind::While: {
                check_expr(*s.expr, frames);
                frames.emplace_back();
                for (const auto& c : s.body) check_stmt(*c, frames);
                frames.pop_back();
                break;
            }
            case Stmt::Kind::For: {
                frames.emplace_back();
                if (s.for_init) check_stmt(*s.for_init, frames);
                if (s.expr) check_expr(*s.expr, frames);
                if (s.for_step) check_stmt(*s.for_step, frames);
                frames.emplace_back();
                for (const auto& c : s.body) check_stmt(*c, frames);
                frames.pop_back();
                frames.pop_back();
                break;
            }
            case Stmt::Kind::Return:
                break;
            case Stmt::Kind::Block: {
                frames.emplace_back();
                for (const auto& c : s.body) check_stmt(*c, frames);
                frames.pop_back();
                break;
            }
        }
    }

    void check_expr(const Expr& e, const ScopeFrames& frames) const {
        switch (e.kind) {
            case Expr::Kind::Var: {
                const bool* is_array = scope_lookup(frames, e.name);
                if (!is_array)
                    fail(e.loc, "unknown identifier '" + e.name + "'");
                if (*is_array)
                    fail(e.loc, "array '" + e.name + "' needs an index");
                break;
            }
            case Expr::Kind::Index: {
                const bool* is_array = scope_lookup(frames, e.name);
                if (!is_array)
                    fail(e.loc, "unknown identifier '" + e.name + "'");
                if (!*is_array)
                    fail(e.loc, "'" + e.name + "' is not an array");
                check_expr(*e.lhs, frames);
                break;
            }
            case Expr::Kind::Unary:
                check_expr(*e.lhs, frames);
                break;
            case Expr::Kind::Binary:
                check_expr(*e.lhs, frames);
                check_expr(*e.rhs, frames);
                break;
            case Expr::Kind::Call:
                for (const auto& a : e.args) check_expr(*a, frames);
                break;
            default:
                break;
        }
    }

    std::vector<Token> toks_;
    std::string origin_;
    size_t pos_ = 0;
    int depth_ = 0;
    std::vector<Diagnostic> warnings_;
};

} // namespace raven_detail

// Parses one Raven source. On failure the result has no program and its
// diagnostics end with the error; warnings are preserved either way.
inline ParseResult parse_raven(std::string_view source, std::string origin = "<raven>") {
    std::vector<raven_detail::Token> toks;
    Diagnostic lex_err;
    raven_detail::Lexer lexer(source, origin);
    if (!lexer.run(toks, lex_err)) {
        ParseResult res;
        res.diagnostics.push_back(lex_err);
        return res;
    }
    return raven_detail::Parser(std::move(toks), std::move(origin)).run();
}

} // namespace frb
