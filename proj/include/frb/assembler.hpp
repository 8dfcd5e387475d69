#pragma once

// Line assembler for the reference VM: one mnemonic per line, labels,
// ';' / '//' comments, and header directives (.entry, .handler, .period,
// .ram). Immediates take a '#' prefix; a bare identifier in an immediate
// position is a label reference. Branch targets assemble to displacements
// relative to the branch instruction itself. .word plants raw 32-bit data.

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frb/minivm.hpp"

namespace frb {

struct AsmError : std::runtime_error {
    AsmError(const std::string& origin, int line, const std::string& msg)
        : std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg) {}
};

namespace asm_detail {

struct PendingRef {
    size_t rom_offset;      // immediate field to patch
    std::string label;
    bool relative;          // branch displacement vs absolute address
    uint32_t anchor;        // instruction address for relative refs
    int line;
};

struct LineParser {
    std::string_view s;
    size_t pos = 0;
    const std::string& origin;
    int line;

    LineParser(std::string_view text, const std::string& org, int ln)
        : s(text), origin(org), line(ln) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw AsmError(origin, line, msg);
    }

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) pos++;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    bool accept(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { pos++; return true; }
        return false;
    }
    void expect(char c, const char* what) {
        if (!accept(c)) fail(std::string("expected '") + c + "' " + what);
    }

    std::string ident() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && (std::isalnum(uint8_t(s[pos])) || s[pos] == '_' ||
                                  (pos == start && s[pos] == '.')))
            pos++;
        if (pos == start) fail("expected identifier");
        return std::string(s.substr(start, pos - start));
    }

    uint32_t number() {
        skip_ws();
        bool neg = accept('-');
        skip_ws();
        size_t start = pos;
        uint64_t v = 0;
        if (pos + 1 < s.size() && s[pos] == '0' && (s[pos + 1] == 'x' || s[pos + 1] == 'X')) {
            pos += 2;
            size_t ds = pos;
            while (pos < s.size() && std::isxdigit(uint8_t(s[pos]))) {
                char c = s[pos++];
                v = v * 16 + uint64_t(std::isdigit(uint8_t(c)) ? c - '0'
                                                               : std::tolower(c) - 'a' + 10);
            }
            if (pos == ds) fail("malformed hex number");
        } else {
            while (pos < s.size() && std::isdigit(uint8_t(s[pos]))) v = v * 10 + uint64_t(s[pos++] - '0');
            if (pos == start) fail("expected number");
        }
        uint32_t w = uint32_t(v);
        return neg ? uint32_t(0) - w : w;
    }

    uint8_t reg() {
        std::string name = ident();
        for (char& c : name) c = char(std::tolower(uint8_t(c)));
        if (name == "sp") return kRegSp;
        if (name == "lr") return kRegLr;
        if (name == "pc") return kRegPc;
        if (name.size() >= 2 && name[0] == 'r') {
            int n = 0;
            for (size_t i = 1; i < name.size(); i++) {
                if (!std::isdigit(uint8_t(name[i]))) fail("bad register '" + name + "'");
                n = n * 10 + (name[i] - '0');
            }
            if (n <= 15) return uint8_t(n);
        }
        fail("bad register '" + name + "'");
    }

    // '#'number, or a label identifier resolved in pass two.
    std::optional<std::string> imm_or_label(uint32_t& imm) {
        skip_ws();
        if (accept('#')) {
            imm = number();
            return std::nullopt;
        }
        if (pos < s.size() && (std::isdigit(uint8_t(s[pos])) || s[pos] == '-')) {
            imm = number();
            return std::nullopt;
        }
        return ident();
    }

    // [rb] or [rb+off] or [rb-off]
    void mem_operand(uint8_t& rb, uint32_t& off) {
        expect('[', "to open memory operand");
        rb = reg();
        skip_ws();
        if (accept(']')) {
            off = 0;
            return;
        }
        if (accept('+')) {
            off = number();
        } else if (accept('-')) {
            off = uint32_t(0) - number();
        } else {
            fail("expected '+', '-' or ']' in memory operand");
        }
        expect(']', "to close memory operand");
    }
};

} // namespace asm_detail

// When `labels_out` is given, every label's resolved rom address is
// reported there, so callers can locate hook sites symbolically.
inline TargetImage assemble(std::string_view source, const std::string& origin = "<asm>",
                            std::map<std::string, uint32_t>* labels_out = nullptr) {
    using namespace asm_detail;

    TargetImage img;
    img.ram_size = 0x10000;
    std::vector<uint8_t>& rom = img.rom;
    std::map<std::string, uint32_t> labels;
    std::vector<PendingRef> refs;
    std::optional<std::string> entry_label, handler_label;
    bool entry_set = false;

    auto emit = [&](const Instr& ins) {
        auto bytes = encode_instr(ins);
        rom.insert(rom.end(), bytes.begin(), bytes.end());
    };

    int line_no = 0;
    size_t cursor = 0;
    while (cursor <= source.size()) {
        size_t eol = source.find('\n', cursor);
        std::string_view raw = source.substr(
            cursor, eol == std::string_view::npos ? source.size() - cursor : eol - cursor);
        cursor = eol == std::string_view::npos ? source.size() + 1 : eol + 1;
        line_no++;

        // Strip comments.
        std::string_view text = raw;
        for (size_t i = 0; i < text.size(); i++) {
            if (text[i] == ';' ||
                (text[i] == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
                text = text.substr(0, i);
                break;
            }
        }

        LineParser p(text, origin, line_no);
        if (p.done()) continue;

        // Labels, possibly several per line.
        while (true) {
            size_t save = p.pos;
            p.skip_ws();
            size_t start = p.pos;
            while (p.pos < text.size() &&
                   (std::isalnum(uint8_t(text[p.pos])) || text[p.pos] == '_'))
                p.pos++;
            if (p.pos > start && p.pos < text.size() && text[p.pos] == ':') {
                std::string label(text.substr(start, p.pos - start));
                p.pos++;
                if (labels.count(label)) p.fail("duplicate label '" + label + "'");
                labels[label] = uint32_t(rom.size());
                continue;
            }
            p.pos = save;
            break;
        }
        if (p.done()) continue;

        std::string mn = p.ident();
        for (char& c : mn) c = char(std::tolower(uint8_t(c)));

        if (mn[0] == '.') {
            if (mn == ".entry" || mn == ".handler") {
                uint32_t value = 0;
                auto label = p.imm_or_label(value);
                if (mn == ".entry") {
                    entry_set = true;
                    if (label) entry_label = *label; else img.entry = value;
                } else {
                    if (label) handler_label = *label; else img.handler = value;
                }
            } else if (mn == ".period") {
                img.period = p.number();
            } else if (mn == ".ram") {
                img.ram_size = p.number();
            } else if (mn == ".word") {
                uint32_t v = p.number();
                for (int i = 0; i < 4; i++) rom.push_back(uint8_t(v >> (8 * i)));
            } else {
                p.fail("unknown directive '" + mn + "'");
            }
            if (!p.done()) p.fail("trailing junk after directive");
            continue;
        }

        uint32_t here = uint32_t(rom.size());
        Instr ins{};
        auto want_label = [&](std::optional<std::string> label, bool relative) {
            if (label)
                refs.push_back({rom.size() + 4, *label, relative, here, line_no});
        };

        if (mn == "movi") {
            ins.op = Op::Movi;
            ins.ra = p.reg();
            p.expect(',', "after destination register");
            want_label(p.imm_or_label(ins.imm), false);
            emit(ins);
        } else if (mn == "mov") {
            ins.op = Op::Mov;
            ins.ra = p.reg();
            p.expect(',', "after destination register");
            ins.rb = p.reg();
            emit(ins);
        } else if (mn == "ldb" || mn == "ldh" || mn == "ldw") {
            ins.op = mn == "ldb" ? Op::Ldb : mn == "ldh" ? Op::Ldh : Op::Ldw;
            ins.ra = p.reg();
            p.expect(',', "after destination register");
            p.mem_operand(ins.rb, ins.imm);
            emit(ins);
        } else if (mn == "stb" || mn == "sth" || mn == "stw") {
            ins.op = mn == "stb" ? Op::Stb : mn == "sth" ? Op::Sth : Op::Stw;
            ins.ra = p.reg();
            p.expect(',', "after source register");
            p.mem_operand(ins.rb, ins.imm);
            emit(ins);
        } else if (mn == "add" || mn == "sub" || mn == "mul" || mn == "and" ||
                   mn == "or" || mn == "xor" || mn == "shl" || mn == "shr") {
            ins.op = mn == "add" ? Op::Add : mn == "sub" ? Op::Sub
                   : mn == "mul" ? Op::Mul : mn == "and" ? Op::And
                   : mn == "or" ? Op::Or : mn == "xor" ? Op::Xor
                   : mn == "shl" ? Op::Shl : Op::Shr;
            ins.ra = p.reg();
            p.expect(',', "after destination register");
            ins.rb = p.reg();
            p.expect(',', "after first operand");
            ins.rc = p.reg();
            emit(ins);
        } else if (mn == "cmp") {
            ins.op = Op::Cmp;
            ins.ra = p.reg();
            p.expect(',', "after first operand");
            ins.rb = p.reg();
            emit(ins);
        } else if (mn == "beq" || mn == "bne" || mn == "blt" || mn == "bge") {
            ins.op = mn == "beq" ? Op::Beq : mn == "bne" ? Op::Bne
                   : mn == "blt" ? Op::Blt : Op::Bge;
            want_label(p.imm_or_label(ins.imm), true);
            emit(ins);
        } else if (mn == "jmp" || mn == "call") {
            ins.op = mn == "jmp" ? Op::Jmp : Op::Call;
            want_label(p.imm_or_label(ins.imm), false);
            emit(ins);
        } else if (mn == "callr" || mn == "jmpr") {
            ins.op = mn == "callr" ? Op::Callr : Op::Jmpr;
            ins.ra = p.reg();
            emit(ins);
        } else if (mn == "ret") {
            ins.op = Op::Ret;
            emit(ins);
        } else if (mn == "halt") {
            ins.op = Op::Halt;
            emit(ins);
        } else {
            p.fail("unknown mnemonic '" + mn + "'");
        }
        if (!p.done()) p.fail("trailing junk after instruction");
    }

    auto resolve = [&](const std::string& label, int line) {
        auto it = labels.find(label);
        if (it == labels.end())
            throw AsmError(origin, line, "undefined label '" + label + "'");
        return it->second;
    };

    for (const PendingRef& ref : refs) {
        uint32_t target = resolve(ref.label, ref.line);
        uint32_t value = ref.relative ? target - ref.anchor : target;
        for (int i = 0; i < 4; i++)
            rom[ref.rom_offset + i] = uint8_t(value >> (8 * i));
    }

    if (entry_label) img.entry = resolve(*entry_label, 0);
    if (handler_label) img.handler = resolve(*handler_label, 0);
    if (!entry_set && !entry_label) img.entry = 0;

    if (rom.empty()) throw AsmError(origin, line_no, "no instructions assembled");
    if (labels_out) *labels_out = labels;
    return img;
}

inline TargetImage assemble_file(const std::string& path,
                                 std::map<std::string, uint32_t>* labels_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw AsmError(path, 0, "cannot open source file");
    std::string src((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return assemble(src, path, labels_out);
}

} // namespace frb
