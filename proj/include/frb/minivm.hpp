#pragma once

// Reference microcontroller VM.
//
// Memory map:  ROM  0x0000_0000 .. rom_size      execute + read
//              RAM  0x2000_0000 .. +ram_size     read + write
//              MMIO 0x4000_0000 .. +0x1000       device window
//
// Guest loads from the MMIO window consume input bytes little-endian and
// advance the input cursor; running dry terminates the run as InputExhausted.
// Oracle reads of the window are served from a backing store holding the last
// value the guest saw, so introspection never consumes input.
//
// Instructions are a fixed 8 bytes: opcode, three register operand bytes, and
// a 32-bit little-endian immediate. r13 is sp, r14 is lr, r15 is pc. Branch
// displacements are signed and relative to the branch's own address. CMP sets
// eq/lt (signed) flags for BEQ/BNE/BLT/BGE. CALL/CALLR push the return
// address on a shadow stack that RET pops; RET on an empty shadow stack is a
// StackUnderflow crash. A configured timer fires every `period` instructions:
// entry pushes the interrupted pc on the shadow stack and vectors to the
// handler; the VM banks pc/lr/flags and restores them at the matching RET, so
// handlers only need to preserve the general registers they touch. Interrupts
// do not nest.
//
// Block coverage records the entry address plus every instruction reached by
// a taken branch, CALL, CALLR, JMP, JMPR, RET or interrupt vector, and only
// when that instruction is actually fetched from the executable region.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frb/emulator_api.hpp"
#include "frb/hash.hpp"
#include "frb/raven_eval.hpp"

namespace frb {

constexpr uint64_t kRomBase = 0x0000'0000;
constexpr uint64_t kRamBase = 0x2000'0000;
constexpr uint64_t kMmioBase = 0x4000'0000;
constexpr uint64_t kMmioSize = 0x1000;

constexpr unsigned kInstrBytes = 8;
constexpr unsigned kRegSp = 13;
constexpr unsigned kRegLr = 14;
constexpr unsigned kRegPc = 15;

enum class Op : uint8_t {
    Movi = 0x01, Mov = 0x02,
    Ldb = 0x10, Ldh = 0x11, Ldw = 0x12,
    Stb = 0x18, Sth = 0x19, Stw = 0x1a,
    Add = 0x20, Sub = 0x21, Mul = 0x22,
    And = 0x23, Or = 0x24, Xor = 0x25,
    Shl = 0x26, Shr = 0x27,
    Cmp = 0x30,
    Beq = 0x38, Bne = 0x39, Blt = 0x3a, Bge = 0x3b,
    Jmp = 0x40, Call = 0x41, Callr = 0x42, Ret = 0x43, Jmpr = 0x44,
    Halt = 0x7f,
};

struct Instr {
    Op op;
    uint8_t ra = 0, rb = 0, rc = 0;
    uint32_t imm = 0;
};

inline std::array<uint8_t, kInstrBytes> encode_instr(const Instr& ins) {
    return {uint8_t(ins.op), ins.ra, ins.rb, ins.rc,
            uint8_t(ins.imm), uint8_t(ins.imm >> 8),
            uint8_t(ins.imm >> 16), uint8_t(ins.imm >> 24)};
}

struct TargetImage {
    uint32_t entry = 0;
    uint32_t handler = 0;       // interrupt vector; meaningful when period > 0
    uint32_t period = 0;        // 0 disables the timer
    uint32_t ram_size = 0x10000;
    std::vector<uint8_t> rom;
};

constexpr char kImageMagic[4] = {'M', 'V', 'M', '1'};

inline std::vector<uint8_t> serialize_image(const TargetImage& img) {
    std::vector<uint8_t> out(20 + img.rom.size());
    std::memcpy(out.data(), kImageMagic, 4);
    auto put32 = [&](size_t off, uint32_t v) {
        for (int i = 0; i < 4; i++) out[off + i] = uint8_t(v >> (8 * i));
    };
    put32(4, img.entry);
    put32(8, img.handler);
    put32(12, img.period);
    put32(16, img.ram_size);
    std::memcpy(out.data() + 20, img.rom.data(), img.rom.size());
    return out;
}

inline TargetImage parse_image(std::span<const uint8_t> bytes) {
    if (bytes.size() < 20 || std::memcmp(bytes.data(), kImageMagic, 4) != 0)
        throw BackendError("not a target image (bad magic)");
    auto get32 = [&](size_t off) {
        uint32_t v = 0;
        for (int i = 0; i < 4; i++) v |= uint32_t(bytes[off + i]) << (8 * i);
        return v;
    };
    TargetImage img;
    img.entry = get32(4);
    img.handler = get32(8);
    img.period = get32(12);
    img.ram_size = get32(16);
    img.rom.assign(bytes.begin() + 20, bytes.end());
    return img;
}

inline TargetImage load_image_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BackendError("cannot open image file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return parse_image(bytes);
}

inline void save_image_file(const TargetImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BackendError("cannot write image file: " + path);
    auto bytes = serialize_image(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

class MiniVm final : public BackendSession {
public:
    explicit MiniVm(TargetImage image) : img_(std::move(image)) {
        if (img_.rom.empty())
            throw BackendError("image has an empty ROM");
        if (img_.entry + kInstrBytes > img_.rom.size())
            throw BackendError("entry point outside ROM");
        if (img_.period > 0 && img_.handler + kInstrBytes > img_.rom.size())
            throw BackendError("interrupt handler outside ROM");
        ram_.assign(img_.ram_size, 0);
        mmio_.assign(kMmioSize, 0);
        regs_.fill(0);
        regs_[kRegPc] = img_.entry;
        regs_[kRegSp] = uint32_t(kRamBase + img_.ram_size);
    }

    BackendCapabilities capabilities() const override { return {true, true}; }

    void register_hook(uint64_t address, std::string hook_id,
                       std::function<HookAction(BackendSession&)> fn) override {
        if (address + kInstrBytes > img_.rom.size())
            throw BackendError("hook address 0x" + to_hex(address) +
                               " is outside the executable region (hook '" + hook_id + "')");
        hooks_[uint32_t(address)].push_back({std::move(hook_id), std::move(fn)});
    }

    Value read_register(uint64_t reg_id) override {
        if (reg_id > 15)
            throw IntrinsicError{"unknown register r" + std::to_string(reg_id)};
        return Value::make(regs_[reg_id], {64, false});
    }

    Value read_memory(uint64_t addr, uint64_t size) override {
        if (size != 1 && size != 2 && size != 4 && size != 8)
            throw IntrinsicError{"invalid width " + std::to_string(size) +
                                 " (must be 1, 2, 4 or 8)"};
        uint64_t v = 0;
        for (uint64_t i = 0; i < size; i++) {
            const uint8_t* cell = peek_byte(addr + i);
            if (!cell)
                throw IntrinsicError{"unmapped address 0x" + to_hex(addr + i)};
            v |= uint64_t(*cell) << (8 * i);
        }
        return Value::make(v, {uint8_t(size * 8), false});
    }

    ExecutionResult run(std::span<const uint8_t> input, const RunLimits& limits) override {
        if (ran_)
            throw BackendError("a session runs exactly one input");
        ran_ = true;
        input_ = input;
        ExecutionResult res;
        bool block_pending = true;      // entry counts as a block start

        while (true) {
            if (res.instructions_executed >= limits.max_instructions) {
                res.termination.kind = TerminationKind::StepLimit;
                break;
            }

            // Timer. Checked before the fetch so a pending interrupt wins over
            // hooks at the interrupted pc (the hook fires once, on resume).
            if (img_.period > 0 && !in_interrupt() &&
                res.instructions_executed > 0 &&
                res.instructions_executed % img_.period == 0 &&
                res.instructions_executed != last_interrupt_at_) {
                last_interrupt_at_ = res.instructions_executed;
                shadow_.push_back(regs_[kRegPc]);
                irq_frames_.push_back({regs_[kRegPc], regs_[kRegLr], flag_eq_, flag_lt_,
                                       shadow_.size()});
                regs_[kRegPc] = img_.handler;
                block_pending = true;
                continue;
            }

            uint32_t pc = regs_[kRegPc];
            if (uint64_t(pc) + kInstrBytes > img_.rom.size()) {
                crash(res, CrashReason::ExecOutsideRom, pc);
                break;
            }

            if (auto hit = hooks_.find(pc); hit != hooks_.end()) {
                bool aborted = false;
                for (auto& h : hit->second) {
                    HookAction act = h.fn(*this);
                    if (act.abort) {
                        res.termination.kind = TerminationKind::OracleAbort;
                        res.termination.bug_id = act.bug_id;
                        aborted = true;
                        break;
                    }
                }
                if (aborted) break;
            }

            if (block_pending) {
                res.covered_blocks.insert(pc);
                block_pending = false;
            }
            if (trace_) trace_->push_back(pc);

            Instr ins{};
            if (!decode(pc, ins)) {
                crash(res, CrashReason::InvalidOpcode, pc);
                break;
            }

            StepOutcome out = execute(ins, pc);
            if (out.exhausted) {
                res.termination.kind = TerminationKind::InputExhausted;
                break;
            }
            if (out.fault) {
                crash(res, *out.fault, pc);
                break;
            }
            res.instructions_executed++;
            if (out.halted) {
                res.termination.kind = TerminationKind::HaltedNormally;
                break;
            }
            block_pending = out.transferred;
        }
        return res;
    }

    uint64_t state_fingerprint() const override {
        Fnv1a64 h;
        for (uint32_t r : regs_) h.feed_u32(r);
        h.feed(uint8_t(flag_eq_));
        h.feed(uint8_t(flag_lt_));
        h.feed(std::span<const uint8_t>(ram_.data(), ram_.size()));
        h.feed(std::span<const uint8_t>(mmio_.data(), mmio_.size()));
        for (uint32_t f : shadow_) h.feed_u32(f);
        h.feed_u64(cursor_);
        h.feed_u64(last_interrupt_at_);
        h.feed_u64(uint64_t(irq_frames_.size()));
        for (const IrqFrame& f : irq_frames_) {
            h.feed_u32(f.saved_pc);
            h.feed_u32(f.saved_lr);
            h.feed(uint8_t(f.saved_eq));
            h.feed(uint8_t(f.saved_lt));
        }
        return h.state;
    }

    // Test support: record every executed pc.
    void enable_trace(std::vector<uint32_t>& sink) { trace_ = &sink; }
    const std::vector<uint32_t>& shadow_stack() const { return shadow_; }
    uint64_t input_cursor() const { return cursor_; }

private:
    struct Hook {
        std::string id;
        std::function<HookAction(BackendSession&)> fn;
    };

    struct IrqFrame {
        uint32_t saved_pc, saved_lr;
        bool saved_eq, saved_lt;
        size_t shadow_depth;    // shadow size right after the entry push
    };

    struct StepOutcome {
        bool transferred = false;
        bool halted = false;
        bool exhausted = false;
        std::optional<CrashReason> fault;
    };

    static std::string to_hex(uint64_t v) {
        char buf[20];
        snprintf(buf, sizeof buf, "%llx", (unsigned long long)v);
        return buf;
    }

    bool in_interrupt() const { return !irq_frames_.empty(); }

    void crash(ExecutionResult& res, CrashReason reason, uint32_t pc) {
        res.termination.kind = TerminationKind::Crash;
        res.termination.reason = reason;
        res.termination.pc = pc;
        res.termination.lr = regs_[kRegLr];
        res.termination.shadow_stack.assign(shadow_.begin(), shadow_.end());
    }

    bool decode(uint32_t pc, Instr& ins) const {
        const uint8_t* p = img_.rom.data() + pc;
        uint8_t op = p[0];
        switch (Op(op)) {
            case Op::Movi: case Op::Mov:
            case Op::Ldb: case Op::Ldh: case Op::Ldw:
            case Op::Stb: case Op::Sth: case Op::Stw:
            case Op::Add: case Op::Sub: case Op::Mul:
            case Op::And: case Op::Or: case Op::Xor:
            case Op::Shl: case Op::Shr: case Op::Cmp:
            case Op::Beq: case Op::Bne: case Op::Blt: case Op::Bge:
            case Op::Jmp: case Op::Call: case Op::Callr: case Op::Ret:
            case Op::Jmpr: case Op::Halt:
                break;
            default:
                return false;
        }
        ins.op = Op(op);
        ins.ra = p[1] & 0x0f;
        ins.rb = p[2] & 0x0f;
        ins.rc = p[3] & 0x0f;
        ins.imm = uint32_t(p[4]) | uint32_t(p[5]) << 8 | uint32_t(p[6]) << 16 |
                  uint32_t(p[7]) << 24;
        return true;
    }

    // One mapped byte, or null. Used by oracle reads and guest accesses alike;
    // MMIO resolves to the backing store.
    const uint8_t* peek_byte(uint64_t addr) const {
        if (addr >= kRomBase && addr < kRomBase + img_.rom.size())
            return &img_.rom[addr - kRomBase];
        if (addr >= kRamBase && addr < kRamBase + ram_.size())
            return &ram_[addr - kRamBase];
        if (addr >= kMmioBase && addr < kMmioBase + kMmioSize)
            return &mmio_[addr - kMmioBase];
        return nullptr;
    }

    bool mmio_range(uint64_t addr, unsigned width) const {
        return addr >= kMmioBase && addr + width <= kMmioBase + kMmioSize;
    }
    bool ram_range(uint64_t addr, unsigned width) const {
        return addr >= kRamBase && addr + width <= kRamBase + ram_.size();
    }
    bool rom_range(uint64_t addr, unsigned width) const {
        return addr >= kRomBase && addr + width <= kRomBase + img_.rom.size();
    }

    StepOutcome execute(const Instr& ins, uint32_t pc) {
        StepOutcome out;
        uint32_t next = pc + kInstrBytes;
        auto& r = regs_;

        auto take = [&](uint32_t target) {
            next = target;
            out.transferred = true;
        };

        switch (ins.op) {
            case Op::Movi: r[ins.ra] = ins.imm; break;
            case Op::Mov:  r[ins.ra] = r[ins.rb]; break;

            case Op::Ldb: case Op::Ldh: case Op::Ldw: {
                unsigned width = ins.op == Op::Ldb ? 1 : ins.op == Op::Ldh ? 2 : 4;
                uint64_t addr = uint64_t(r[ins.rb]) + ins.imm;
                uint32_t v = 0;
                if (mmio_range(addr, width)) {
                    if (cursor_ + width > input_.size()) {
                        out.exhausted = true;
                        return out;
                    }
                    for (unsigned i = 0; i < width; i++) {
                        uint8_t b = input_[cursor_++];
                        mmio_[addr - kMmioBase + i] = b;   // backing for oracle reads
                        v |= uint32_t(b) << (8 * i);
                    }
                } else if (ram_range(addr, width) || rom_range(addr, width)) {
                    for (unsigned i = 0; i < width; i++)
                        v |= uint32_t(*peek_byte(addr + i)) << (8 * i);
                } else {
                    out.fault = CrashReason::UnmappedRead;
                    return out;
                }
                r[ins.ra] = v;
                break;
            }

            case Op::Stb: case Op::Sth: case Op::Stw: {
                unsigned width = ins.op == Op::Stb ? 1 : ins.op == Op::Sth ? 2 : 4;
                uint64_t addr = uint64_t(r[ins.rb]) + ins.imm;
                uint32_t v = r[ins.ra];
                if (ram_range(addr, width)) {
                    for (unsigned i = 0; i < width; i++)
                        ram_[addr - kRamBase + i] = uint8_t(v >> (8 * i));
                } else if (mmio_range(addr, width)) {
                    for (unsigned i = 0; i < width; i++)
                        mmio_[addr - kMmioBase + i] = uint8_t(v >> (8 * i));
                } else {
                    out.fault = CrashReason::UnmappedWrite;
                    return out;
                }
                break;
            }

            case Op::Add: r[ins.ra] = r[ins.rb] + r[ins.rc]; break;
            case Op::Sub: r[ins.ra] = r[ins.rb] - r[ins.rc]; break;
            case Op::Mul: r[ins.ra] = r[ins.rb] * r[ins.rc]; break;
            case Op::And: r[ins.ra] = r[ins.rb] & r[ins.rc]; break;
            case Op::Or:  r[ins.ra] = r[ins.rb] | r[ins.rc]; break;
            case Op::Xor: r[ins.ra] = r[ins.rb] ^ r[ins.rc]; break;
            case Op::Shl: r[ins.ra] = r[ins.rb] << (r[ins.rc] & 31); break;
            case Op::Shr: r[ins.ra] = r[ins.rb] >> (r[ins.rc] & 31); break;

            case Op::Cmp:
                flag_eq_ = r[ins.ra] == r[ins.rb];
                flag_lt_ = int32_t(r[ins.ra]) < int32_t(r[ins.rb]);
                break;

            case Op::Beq: if (flag_eq_) take(pc + ins.imm); break;
            case Op::Bne: if (!flag_eq_) take(pc + ins.imm); break;
            case Op::Blt: if (flag_lt_) take(pc + ins.imm); break;
            case Op::Bge: if (!flag_lt_) take(pc + ins.imm); break;

            case Op::Jmp: take(ins.imm); break;

            case Op::Call:
                r[kRegLr] = pc + kInstrBytes;
                shadow_.push_back(pc + kInstrBytes);
                take(ins.imm);
                break;

            case Op::Callr:
                r[kRegLr] = pc + kInstrBytes;
                shadow_.push_back(pc + kInstrBytes);
                take(r[ins.ra]);
                break;

            case Op::Ret: {
                if (in_interrupt() && shadow_.size() == irq_frames_.back().shadow_depth) {
                    const IrqFrame& f = irq_frames_.back();
                    r[kRegLr] = f.saved_lr;
                    flag_eq_ = f.saved_eq;
                    flag_lt_ = f.saved_lt;
                    shadow_.pop_back();
                    uint32_t resume = f.saved_pc;
                    irq_frames_.pop_back();
                    take(resume);
                    break;
                }
                if (shadow_.empty()) {
                    out.fault = CrashReason::StackUnderflow;
                    return out;
                }
                shadow_.pop_back();
                take(r[kRegLr]);
                break;
            }

            case Op::Jmpr: take(r[ins.ra]); break;

            case Op::Halt: out.halted = true; break;
        }

        regs_[kRegPc] = next;
        return out;
    }

    TargetImage img_;
    std::array<uint32_t, 16> regs_{};
    std::vector<uint8_t> ram_;
    std::vector<uint8_t> mmio_;
    std::vector<uint32_t> shadow_;
    std::vector<IrqFrame> irq_frames_;
    bool flag_eq_ = false, flag_lt_ = false;
    uint64_t last_interrupt_at_ = 0;
    bool ran_ = false;

    std::span<const uint8_t> input_;
    uint64_t cursor_ = 0;

    std::map<uint32_t, std::vector<Hook>> hooks_;
    std::vector<uint32_t>* trace_ = nullptr;
};

} // namespace frb
