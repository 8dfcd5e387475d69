// Deterministic fixture builder.
//
// Emits the committed fixture tree: assembly targets and their images,
// oracle scripts with metadata sidecars, fuzzing corpora with provenance
// logs, and golden replay outcomes produced by the real pipeline. Running
// with --check regenerates everything into a temporary directory and
// byte-compares it against the committed tree, so stale fixtures fail CI.
//
//   frb_make_fixtures <dir>            (re)generate the tree
//   frb_make_fixtures --check <dir>    verify the tree is current

#include <cstring>
#include <iostream>

#include "frb/frb.hpp"

namespace fs = std::filesystem;

namespace {

struct Builder {
    fs::path root;

    void file(const std::string& rel, const std::vector<uint8_t>& bytes) {
        fs::path p = root / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  std::streamsize(bytes.size()));
    }
    void file(const std::string& rel, const std::string& text) {
        file(rel, std::vector<uint8_t>(text.begin(), text.end()));
    }
};

std::string hex32(uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

// ---- targets ----------------------------------------------------------------

// Length-prefixed copy into an 8-byte buffer with a function pointer in the
// adjacent word. The unpatched build uses an identity mask (0xff) on the
// length; the patch masks with 7 so the copy can never leave the buffer.
// The two builds differ only in that one immediate, so they share every
// block address.
std::string overflow_asm(bool patched) {
    std::string mask = patched ? "#0x07" : "#0xff";
    return std::string(R"(; length-prefixed copy into a fixed 8-byte buffer at 0x20000100.
; the word at 0x20000108 holds a function pointer called after the copy;
; copy lengths above 8 overwrite it.
.entry start

start:
    movi r0, #0x20000100      ; buffer
    movi r9, good_handler
    stw  r9, [r0+8]           ; pointer slot sits right after the buffer
    movi r1, #0x40000000      ; input port
    ldb  r5, [r1]             ; length byte
post_len:
    movi r2, #0               ; copy index
    movi r12, )") + mask +
           R"(            ; length mask: 0xff keeps the bug, 0x07 fixes it
    and  r11, r5, r12         ; effective copy bound
copy_loop:
    cmp  r2, r11
    bge  copy_done
    ldb  r3, [r1]
    add  r4, r0, r2
    stb  r3, [r4]
    movi r6, #1
    add  r2, r2, r6
    jmp  copy_loop
copy_done:
    movi r6, #8
    cmp  r6, r11
    blt  overflow_note        ; bound > 8 is only reachable unpatched
call_fp:
    ldw  r7, [r0+8]
    callr r7                  ; through the (possibly corrupted) pointer
    halt
overflow_note:
    movi r6, #0xee
    jmp  call_fp
good_handler:
    movi r8, #1
    ret
dead_code:                    ; never reached by honest control flow
    movi r3, #0x50000000
    stw  r3, [r3]             ; unmapped write
    halt
)";
}

// Two distinct overflows (different buffers, different bounds) that corrupt
// the same shared function-pointer slot, so their crashes collide on the
// (pc, lr) signature.
constexpr const char* kGateway2Asm =
    R"(; two entry paths overflow different buffers that both border the shared
; pointer slot at 0x20000400. path a: 8-byte buffer at 0x200003f8; path b:
; 16-byte buffer at 0x200003f0.
.entry start

start:
    movi r1, #0x40000000
    movi r9, safe_ret
    movi r10, #0x20000400
    stw  r9, [r10]            ; shared pointer slot
    ldb  r4, [r1]             ; mode selector
    movi r6, #1
    cmp  r4, r6
    beq  path_a
    movi r6, #2
    cmp  r4, r6
    beq  path_b
    halt
path_a:
    movi r0, #0x200003f8
    ldb  r5, [r1]             ; length
hook_a:
    movi r2, #0
    jmp  copy
path_b:
    movi r0, #0x200003f0
    ldb  r5, [r1]             ; length
hook_b:
    movi r2, #0
    jmp  copy
copy:
    cmp  r2, r5
    bge  dispatch
    ldb  r3, [r1]
    add  r4, r0, r2
    stb  r3, [r4]
    movi r6, #1
    add  r2, r2, r6
    jmp  copy
dispatch:
    ldw  r7, [r10]
    callr r7
    halt
safe_ret:
    ret
)";

// Main does pure computation; only the timer handler consumes input. A
// malicious byte crashes in a helper shared by every interrupt, so the
// fault pc and lr are identical while the interrupted frame differs.
constexpr const char* kIrqTimingAsm =
    R"(; timer-driven input handling. the handler calls g, which reads one byte
; from the input port and faults when it reads 0xee.
.entry start
.handler handler
.period 40

start:
    call f1
    call f2
    jmp  start
f1:
    movi r2, #8
f1_loop:
    movi r6, #1
    sub  r2, r2, r6
    movi r6, #0
    cmp  r2, r6
    bne  f1_loop
    ret
f2:
    movi r2, #200
f2_loop:
    movi r6, #1
    sub  r2, r2, r6
    movi r6, #0
    cmp  r2, r6
    bne  f2_loop
    ret
handler:
    call g
    ret
g:
    movi r1, #0x40000000      ; handler scratch stays off r2/r6, which main uses
    ldb  r3, [r1]
g_check:
    movi r8, #238
    cmp  r3, r8
    bne  g_done
    movi r4, #0x60000000
    stw  r4, [r4]             ; unmapped write inside the handler path
g_done:
    ret
)";

// 32-bit magic gate, then a payload byte; bytes above 0x7f crash.
constexpr const char* kMagicAsm =
    R"(; reads a 4-byte magic word, rejects mismatches, then mishandles
; payload bytes above 0x7f.
.entry start

start:
    movi r1, #0x40000000
    ldw  r0, [r1]             ; magic word (consumes 4 bytes)
    movi r2, #0x21425246      ; "FRB!"
    cmp  r0, r2
    bne  reject
guarded:
    ldb  r3, [r1]             ; payload byte
post_payload:
    movi r6, #127
    cmp  r6, r3
    blt  boom                 ; payload > 127
    halt
boom:
    movi r4, #0x70000000
    stw  r4, [r4]
reject:
    halt
)";

// Sixteen bytes are drained before the byte that matters is read.
constexpr const char* kDelayAsm =
    R"(; drains 16 input bytes, then the 17th byte 0x42 triggers the fault.
.entry start

start:
    movi r1, #0x40000000
    movi r2, #16
drain:
    movi r6, #0
    cmp  r2, r6
    beq  check
    ldb  r3, [r1]
    movi r6, #1
    sub  r2, r2, r6
    jmp  drain
check:
    ldb  r4, [r1]             ; the byte that matters
post_check:
    movi r6, #0x42
    cmp  r4, r6
    bne  ok
    movi r5, #0x7fff0000
    stw  r5, [r5]
ok:
    halt
)";

// Two independent bug conditions observed at two separate points in one run.
constexpr const char* kTwobugAsm =
    R"(; reads bytes a, b, c. a == 0x11 and b == 0x22 are two independent bug
; conditions; c == 0x99 additionally crashes.
.entry start

start:
    movi r1, #0x40000000
    ldb  r2, [r1]             ; a
chk_a:
    movi r6, #0x11
    ldb  r3, [r1]             ; b
chk_b:
    movi r6, #0x22
    ldb  r4, [r1]             ; c
    movi r6, #0x99
    cmp  r4, r6
    bne  fine
    movi r5, #0x77000000
    stw  r5, [r5]
fine:
    halt
)";

// Three distinct crash sites selected by the first input byte.
constexpr const char* kValidate3Asm =
    R"(; byte 1, 2 or 3 reaches a distinct crash site; anything else halts.
.entry start

start:
    movi r1, #0x40000000
    ldb  r2, [r1]
sel:
    movi r6, #1
    cmp  r2, r6
    beq  boom1
    movi r6, #2
    cmp  r2, r6
    beq  boom2
    movi r6, #3
    cmp  r2, r6
    beq  boom3
    halt
boom1:
    movi r5, #0x71000000
    stw  r5, [r5]
boom2:
    movi r5, #0x72000000
    stw  r5, [r5]
boom3:
    movi r5, #0x73000000
    stw  r5, [r5]
)";

// ---- oracle scripts ---------------------------------------------------------

std::string raven_threshold(const std::string& fn, uint32_t addr, const std::string& bug,
                            int reg, const std::string& cmp_expr) {
    return "context_struct hook_addresses[] = {\n    {" + hex32(addr) + ", " + fn +
           "},\n};\n\nuint32_t observed;\n\nvoid " + fn + "() {\n    report_reached(\"" + bug +
           "\");\n    observed = frb_reg_state(" + std::to_string(reg) + ");\n    if (observed " +
           cmp_expr + ") {\n        report_detected_triggered(\"" + bug + "\");\n    }\n}\n";
}

std::string raven_unconditional(const std::string& fn, uint32_t addr, const std::string& bug) {
    return "context_struct hook_addresses[] = {\n    {" + hex32(addr) + ", " + fn +
           "},\n};\n\nvoid " + fn + "() {\n    report_reached(\"" + bug +
           "\");\n    report_detected_triggered(\"" + bug + "\");\n}\n";
}

// ---- corpora ----------------------------------------------------------------

struct Seed {
    std::string rel; // queue/... or crashes/...
    std::vector<uint8_t> bytes;
    double t = 0;
};

void write_corpus(Builder& b, const std::string& dir, const std::vector<Seed>& seeds) {
    std::string log;
    for (const auto& s : seeds) {
        b.file(dir + "/" + s.rel, s.bytes);
        bool crash = s.rel.rfind("crashes/", 0) == 0;
        nlohmann::ordered_json line;
        line["file"] = s.rel;
        line["t"] = s.t;
        line["kind"] = crash ? "crash" : "queue";
        log += line.dump() + "\n";
    }
    b.file(dir + "/fuzz_log.jsonl", log);
}

std::vector<uint8_t> cat(std::initializer_list<std::vector<uint8_t>> parts) {
    std::vector<uint8_t> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<uint8_t> rep(uint8_t byte, size_t n) { return std::vector<uint8_t>(n, byte); }

std::vector<uint8_t> le32(uint32_t v) {
    return {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
}

// ---- golden outcomes --------------------------------------------------------

void write_expected(Builder& b, const std::string& name, const std::string& image_rel,
                    const std::string& ravens_rel, const std::string& corpus_rel,
                    const std::string& fuzzer, int trial) {
    frb::TargetImage image = frb::load_image_file((b.root / image_rel).string());
    frb::RavenSet ravens = frb::load_raven_dir((b.root / ravens_rel).string());
    frb::IngestOptions opts;
    opts.fuzzer_name = fuzzer;
    opts.trial_index = trial;
    frb::IngestResult corpus =
        frb::ingest_campaign((b.root / corpus_rel).string(), std::nullopt, opts);
    if (!corpus.warnings.empty())
        throw std::runtime_error(name + ": fixture corpus must be fully logged");

    std::vector<frb::ReplayOutcome> outcomes = frb::replay_all(image, ravens, corpus.records);
    std::string jsonl;
    for (const auto& o : outcomes) jsonl += frb::outcome_to_json(o).dump() + "\n";
    b.file("expected/" + name + "/outcomes.jsonl", jsonl);
    frb::ReplayMeta meta =
        frb::make_replay_meta(image, ravens, corpus.records, fuzzer, trial, corpus.warnings);
    b.file("expected/" + name + "/replay_meta.json",
           frb::replay_meta_to_json(meta).dump(2) + "\n");
}

// ---- tree assembly ----------------------------------------------------------

void build_tree(Builder& b) {
    using Labels = std::map<std::string, uint32_t>;

    auto target = [&](const std::string& name, const std::string& src) {
        Labels labels;
        frb::TargetImage img = frb::assemble(src, name + ".asm", &labels);
        b.file("targets/" + name + ".asm", src);
        b.file("targets/" + name + ".img", frb::serialize_image(img));
        return labels;
    };

    // overflow + patched twin -------------------------------------------------
    Labels ovf = target("overflow", overflow_asm(false));
    Labels ovf_p = target("overflow_patched", overflow_asm(true));
    if (ovf != ovf_p)
        throw std::runtime_error("overflow twins diverged: patch must not move any label");

    b.file("ravens/overflow/frb_ovf1.raven",
           raven_threshold("check_copy_length", ovf.at("post_len"), "FRB_OVF1", 5, "> 8"));
    b.file("ravens/overflow/frb_ovf1.json",
           std::string(R"({"bug_id": "FRB_OVF1", "cwe": "CWE-787"})") + "\n");

    uint8_t handler_lo = uint8_t(ovf.at("good_handler") & 0xff);
    if (handler_lo == 0)
        throw std::runtime_error("good_handler low byte is zero; silent seed degenerates");
    write_corpus(b, "corpora/overflow",
                 {
                     {"queue/len0", {0}, 5},
                     {"queue/len3", {3, 'a', 'b', 'c'}, 10},
                     {"queue/len7", {7, 1, 2, 3, 4, 5, 6, 7}, 30},
                     {"queue/len8", cat({{8}, rep(0x20, 8)}), 60},
                     // overwrites the pointer's low byte with its own value:
                     // triggered, but no crash
                     {"queue/silent9", cat({{9}, rep(0x41, 8), {handler_lo}}), 120},
                     {"queue/len5", {5, 'h', 'e', 'l', 'l', 'o'}, 200},
                     {"crashes/fp_garbage1", cat({{12}, rep(0x41, 8), le32(0xdeadbeef)}), 300},
                     {"crashes/fp_garbage1b", cat({{12}, rep(0x41, 8), le32(0xdeadbeef)}), 420},
                     {"crashes/fp_garbage2", cat({{12}, rep(0x41, 8), le32(0x0badf00d)}), 600},
                     {"crashes/fp_gadget",
                      cat({{12}, rep(0x41, 8), le32(ovf.at("dead_code"))}), 900},
                 });

    // gateway2 -----------------------------------------------------------------
    Labels gw = target("gateway2", kGateway2Asm);
    b.file("ravens/gateway2/gw_ova.raven",
           raven_threshold("check_path_a", gw.at("hook_a"), "GW_OVA", 5, "> 8"));
    b.file("ravens/gateway2/gw_ova.json",
           std::string(R"({"bug_id": "GW_OVA", "cwe": "CWE-787"})") + "\n");
    b.file("ravens/gateway2/gw_ovb.raven",
           raven_threshold("check_path_b", gw.at("hook_b"), "GW_OVB", 5, "> 16"));
    b.file("ravens/gateway2/gw_ovb.json",
           std::string(R"({"bug_id": "GW_OVB", "cwe": "CWE-787"})") + "\n");
    write_corpus(b, "corpora/gateway2",
                 {
                     {"queue/mode1_small", {1, 3, 'a', 'b', 'c'}, 10},
                     {"queue/mode2_small", {2, 5, 'h', 'e', 'l', 'l', 'o'}, 20},
                     {"crashes/ova", cat({{1, 12}, rep(0x41, 8), le32(0xdeadbeef)}), 100},
                     {"crashes/ovb", cat({{2, 20}, rep(0x42, 16), le32(0xdeadbeef)}), 200},
                 });

    // irq_timing ---------------------------------------------------------------
    Labels irq = target("irq_timing", kIrqTimingAsm);
    b.file("ravens/irq/irq1.raven",
           raven_threshold("check_handler_byte", irq.at("g_check"), "IRQ1", 3, "== 238"));
    b.file("ravens/irq/irq1.json",
           std::string(R"({"bug_id": "IRQ1", "cwe": "CWE-20"})") + "\n");
    write_corpus(b, "corpora/irq",
                 {
                     {"queue/benign", {0x00}, 15},
                     {"crashes/irq_first", {0xee}, 100},
                     {"crashes/irq_second", {0x00, 0xee}, 250},
                 });

    // magic ----------------------------------------------------------------
    Labels magic = target("magic", kMagicAsm);
    b.file("ravens/magic/magic1.raven",
           raven_threshold("check_payload", magic.at("post_payload"), "MAGIC1", 3, "> 127"));
    b.file("ravens/magic/magic1.json",
           std::string(R"({"bug_id": "MAGIC1", "cwe": "CWE-787"})") + "\n");
    // A decoy oracle: "suspicious" input that never corresponds to a real
    // fault. The FP_ prefix marks it false-positive by convention.
    b.file("ravens/magic/fp_decoy1.raven",
           std::string("context_struct hook_addresses[] = {\n    {") + hex32(magic.at("reject")) +
               ", decoy_probe},\n};\n\nuint32_t word;\n\nvoid decoy_probe() {\n"
               "    report_reached(\"FP_DECOY1\");\n    word = frb_reg_state(0);\n"
               "    if ((word & 255) == 0) {\n        report_detected_triggered(\"FP_DECOY1\");\n"
               "    }\n}\n");
    b.file("ravens/magic/fp_decoy1.json",
           std::string(R"({"bug_id": "FP_DECOY1", "false_positive": true, "cwe": "EMU-ARTIFACT"})") +
               "\n");

    std::vector<Seed> magic_seeds;
    for (int i = 0; i < 256; i++) {
        if (i == 'F') continue; // the matching prefix appears only in the crash seed
        char rel[32];
        std::snprintf(rel, sizeof rel, "queue/seed_%03d", i);
        magic_seeds.push_back({rel, {uint8_t(i), 'R', 'B', '!', 0x55}, 2.0 * i});
    }
    magic_seeds.push_back({"crashes/magic_hit", {'F', 'R', 'B', '!', 0xbe}, 600});
    write_corpus(b, "corpora/magic", magic_seeds);

    // delay ----------------------------------------------------------------
    Labels delay = target("delay", kDelayAsm);
    // This oracle reads the device-port backing store rather than a register.
    b.file("ravens/delay/delay1.raven",
           std::string("context_struct hook_addresses[] = {\n    {") +
               hex32(delay.at("post_check")) +
               ", check_17th_byte},\n};\n\nuint32_t last_byte;\n\nvoid check_17th_byte() {\n"
               "    report_reached(\"DELAY1\");\n"
               "    last_byte = frb_mem_read(0x40000000, 1);\n"
               "    if (last_byte == 0x42) {\n        report_detected_triggered(\"DELAY1\");\n"
               "    }\n}\n");
    write_corpus(b, "corpora/delay",
                 {
                     {"queue/short", rep(0x00, 10), 10},
                     {"queue/full_benign", rep(0x00, 17), 50},
                     {"crashes/delayed", cat({rep(0x00, 16), {0x42}}), 400},
                 });

    // twobug ---------------------------------------------------------------
    Labels twobug = target("twobug", kTwobugAsm);
    b.file("ravens/twobug/tb_b1.raven",
           raven_threshold("check_a", twobug.at("chk_a"), "TB_B1", 2, "== 0x11"));
    b.file("ravens/twobug/tb_b2.raven",
           raven_threshold("check_b", twobug.at("chk_b"), "TB_B2", 3, "== 0x22"));
    write_corpus(b, "corpora/twobug",
                 {
                     {"queue/none", {0, 0, 0}, 5},
                     {"queue/only_b1", {0x11, 0, 0}, 10},
                     {"queue/only_b2", {0, 0x22, 0}, 20},
                     {"queue/both", {0x11, 0x22, 0}, 30},
                     {"crashes/both_crash", {0x11, 0x22, 0x99}, 300},
                 });

    // validate3 --------------------------------------------------------------
    Labels val = target("validate3", kValidate3Asm);
    b.file("ravens/validate3/v1.raven",
           raven_unconditional("v1_hit", val.at("boom1"), "V1"));
    b.file("ravens/validate3/v2.raven",
           raven_unconditional("v2_hit", val.at("boom2"), "V2"));
    b.file("ravens/validate3/v3.raven",
           raven_unconditional("v3_hit", val.at("boom3"), "V3"));
    // A deliberately over-broad variant set: VX also claims selectors 1-2.
    for (const char* f : {"v1", "v2", "v3"}) {
        std::ifstream in(b.root / ("ravens/validate3/" + std::string(f) + ".raven"));
        std::string src((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        b.file("ravens/validate3_overbroad/" + std::string(f) + ".raven", src);
    }
    b.file("ravens/validate3_overbroad/vx.raven",
           std::string("context_struct hook_addresses[] = {\n    {") + hex32(val.at("sel")) +
               ", vx_probe},\n};\n\nuint32_t selector;\n\nvoid vx_probe() {\n"
               "    report_reached(\"VX\");\n    selector = frb_reg_state(2);\n"
               "    if (selector > 0 && selector < 3) {\n"
               "        report_detected_triggered(\"VX\");\n    }\n}\n");
    write_corpus(b, "corpora/validate3",
                 {
                     {"queue/benign", {0}, 10},
                     {"crashes/v1", {1}, 60},
                     {"crashes/v2", {2}, 120},
                     {"crashes/v3", {3}, 180},
                 });

    // mf04: the worked type-confusion example; its target rom is synthesized
    // in tests around the published hook address.
    b.file("ravens/mf04/mf04.raven",
           std::string("context_struct hook_addresses[] = {\n"
                       "    {0x08005e28, BUG_MF04},\n"
                       "};\n\n"
                       "void BUG_MF04() {\n"
                       "    report_reached(\"MF04\");\n"
                       "    uint32_t read_addr = frb_reg_state[0] + 0x4;\n"
                       "    if (frb_mem_read(read_addr, 4) != 0x0800f7e4) {\n"
                       "        report_detected_triggered(\"MF04\");\n"
                       "    }\n"
                       "}\n"));
    b.file("ravens/mf04/mf04.json",
           std::string(R"({"bug_id": "MF04", "cwe": "CWE-843"})") + "\n");

    // survival demo: two synthetic fuzzers, ten trials each, on the magic
    // target. demo_a finds the bug at 780 s in every trial; demo_b finds it
    // at 3000 s in four of ten.
    for (int trial = 0; trial < 10; trial++) {
        char dir[64];
        std::snprintf(dir, sizeof dir, "corpora/survival_demo/demo_a/t%02d", trial);
        write_corpus(b, dir,
                     {
                         {"queue/probe", {0x00, 'R', 'B', '!', 0x55}, 1},
                         {"crashes/hit", {'F', 'R', 'B', '!', 0xbe}, 780},
                     });
    }
    for (int trial = 0; trial < 10; trial++) {
        char dir[64];
        std::snprintf(dir, sizeof dir, "corpora/survival_demo/demo_b/t%02d", trial);
        std::vector<Seed> seeds = {{"queue/probe", {0x00, 'R', 'B', '!', 0x55}, 1}};
        if (trial < 4) seeds.push_back({"crashes/hit", {'F', 'R', 'B', '!', 0xbe}, 3000});
        write_corpus(b, dir, seeds);
    }

    // golden outcomes, produced by the real pipeline ---------------------------
    write_expected(b, "overflow", "targets/overflow.img", "ravens/overflow",
                   "corpora/overflow", "fixture", 0);
    write_expected(b, "gateway2", "targets/gateway2.img", "ravens/gateway2",
                   "corpora/gateway2", "fixture", 0);
    write_expected(b, "irq", "targets/irq_timing.img", "ravens/irq", "corpora/irq",
                   "fixture", 0);
    write_expected(b, "magic", "targets/magic.img", "ravens/magic", "corpora/magic",
                   "fixture", 0);
    write_expected(b, "delay", "targets/delay.img", "ravens/delay", "corpora/delay",
                   "fixture", 0);
    write_expected(b, "twobug", "targets/twobug.img", "ravens/twobug", "corpora/twobug",
                   "fixture", 0);
    write_expected(b, "validate3", "targets/validate3.img", "ravens/validate3",
                   "corpora/validate3", "fixture", 0);
    for (int trial = 0; trial < 10; trial++) {
        char name[64], corpus[64];
        std::snprintf(name, sizeof name, "survival_demo/demo_a_t%02d", trial);
        std::snprintf(corpus, sizeof corpus, "corpora/survival_demo/demo_a/t%02d", trial);
        write_expected(b, name, "targets/magic.img", "ravens/magic", corpus, "demo_a", trial);
        std::snprintf(name, sizeof name, "survival_demo/demo_b_t%02d", trial);
        std::snprintf(corpus, sizeof corpus, "corpora/survival_demo/demo_b/t%02d", trial);
        write_expected(b, name, "targets/magic.img", "ravens/magic", corpus, "demo_b", trial);
    }

    b.file("README.md", std::string(R"(# Fixtures

Everything in this directory is generated by `frb_make_fixtures`. Do not edit
by hand; regenerate after changing the generator:

    build/frb_make_fixtures fixtures

The `fixture_freshness` ctest rebuilds the tree into a temporary directory and
byte-compares it against this one, so stale or hand-edited fixtures fail CI.

Layout:

- `targets/*.asm`, `targets/*.img` — assembly sources and their assembled
  images. `overflow_patched` differs from `overflow` by a single mask
  immediate, which fixes the bug without moving any code.
- `ravens/<target>/` — oracle scripts (plus optional `.json` metadata
  sidecars) for each target. `validate3_overbroad/` adds a deliberately
  over-broad oracle for exercising cross-match detection.
- `corpora/<target>/` — fuzzing campaign directories (`queue/`, `crashes/`,
  `fuzz_log.jsonl`). Every seed is logged, so ingestion never falls back to
  file mtimes. `corpora/survival_demo/` holds two synthetic fuzzers with ten
  trials each against the `magic` target.
- `expected/<name>/` — golden `outcomes.jsonl` and `replay_meta.json` produced
  by running the real replay pipeline over the files above.
)"));
}

// ---- check mode ---------------------------------------------------------

std::map<std::string, std::vector<uint8_t>> slurp_tree(const fs::path& root) {
    std::map<std::string, std::vector<uint8_t>> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), root).generic_string()] =
            std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
    }
    return files;
}

int check_tree(const fs::path& committed) {
    fs::path tmp = fs::temp_directory_path() /
                   ("frb_fixture_check_" + std::to_string(::getpid()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    int rc = 0;
    try {
        Builder b{tmp};
        build_tree(b);
        auto want = slurp_tree(tmp);
        auto have = slurp_tree(committed);
        for (const auto& [rel, bytes] : want) {
            auto it = have.find(rel);
            if (it == have.end()) {
                std::cerr << "missing from fixtures: " << rel << "\n";
                rc = 1;
            } else if (it->second != bytes) {
                std::cerr << "stale fixture: " << rel << "\n";
                rc = 1;
            }
        }
        for (const auto& [rel, bytes] : have)
            if (!want.count(rel)) {
                std::cerr << "unexpected fixture file: " << rel << "\n";
                rc = 1;
            }
    } catch (const std::exception& e) {
        std::cerr << "fixture generation failed: " << e.what() << "\n";
        rc = 1;
    }
    fs::remove_all(tmp);
    if (rc == 0) std::cout << "fixtures are current\n";
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    try {
        if (argc == 3 && std::strcmp(argv[1], "--check") == 0) return check_tree(argv[2]);
        if (argc == 2) {
            Builder b{argv[1]};
            build_tree(b);
            std::cout << "fixtures written to " << argv[1] << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "usage: frb_make_fixtures <dir> | frb_make_fixtures --check <dir>\n";
    return 2;
}
