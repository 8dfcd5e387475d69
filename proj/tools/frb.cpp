// frb — replay-based benchmarking for firmware fuzzers.
//
//   frb asm       assemble a target image from assembly source
//   frb replay    replay a fuzzing corpus against a target + oracle set
//   frb analyze   aggregate replay outcomes into a benchmark report
//   frb chart     render SVG charts from a report
//   frb validate  check an oracle set labels every crash in a corpus

#include "CLI11.hpp"

#include "frb/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"benchmarking toolkit for firmware fuzzers"};
    app.require_subcommand(1);

    // asm
    std::string asm_src, asm_out;
    frb::AsmOverrides over;
    uint32_t ov_entry = 0, ov_handler = 0, ov_period = 0, ov_ram = 0;
    auto* casm = app.add_subcommand("asm", "assemble a target image");
    casm->add_option("source", asm_src, "assembly source file")->required();
    casm->add_option("-o,--out", asm_out, "output image file")->required();
    auto* oe = casm->add_option("--entry", ov_entry, "override entry address");
    auto* oh = casm->add_option("--handler", ov_handler, "override interrupt handler address");
    auto* op = casm->add_option("--period", ov_period, "override timer period (0 disables)");
    auto* orm = casm->add_option("--ram", ov_ram, "override ram size in bytes");

    // replay
    frb::ReplayArgs rargs;
    std::string rlog, ractive;
    auto* crep = app.add_subcommand("replay", "replay a corpus against a target");
    crep->add_option("--target", rargs.target_path, "target image")->required();
    crep->add_option("--ravens", rargs.ravens_dir, "directory of .raven oracle scripts")
        ->required();
    crep->add_option("--corpus", rargs.corpus_dir, "trial directory (queue/ + crashes/)")
        ->required();
    crep->add_option("--log", rlog, "fuzz log (default <corpus>/fuzz_log.jsonl)");
    crep->add_option("--out", rargs.out_dir, "output directory")->required();
    crep->add_option("--fuzzer", rargs.fuzzer_name, "fuzzer name for the metadata");
    crep->add_option("--trial", rargs.trial_index, "trial index for the metadata");
    crep->add_option("-j,--jobs", rargs.jobs, "worker threads (output order is unaffected)")
        ->check(CLI::PositiveNumber);
    crep->add_flag("--live", rargs.live, "abort execution when an active bug triggers");
    crep->add_option("--active", ractive, "comma-separated bug ids active in live mode");

    // analyze
    frb::AnalyzeArgs aargs;
    auto* cana = app.add_subcommand("analyze", "aggregate outcomes into a report");
    cana->add_option("--outcomes", aargs.outcome_paths,
                     "outcome .jsonl files (repeatable; quoted globs ok)")
        ->required();
    cana->add_option("--horizon", aargs.horizon_s, "campaign horizon in seconds");
    cana->add_option("--out", aargs.out_dir, "report output directory")->required();

    // chart
    std::string chart_report, chart_out;
    auto* ccha = app.add_subcommand("chart", "render SVG charts from a report");
    ccha->add_option("--report", chart_report, "report.json from analyze")->required();
    ccha->add_option("--out", chart_out, "chart output directory")->required();

    // validate
    frb::ValidateArgs vargs;
    auto* cval = app.add_subcommand("validate", "check oracle coverage of a crash corpus");
    cval->add_option("--target", vargs.target_path, "target image")->required();
    cval->add_option("--ravens", vargs.ravens_dir, "directory of .raven oracle scripts")
        ->required();
    cval->add_option("--crashes", vargs.crashes_dir, "directory of crash inputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        // CLI11 returns 0 for --help; anything else is a usage error.
        return rc == 0 ? frb::kExitOk : frb::kExitUsage;
    }

    if (casm->parsed()) {
        if (*oe) over.entry = ov_entry;
        if (*oh) over.handler = ov_handler;
        if (*op) over.period = ov_period;
        if (*orm) over.ram_size = ov_ram;
        return frb::cmd_asm(asm_src, asm_out, over, std::cout, std::cerr);
    }
    if (crep->parsed()) {
        if (!rlog.empty()) rargs.log_path = rlog;
        if (!ractive.empty()) {
            std::set<std::string> ids;
            std::stringstream ss(ractive);
            std::string id;
            while (std::getline(ss, id, ','))
                if (!id.empty()) ids.insert(id);
            rargs.active_bugs = std::move(ids);
        }
        return frb::cmd_replay(rargs, std::cout, std::cerr);
    }
    if (cana->parsed()) return frb::cmd_analyze(aargs, std::cout, std::cerr);
    if (ccha->parsed()) return frb::cmd_chart(chart_report, chart_out, std::cout, std::cerr);
    if (cval->parsed()) return frb::cmd_validate(vargs, std::cout, std::cerr);
    return frb::kExitUsage;
}
