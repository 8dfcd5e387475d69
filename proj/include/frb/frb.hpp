#pragma once

// Umbrella header for the firmware-fuzzing benchmark library: bug-oracle
// scripts and their evaluator, the reference emulator backend, corpus
// replay, survival/consistency analysis, and report/chart emission.

#include "frb/analysis.hpp"
#include "frb/assembler.hpp"
#include "frb/bug_oracle.hpp"
#include "frb/charts.hpp"
#include "frb/cli.hpp"
#include "frb/corpus.hpp"
#include "frb/emulator_api.hpp"
#include "frb/hash.hpp"
#include "frb/minivm.hpp"
#include "frb/raven_eval.hpp"
#include "frb/raven_parser.hpp"
#include "frb/raven_printer.hpp"
#include "frb/replay.hpp"
#include "frb/report.hpp"
#include "frb/survival.hpp"
#include "frb/value.hpp"
