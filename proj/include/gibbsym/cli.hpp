#pragma once

namespace gibbsym {

// Batch command line: sample, decompose, bonds, verify-domination, deform,
// verify, experiment, report. Returns 0 when every executed check passes, 1
// on a failed check and 2 on a usage or configuration error.
int run_cli(int argc, char** argv);

}  // namespace gibbsym
