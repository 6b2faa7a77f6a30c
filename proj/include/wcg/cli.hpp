#pragma once

namespace wcg::cli {

// Batch front-end. Subcommands: enumerate | synth | estimate | spectrum |
// verify. Returns the process exit code: 0 success, 1 verification or
// computational failure, 2 usage error, 3 I/O or format error.
int run(int argc, const char* const* argv);

}  // namespace wcg::cli
