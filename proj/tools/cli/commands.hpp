#pragma once

namespace unitsel::cli {

// Entry point of the `unitsel` tool. Returns the process exit code; every
// output file is removed again if the command fails.
int run(int argc, const char* const* argv);

}  // namespace unitsel::cli
