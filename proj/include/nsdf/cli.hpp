#pragma once

#include <string>
#include <vector>

namespace nsdf {

// Batch command-line entry point (subcommands: phantom, train, reconstruct,
// evaluate, export-mesh). Returns the process exit code: 0 success,
// 2 config error, 3 data error, 4 numerical failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace nsdf
