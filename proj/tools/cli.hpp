#pragma once

namespace giantpair::cli {

// Environment variable prefixed to relative output directories.
inline constexpr const char* output_root_env = "GIANTPAIR_OUTPUT_ROOT";

// 0 success, 1 I/O or unexpected failure, 2 usage or configuration error,
// 3 numerical failure. Errors are reported as one JSON object on stderr.
int run_cli(int argc, char** argv);

}  // namespace giantpair::cli
