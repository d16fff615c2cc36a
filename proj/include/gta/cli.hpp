#pragma once

namespace gta::cli {

// Entry point for the `gta` tool. Exit codes: 0 success, 1 runtime
// failure, 2 usage error.
int run(int argc, const char* const* argv);

}  // namespace gta::cli
