#pragma once

namespace shl0 {

/// Entry point shared by the shl0 binary and the in-process CLI tests.
/// Returns the process exit code: 0 only when a complete report was made.
int run_cli(int argc, const char* const* argv);

}  // namespace shl0
