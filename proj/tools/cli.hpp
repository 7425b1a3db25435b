#pragma once

namespace nvcav {

// Entry point of the nvcav command-line tool; returns the process exit code
// (0 success, 1 validation, 2 degenerate/no-solution, 3 non-convergence).
int run_cli(int argc, const char* const* argv);

}  // namespace nvcav
