#pragma once

#include <iosfwd>

namespace unl {

/// Entry point of the `unl` command-line tool. Results go to files or to
/// `out`; diagnostics and errors go to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unl
