#pragma once

#include <iosfwd>

namespace copulaeda::cli {

//! Entry point of the `copulaeda` tool. Formatted results go to `out` (or the
//! --out file), diagnostics to `err`. Returns the process exit status:
//! 0 when the command completed, 2 on configuration errors, 1 otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace copulaeda::cli
