#pragma once

#include <iosfwd>

namespace hmsom {

/// Runs the command line. Returns 0 on success, 1 on usage errors and 2 on
/// data or model errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hmsom
