#pragma once

#include <iosfwd>

namespace rankwise {

/// Exit codes: 0 success, 1 validation / not found / conflict, 2 I/O or locked
/// store.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rankwise
