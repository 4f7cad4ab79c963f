#pragma once

#include <iosfwd>

namespace hazrate::cli {

// Exit codes: 0 ok, 1 invalid input, 2 solver did not converge.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace hazrate::cli
