#pragma once

#include <iosfwd>

namespace conecalc::app {

/// Exit codes: 0 pass, 1 mathematical failure or counterexample, 2 usage or parse error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace conecalc::app
