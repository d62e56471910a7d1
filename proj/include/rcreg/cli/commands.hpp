#pragma once

#include <iosfwd>

namespace rcreg::cli {

/// Exit codes: 0 success, 2 not identified (identify only), 1 any error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rcreg::cli
