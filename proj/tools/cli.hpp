#pragma once

#include <iosfwd>

namespace cumdamage::cli {

/// Exit codes: 0 ok, 1 internal error, 2 input or validation error,
/// 3 unsupported engine, 4 runtime model error (nonterminating scenario,
/// numerical failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cumdamage::cli
