#pragma once

#include <iosfwd>

namespace windcommit {

// Exit codes: 0 success, 1 usage error, 2 data or configuration error,
// 3 solver failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace windcommit
