#pragma once

#include <string>
#include <vector>

namespace sweeplio {

// Exit codes: 0 success, 1 runtime failure (prints "error: <class>: ..."),
// 2 usage error.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace sweeplio
