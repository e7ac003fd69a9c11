#pragma once

#include <string>
#include <vector>

namespace sdde::cli {

// Entry point behind the sdde-stab executable; also callable from tests.
// Exit codes: 0 success, 2 bad input (CLI, config, preconditions),
// 3 numerical failure (certificates, fits, constructions).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args); // without the program name

} // namespace sdde::cli
