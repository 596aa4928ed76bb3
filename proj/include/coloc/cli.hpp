#pragma once

#include <iosfwd>

namespace coloc::cli {

// Exit status: 0 on success, the numeric ErrorCode for library errors,
// 2 for command-line usage errors and 1 for anything unexpected.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Port resolution for `serve`: an explicit flag wins, then the environment
// variable, then the default. Throws Error(kInvalidArgument) for a value
// outside [0, 65535].
unsigned short resolve_port(const char* env_name, int flag_value, unsigned short fallback);

}  // namespace coloc::cli
