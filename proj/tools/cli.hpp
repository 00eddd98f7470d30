#pragma once

#include <ostream>

namespace simanno::cli {

/// Entry point of the `simanno` command. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace simanno::cli
