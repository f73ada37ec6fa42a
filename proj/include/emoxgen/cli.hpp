#pragma once

#include <string>
#include <vector>

namespace emoxgen::cli {

// Entry point behind the `emoxgen` binary. Exit status: 0 on success, 1 on
// validation/usage errors, 2 on runtime failures.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace emoxgen::cli
