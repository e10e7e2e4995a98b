#pragma once

#include <string>
#include <vector>

namespace lineage::app {

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2, kInternalError = 3 };

/// Runs one `lineage` command line. args[0] is the program name.
int run(const std::vector<std::string>& args);

int run(int argc, const char* const* argv);

}  // namespace lineage::app
