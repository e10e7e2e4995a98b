#pragma once

#include <stdexcept>
#include <string>

namespace lineage {

/// Input data that cannot be processed: malformed files, unreachable
/// endpoints, degenerate statistics inputs. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lineage
