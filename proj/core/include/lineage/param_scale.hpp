#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace lineage::analytics {

/// small < 1e9 <= medium <= 1e10 < large
enum class ScaleBucket { small, medium, large, unknown };

inline constexpr std::array<ScaleBucket, 4> kAllBuckets{ScaleBucket::small, ScaleBucket::medium,
                                                        ScaleBucket::large, ScaleBucket::unknown};

const char* to_string(ScaleBucket bucket);

struct ParamScale {
    /// Parameter count; positive when known.
    std::optional<double> raw;
    ScaleBucket bucket = ScaleBucket::unknown;
    /// Number of size tokens found. More than one means the last one was used.
    std::size_t matches = 0;

    bool ambiguous() const { return matches > 1; }
};

ScaleBucket bucket_for(double parameters);

/// Finds size tokens such as "7B", "0.5b" or "350M" in a model id. A token is
/// a whole run of [A-Za-z0-9.] delimited by other characters or the string
/// ends, so "F16", "v1.5b-x" or "8x7B" do not match. The last token wins.
ParamScale extract_param_scale(std::string_view model_id);

}  // namespace lineage::analytics
