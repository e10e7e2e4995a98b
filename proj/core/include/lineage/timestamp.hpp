#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lineage {

/// UTC instant at second precision. All window arithmetic is done on these.
using Timestamp = std::chrono::sys_seconds;

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Earliest creation time observed on the hub (2022-03-02T23:29:04Z).
Timestamp platform_floor();

/// Parses ISO-8601 "YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z|±HH[:MM]]".
/// Fractional seconds are truncated; offsets are folded into UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Parses a bare calendar date "YYYY-MM-DD" as midnight UTC.
std::optional<Timestamp> parse_date(std::string_view text);

/// Canonical form "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp ts);

/// "YYYY-MM-DD" of the UTC day containing ts.
std::string format_date(Timestamp ts);

struct YearMonth {
    int year = 0;
    unsigned month = 0;

    auto operator<=>(const YearMonth&) const = default;

    YearMonth next() const;
    std::string str() const;
};

YearMonth year_month_of(Timestamp ts);

}  // namespace lineage
