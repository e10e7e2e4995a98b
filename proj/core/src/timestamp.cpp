#include "lineage/timestamp.hpp"

#include <fmt/format.h>

namespace lineage {

namespace {

using namespace std::chrono;

// Reads exactly `width` digits starting at `pos`.
bool read_fixed(std::string_view text, std::size_t& pos, std::size_t width, int& out) {
    if (pos + width > text.size()) {
        return false;
    }
    int value = 0;
    for (std::size_t i = 0; i < width; ++i) {
        const char c = text[pos + i];
        if (c < '0' || c > '9') {
            return false;
        }
        value = value * 10 + (c - '0');
    }
    pos += width;
    out = value;
    return true;
}

bool consume(std::string_view text, std::size_t& pos, char expected) {
    if (pos < text.size() && text[pos] == expected) {
        ++pos;
        return true;
    }
    return false;
}

std::optional<sys_days> read_date(std::string_view text, std::size_t& pos) {
    int y = 0;
    int m = 0;
    int d = 0;
    if (!read_fixed(text, pos, 4, y) || !consume(text, pos, '-') || !read_fixed(text, pos, 2, m) ||
        !consume(text, pos, '-') || !read_fixed(text, pos, 2, d)) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return sys_days{ymd};
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
        text.remove_suffix(1);
    }
    return text;
}

}  // namespace

Timestamp platform_floor() {
    return sys_days{year{2022} / 3 / 2} + hours{23} + minutes{29} + seconds{4};
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    text = trim(text);
    std::size_t pos = 0;
    const auto date = read_date(text, pos);
    if (!date) {
        return std::nullopt;
    }
    Timestamp ts{*date};
    if (pos == text.size()) {
        return ts;
    }
    if (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ') {
        return std::nullopt;
    }
    ++pos;

    int hh = 0;
    int mm = 0;
    int ss = 0;
    if (!read_fixed(text, pos, 2, hh) || !consume(text, pos, ':') || !read_fixed(text, pos, 2, mm)) {
        return std::nullopt;
    }
    if (consume(text, pos, ':')) {
        if (!read_fixed(text, pos, 2, ss)) {
            return std::nullopt;
        }
        if (consume(text, pos, '.') || consume(text, pos, ',')) {
            const std::size_t start = pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                ++pos;
            }
            if (pos == start) {
                return std::nullopt;
            }
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) {
        return std::nullopt;
    }
    ts += hours{hh} + minutes{mm} + seconds{ss};

    if (pos == text.size()) {
        return ts;
    }
    if (text[pos] == 'Z' || text[pos] == 'z') {
        return pos + 1 == text.size() ? std::optional{ts} : std::nullopt;
    }
    if (text[pos] != '+' && text[pos] != '-') {
        return std::nullopt;
    }
    const int sign = text[pos] == '+' ? 1 : -1;
    ++pos;
    int off_h = 0;
    int off_m = 0;
    if (!read_fixed(text, pos, 2, off_h)) {
        return std::nullopt;
    }
    consume(text, pos, ':');
    if (pos < text.size() && !read_fixed(text, pos, 2, off_m)) {
        return std::nullopt;
    }
    if (pos != text.size() || off_h > 23 || off_m > 59) {
        return std::nullopt;
    }
    // Local time = UTC + offset.
    ts -= sign * (hours{off_h} + minutes{off_m});
    return ts;
}

std::optional<Timestamp> parse_date(std::string_view text) {
    text = trim(text);
    std::size_t pos = 0;
    const auto date = read_date(text, pos);
    if (!date || pos != text.size()) {
        return std::nullopt;
    }
    return Timestamp{*date};
}

std::string format_timestamp(Timestamp ts) {
    const auto day_start = floor<days>(ts);
    const year_month_day ymd{day_start};
    const hh_mm_ss tod{ts - day_start};
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       tod.hours().count(), tod.minutes().count(), tod.seconds().count());
}

std::string format_date(Timestamp ts) {
    const year_month_day ymd{floor<days>(ts)};
    return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()));
}

YearMonth YearMonth::next() const {
    return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

std::string YearMonth::str() const {
    return fmt::format("{:04}-{:02}", year, month);
}

YearMonth year_month_of(Timestamp ts) {
    const year_month_day ymd{floor<days>(ts)};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

}  // namespace lineage
