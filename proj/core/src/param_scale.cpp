#include "lineage/param_scale.hpp"

#include <cctype>
#include <charconv>

namespace lineage::analytics {

namespace {

bool is_token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '.';
}

// <digits>[.<digits>](b|m), case-insensitive.
std::optional<double> parse_size_token(std::string_view token) {
    if (token.size() < 2) {
        return std::nullopt;
    }
    const char suffix = static_cast<char>(std::tolower(static_cast<unsigned char>(token.back())));
    double unit = 0.0;
    if (suffix == 'b') {
        unit = 1e9;
    } else if (suffix == 'm') {
        unit = 1e6;
    } else {
        return std::nullopt;
    }
    const std::string_view number = token.substr(0, token.size() - 1);

    std::size_t i = 0;
    const auto digits = [&] {
        const std::size_t start = i;
        while (i < number.size() && number[i] >= '0' && number[i] <= '9') {
            ++i;
        }
        return i - start;
    };
    if (digits() == 0) {
        return std::nullopt;
    }
    if (i < number.size() && number[i] == '.') {
        ++i;
        if (digits() == 0) {
            return std::nullopt;
        }
    }
    if (i != number.size()) {
        return std::nullopt;
    }

    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (ec != std::errc{} || ptr != number.data() + number.size() || value <= 0.0) {
        return std::nullopt;
    }
    return value * unit;
}

}  // namespace

const char* to_string(ScaleBucket bucket) {
    switch (bucket) {
        case ScaleBucket::small: return "small";
        case ScaleBucket::medium: return "medium";
        case ScaleBucket::large: return "large";
        case ScaleBucket::unknown: return "unknown";
    }
    return "unknown";
}

ScaleBucket bucket_for(double parameters) {
    if (parameters < 1e9) {
        return ScaleBucket::small;
    }
    if (parameters <= 1e10) {
        return ScaleBucket::medium;
    }
    return ScaleBucket::large;
}

ParamScale extract_param_scale(std::string_view model_id) {
    ParamScale out;
    std::size_t pos = 0;
    while (pos < model_id.size()) {
        if (!is_token_char(model_id[pos])) {
            ++pos;
            continue;
        }
        std::size_t end = pos;
        while (end < model_id.size() && is_token_char(model_id[end])) {
            ++end;
        }
        if (const auto value = parse_size_token(model_id.substr(pos, end - pos))) {
            out.raw = value;
            ++out.matches;
        }
        pos = end;
    }
    if (out.raw) {
        out.bucket = bucket_for(*out.raw);
    }
    return out;
}

}  // namespace lineage::analytics
