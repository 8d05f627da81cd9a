#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace madlab {

// Calendar date in ISO-8601 form (YYYY-MM-DD). Validated on parse,
// including month lengths and leap years. Ordering is chronological.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    std::string to_string() const;

    // Throws std::invalid_argument on malformed or impossible dates.
    static Date parse(std::string_view text);
    static bool try_parse(std::string_view text, Date& out);
};

}  // namespace madlab
