#include "madl/date.hpp"

#include <cstdio>
#include <stdexcept>

namespace madlab {

namespace {

bool is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) return 29;
    return kDays[month - 1];
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

}  // namespace

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

bool Date::try_parse(std::string_view text, Date& out) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    const auto y = text.substr(0, 4);
    const auto m = text.substr(5, 2);
    const auto d = text.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return false;
    Date candidate{to_int(y), to_int(m), to_int(d)};
    if (candidate.month < 1 || candidate.month > 12) return false;
    if (candidate.day < 1 || candidate.day > days_in_month(candidate.year, candidate.month)) return false;
    out = candidate;
    return true;
}

Date Date::parse(std::string_view text) {
    Date d;
    if (!try_parse(text, d)) {
        throw std::invalid_argument("invalid ISO-8601 date: '" + std::string(text) + "'");
    }
    return d;
}

}  // namespace madlab
