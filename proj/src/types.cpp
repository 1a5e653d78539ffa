#include "stockgan/types.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace stockgan {

namespace {

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len) {
    int value = 0;
    const char* first = text.data() + pos;
    const char* last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw std::invalid_argument("bad date field");
    }
    return value;
}

} // namespace

Date parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    const int y = parse_fixed_int(text, 0, 4);
    const int m = parse_fixed_int(text, 5, 2);
    const int d = parse_fixed_int(text, 8, 2);
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
    }
    return date;
}

std::string format_iso_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf, ptr);
}

} // namespace stockgan
