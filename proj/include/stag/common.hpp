#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace stag {

// Bad input data, malformed files, invalid configuration.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failures (missing file, short read, write failure).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum class DayOfWeek { Mo = 0, Tu, We, Th, Fr, Sa, Su };

inline const char* to_string(DayOfWeek d) {
    static const char* names[7] = {"Mo", "Tu", "We", "Th", "Fr", "Sa", "Su"};
    return names[static_cast<int>(d)];
}

inline std::optional<DayOfWeek> day_of_week_from_string(const std::string& s) {
    for (int i = 0; i < 7; ++i) {
        if (s == to_string(static_cast<DayOfWeek>(i))) return static_cast<DayOfWeek>(i);
    }
    return std::nullopt;
}

struct CivilDateTime {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31
    int hour = 0;   // 0..23
    int minute = 0;
    int second = 0;
};

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM" and "YYYY-MM-DDTHH:MM:SS"
// (a space may stand in for the 'T').
inline CivilDateTime parse_iso_datetime(const std::string& s) {
    CivilDateTime dt;
    auto digits = [&](size_t pos, size_t n) -> int {
        if (pos + n > s.size()) throw DataError("timestamp too short: '" + s + "'");
        int v = 0;
        for (size_t i = pos; i < pos + n; ++i) {
            if (s[i] < '0' || s[i] > '9') throw DataError("bad digit in timestamp: '" + s + "'");
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    auto expect = [&](size_t pos, char c) {
        if (pos >= s.size() || s[pos] != c) throw DataError("malformed timestamp: '" + s + "'");
    };
    dt.year = digits(0, 4);
    expect(4, '-');
    dt.month = digits(5, 2);
    expect(7, '-');
    dt.day = digits(8, 2);
    if (s.size() > 10) {
        if (s[10] != 'T' && s[10] != ' ') throw DataError("malformed timestamp: '" + s + "'");
        dt.hour = digits(11, 2);
        expect(13, ':');
        dt.minute = digits(14, 2);
        if (s.size() > 16) {
            expect(16, ':');
            dt.second = digits(17, 2);
        }
    }
    if (dt.month < 1 || dt.month > 12 || dt.day < 1 || dt.day > 31 || dt.hour > 23 ||
        dt.minute > 59 || dt.second > 60) {
        throw DataError("timestamp field out of range: '" + s + "'");
    }
    return dt;
}

inline DayOfWeek civil_day_of_week(int year, int month, int day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                       std::chrono::day{unsigned(day)}};
    weekday wd{sys_days{ymd}};
    // iso_encoding: Monday = 1 ... Sunday = 7
    return static_cast<DayOfWeek>(wd.iso_encoding() - 1);
}

}  // namespace stag
