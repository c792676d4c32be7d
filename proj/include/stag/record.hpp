#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "stag/common.hpp"

namespace stag {

// One normalized fatal-crash record. Optional code fields are nullopt when
// the source coded them unknown. `mc` is nullopt when the first harmful
// event is not "Motor Vehicle in Transport" (manner of collision is only
// defined for those crashes).
struct CrashRecord {
    std::string case_id;
    int year = 0;
    int month = 0;  // 1..12
    DayOfWeek day_of_week = DayOfWeek::Mo;
    std::optional<int> hour;  // 0..23

    std::optional<int> func_sys;
    std::optional<int> rel_road;
    std::optional<int> reljct2;
    std::optional<int> typ_int;
    std::optional<int> jun_int;  // derived, see derive_jun_int
    std::optional<int> light_cond;
    std::optional<int> weather;

    bool sch_bus = false;
    bool work_zone = false;
    bool within_interchange = false;
    bool crash_factor = false;
    bool bad_weather = false;

    std::optional<int> fhe;
    std::optional<int> mc;

    bool operator==(const CrashRecord&) const = default;
};

}  // namespace stag
