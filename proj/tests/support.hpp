#pragma once

// Shared test support: a deterministic RNG that does not depend on
// implementation-defined distributions, plus fixture builders used across
// the suites.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stag/record.hpp"

namespace testsupport {

// splitmix64; identical sequences on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, n)
    uint64_t below(uint64_t n) { return next() % n; }

    int range(int lo, int hi) {  // inclusive
        return lo + int(below(uint64_t(hi - lo + 1)));
    }

    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double gaussian() {
        // Box-Muller on two uniforms; fine for test fixtures.
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    uint64_t state_;
};

inline stag::DayOfWeek random_day(Rng& rng) {
    return static_cast<stag::DayOfWeek>(rng.below(7));
}

// A minimal plausible record; callers adjust fields as needed.
inline stag::CrashRecord make_record(int month, int hour, stag::DayOfWeek day = stag::DayOfWeek::We,
                                     int fhe = 12) {
    stag::CrashRecord r;
    r.case_id = "t";
    r.year = 2015;
    r.month = month;
    r.day_of_week = day;
    r.hour = hour;
    r.func_sys = 3;
    r.rel_road = 1;
    r.reljct2 = 1;
    r.typ_int = 1;
    r.jun_int = 1;
    r.light_cond = 1;
    r.weather = 1;
    r.fhe = fhe;
    if (fhe == 12) r.mc = 6;
    return r;
}

}  // namespace testsupport
