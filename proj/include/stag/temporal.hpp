#pragma once

// Temporal statistics kernel: month-hour count grids, the weekday/weekend
// split optimizer, Moran's I under queen contiguity, and Pearson's r.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stag/common.hpp"
#include "stag/record.hpp"

namespace stag {

inline constexpr int kMonths = 12;
inline constexpr int kHours = 24;
inline constexpr int kGridSpots = kMonths * kHours;

// 12x24 month-hour count matrix. Rows are months 1..12, columns hours 0..23.
struct TemporalGrid {
    std::array<std::array<int64_t, kHours>, kMonths> counts{};
    int64_t total = 0;

    void add(int month, int hour, int64_t n = 1) {
        if (month < 1 || month > kMonths || hour < 0 || hour >= kHours) {
            throw DataError("temporal grid index out of range");
        }
        counts[month - 1][hour] += n;
        total += n;
    }

    int64_t at(int month, int hour) const { return counts[month - 1][hour]; }

    // Month-major linearization (spot = (month-1)*24 + hour).
    std::vector<double> flattened() const {
        std::vector<double> y;
        y.reserve(kGridSpots);
        for (const auto& row : counts) {
            for (int64_t v : row) y.push_back(double(v));
        }
        return y;
    }

    bool is_constant() const {
        int64_t first = counts[0][0];
        for (const auto& row : counts) {
            for (int64_t v : row) {
                if (v != first) return false;
            }
        }
        return true;
    }

    TemporalGrid& operator+=(const TemporalGrid& o) {
        for (int m = 0; m < kMonths; ++m) {
            for (int h = 0; h < kHours; ++h) counts[m][h] += o.counts[m][h];
        }
        total += o.total;
        return *this;
    }

    friend TemporalGrid operator+(TemporalGrid a, const TemporalGrid& b) { return a += b; }
    bool operator==(const TemporalGrid&) const = default;
};

// Records with unknown hour have no grid spot and are skipped.
inline TemporalGrid month_hour_histogram(std::span<const CrashRecord> records) {
    TemporalGrid g;
    for (const auto& r : records) {
        if (r.hour) g.add(r.month, *r.hour);
    }
    return g;
}

// n_i^j: crashes in hour i of day j.
struct WeekHourSeries {
    std::array<std::array<int64_t, kHours>, 7> counts{};

    int64_t at(DayOfWeek d, int hour) const { return counts[static_cast<int>(d)][hour]; }
    void add(DayOfWeek d, int hour, int64_t n = 1) { counts[static_cast<int>(d)][hour] += n; }
};

inline WeekHourSeries week_hour_histogram(std::span<const CrashRecord> records) {
    WeekHourSeries s;
    for (const auto& r : records) {
        if (r.hour) s.add(r.day_of_week, *r.hour);
    }
    return s;
}

// p: last Friday hour belonging to the weekday segment; q: last Sunday hour
// belonging to the weekend segment.
struct WeekSplit {
    int p = 0;
    int q = 0;
    double ss_fr = 0;
    double ss_su = 0;

    bool operator==(const WeekSplit&) const = default;
};

// Splits Friday and Sunday between the weekday and weekend patterns. The
// weekday reference x^D is the Monday-Thursday hourly mean, the weekend
// reference x^E is Saturday. For each candidate split index the objective
// is the squared error of assigning the head of the series to one pattern
// and the tail to the other; ties resolve to the smallest index.
inline WeekSplit optimize_week_split(const WeekHourSeries& s) {
    std::array<double, kHours> xd{}, xe{};
    for (int i = 0; i < kHours; ++i) {
        xd[i] = (double(s.at(DayOfWeek::Mo, i)) + double(s.at(DayOfWeek::Tu, i)) +
                 double(s.at(DayOfWeek::We, i)) + double(s.at(DayOfWeek::Th, i))) /
                4.0;
        xe[i] = double(s.at(DayOfWeek::Sa, i));
    }
    auto sq = [](double v) { return v * v; };

    WeekSplit best;
    // Friday: hours 0..p weekday, p+1..23 weekend.
    double best_fr = 0;
    for (int p = 0; p < kHours; ++p) {
        double ss = 0;
        for (int i = 0; i <= p; ++i) ss += sq(double(s.at(DayOfWeek::Fr, i)) - xd[i]);
        for (int i = p + 1; i < kHours; ++i) ss += sq(double(s.at(DayOfWeek::Fr, i)) - xe[i]);
        if (p == 0 || ss < best_fr) {
            best_fr = ss;
            best.p = p;
        }
    }
    best.ss_fr = best_fr;

    // Sunday: hours 0..q weekend, q+1..23 weekday.
    double best_su = 0;
    for (int q = 0; q < kHours; ++q) {
        double ss = 0;
        for (int i = 0; i <= q; ++i) ss += sq(double(s.at(DayOfWeek::Su, i)) - xe[i]);
        for (int i = q + 1; i < kHours; ++i) ss += sq(double(s.at(DayOfWeek::Su, i)) - xd[i]);
        if (q == 0 || ss < best_su) {
            best_su = ss;
            best.q = q;
        }
    }
    best.ss_su = best_su;
    return best;
}

enum class DayClass { Weekday, Weekend };

inline const char* to_string(DayClass c) {
    return c == DayClass::Weekday ? "weekday" : "weekend";
}

inline DayClass day_class(DayOfWeek day, int hour, const WeekSplit& split) {
    switch (day) {
        case DayOfWeek::Mo:
        case DayOfWeek::Tu:
        case DayOfWeek::We:
        case DayOfWeek::Th: return DayClass::Weekday;
        case DayOfWeek::Sa: return DayClass::Weekend;
        case DayOfWeek::Fr: return hour <= split.p ? DayClass::Weekday : DayClass::Weekend;
        case DayOfWeek::Su: return hour <= split.q ? DayClass::Weekend : DayClass::Weekday;
    }
    return DayClass::Weekday;
}

// Queen contiguity over an R x C grid: cells whose row and column indices
// differ by at most one are neighbors; no wraparound, so corners have 3
// neighbors, edges 5, interior cells 8.
class NeighborWeights {
public:
    static NeighborWeights queen(int rows, int cols) {
        if (rows < 1 || cols < 1) throw DataError("grid must have positive dimensions");
        return NeighborWeights(rows, cols);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int size() const { return rows_ * cols_; }

    // W = total number of ordered neighbor pairs.
    int64_t total_weight() const {
        int64_t horizontal = int64_t(rows_) * (cols_ - 1);
        int64_t vertical = int64_t(rows_ - 1) * cols_;
        int64_t diagonal = 2 * int64_t(rows_ - 1) * (cols_ - 1);
        return 2 * (horizontal + vertical + diagonal);
    }

    bool adjacent(int a, int b) const {
        if (a == b) return false;
        int ar = a / cols_, ac = a % cols_;
        int br = b / cols_, bc = b % cols_;
        return std::abs(ar - br) <= 1 && std::abs(ac - bc) <= 1;
    }

    template <typename F>
    void for_each_neighbor(int spot, F&& f) const {
        int r = spot / cols_, c = spot % cols_;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                int nr = r + dr, nc = c + dc;
                if (nr < 0 || nr >= rows_ || nc < 0 || nc >= cols_) continue;
                f(nr * cols_ + nc);
            }
        }
    }

private:
    NeighborWeights(int rows, int cols) : rows_(rows), cols_(cols) {}
    int rows_;
    int cols_;
};

// Moran's I: (N / W) * sum_ij w_ij (y_i - ybar)(y_j - ybar) / sum_i (y_i - ybar)^2.
// A constant surface has zero variance and no defined value.
inline std::optional<double> morans_i(std::span<const double> y, const NeighborWeights& w) {
    const int n = w.size();
    if (int(y.size()) != n) throw DataError("value count does not match grid size");
    double mean = 0;
    for (double v : y) mean += v;
    mean /= double(n);

    double denom = 0;
    for (double v : y) denom += (v - mean) * (v - mean);
    if (denom == 0) return std::nullopt;

    double numer = 0;
    for (int i = 0; i < n; ++i) {
        double di = y[i] - mean;
        w.for_each_neighbor(i, [&](int j) { numer += di * (y[j] - mean); });
    }
    return (double(n) / double(w.total_weight())) * numer / denom;
}

inline std::optional<double> morans_i(const TemporalGrid& grid) {
    auto y = grid.flattened();
    return morans_i(y, NeighborWeights::queen(kMonths, kHours));
}

// Product-moment correlation; undefined when either input is constant.
inline std::optional<double> pearson_r(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw DataError("correlation inputs must have equal size");
    const double n = double(a.size());
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0, sbb = 0, sab = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0 || sbb == 0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

inline std::optional<double> pearson_r(const TemporalGrid& a, const TemporalGrid& b) {
    auto ya = a.flattened();
    auto yb = b.flattened();
    return pearson_r(ya, yb);
}

}  // namespace stag
