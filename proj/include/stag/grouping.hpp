#pragma once

// Spatially defined groups: partition of the common-scenario dataset by
// (road functional system, relation to trafficway, merged junction code).

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stag/record.hpp"
#include "stag/temporal.hpp"

namespace stag {

struct SpatialKey {
    std::optional<int> func_sys;
    std::optional<int> rel_road;
    std::optional<int> jun_int;

    // Keys with any unknown component are sentinels: they hold their records
    // but carry no road/area semantics and stay out of clustering.
    bool defined() const { return func_sys && rel_road && jun_int; }

    auto operator<=>(const SpatialKey&) const = default;

    static SpatialKey of(const CrashRecord& r) { return {r.func_sys, r.rel_road, r.jun_int}; }
};

struct SpatialGroup {
    SpatialKey key;
    std::vector<uint32_t> members;  // indices into the partitioned dataset
    TemporalGrid grid;              // known-hour members only
    std::optional<double> morans_i;
    int64_t size = 0;               // all members, unknown hour included
};

inline std::map<SpatialKey, SpatialGroup> partition_groups(std::span<const CrashRecord> records) {
    std::map<SpatialKey, SpatialGroup> groups;
    for (uint32_t i = 0; i < records.size(); ++i) {
        const CrashRecord& r = records[i];
        SpatialKey key = SpatialKey::of(r);
        SpatialGroup& g = groups[key];
        g.key = key;
        g.members.push_back(i);
        ++g.size;
        if (r.hour) g.grid.add(r.month, *r.hour);
    }
    for (auto& [key, g] : groups) g.morans_i = stag::morans_i(g.grid);
    return groups;
}

// Splits groups at the size threshold (strictly greater goes to `first`).
inline std::pair<std::map<SpatialKey, SpatialGroup>, std::map<SpatialKey, SpatialGroup>>
filter_by_size(const std::map<SpatialKey, SpatialGroup>& groups, int64_t threshold = 100) {
    std::map<SpatialKey, SpatialGroup> large, small;
    for (const auto& [key, g] : groups) {
        if (g.size > threshold) {
            large.emplace(key, g);
        } else {
            small.emplace(key, g);
        }
    }
    return {std::move(large), std::move(small)};
}

}  // namespace stag
