#pragma once

// Query engine over a rule database: resolves a driving context (scenario
// flags, spatial key, timestamp) to its cluster, day class, spot support
// and the retained rules for that month-hour spot.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "stag/grouping.hpp"
#include "stag/mining.hpp"
#include "stag/scenario.hpp"
#include "stag/temporal.hpp"

namespace stag {

struct DrivingContext {
    SparseFlags flags;
    SpatialKey key;
    int month = 1;  // 1..12
    int hour = 0;   // 0..23
    DayOfWeek day = DayOfWeek::Mo;
};

struct GuidanceResponse {
    std::string scenario_id = "common";
    std::optional<int> cluster_id;
    DayClass day_class = DayClass::Weekday;
    DaySegment segment = DaySegment::WholeWeek;  // family consulted
    double support_time = 0;                     // S_ij of the queried spot
    std::vector<AttentionRule> rules;            // lift desc, confidence desc
    std::vector<std::string> rationale;
};

inline std::optional<int> resolve_cluster(const SpatialKey& key, const RuleDatabase& db) {
    if (!key.defined()) return std::nullopt;
    for (const auto& c : db.clusters) {
        if (std::find(c.member_keys.begin(), c.member_keys.end(), key) != c.member_keys.end()) {
            return c.id;
        }
    }
    return std::nullopt;
}

namespace detail {

inline std::string classify_scenario_by_order(const SparseFlags& flags,
                                              const std::vector<std::string>& order) {
    std::vector<std::string> names(order);
    if (names.empty()) {
        for (SparseVar v : canonical_sparse_order()) names.push_back(var_name(v));
    }
    for (const auto& name : names) {
        for (SparseVar v : canonical_sparse_order()) {
            if (name == var_name(v) && flags.get(v)) return name;
        }
    }
    return "common";
}

inline std::string format_permille(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", value * 1000.0);
    return std::string(buf);
}

inline std::string format_metric(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return std::string(buf);
}

}  // namespace detail

// Total over any valid context. Non-common scenarios and unclustered keys
// come back with an explanatory rationale and no rules.
inline GuidanceResponse query(const DrivingContext& ctx, const RuleDatabase& db) {
    if (ctx.month < 1 || ctx.month > kMonths || ctx.hour < 0 || ctx.hour >= kHours) {
        throw DataError("driving context month/hour out of range");
    }
    GuidanceResponse resp;
    resp.day_class = day_class(ctx.day, ctx.hour, db.split);
    resp.scenario_id = detail::classify_scenario_by_order(ctx.flags, db.scenario_order);
    if (resp.scenario_id != "common") {
        resp.rationale.push_back("scenario '" + resp.scenario_id +
                                 "' is outside the mined common scenario; no rules apply");
        return resp;
    }

    resp.cluster_id = resolve_cluster(ctx.key, db);
    if (!resp.cluster_id) {
        resp.rationale.push_back("location key is not a member of any cluster; no rules apply");
        return resp;
    }

    DayPolicy policy = DayPolicy::WholeWeek;
    for (const auto& c : db.clusters) {
        if (c.id == *resp.cluster_id) policy = c.policy;
    }
    resp.segment = policy == DayPolicy::SplitWeekdayWeekend
                       ? (resp.day_class == DayClass::Weekday ? DaySegment::Weekday
                                                              : DaySegment::Weekend)
                       : DaySegment::WholeWeek;

    const RuleFamily* fam = db.family(*resp.cluster_id, resp.segment);
    if (!fam) {
        resp.rationale.push_back("no rule family for this cluster and day class");
        return resp;
    }
    resp.support_time =
        fam->grid.total == 0 ? 0.0 : double(fam->grid.at(ctx.month, ctx.hour)) / double(fam->grid.total);
    resp.rationale.push_back("chance of a fatal crash at this time spot: " +
                             detail::format_permille(resp.support_time) + " per mille");

    resp.rules = db.rules_at(*resp.cluster_id, resp.segment, ctx.month, ctx.hour);
    std::stable_sort(resp.rules.begin(), resp.rules.end(),
                     [](const AttentionRule& a, const AttentionRule& b) {
                         if (a.lift != b.lift) return a.lift > b.lift;
                         return a.confidence > b.confidence;
                     });
    if (resp.rules.empty()) {
        resp.rationale.push_back("no retained rule at this time spot");
    }
    for (const auto& r : resp.rules) {
        std::string line = std::string(r.kind == RuleKind::Fhe ? "FHE" : "MC") + " '" +
                           r.type_label + "': confidence " + detail::format_metric(r.confidence) +
                           ", lift " + detail::format_metric(r.lift);
        if (r.kind == RuleKind::Mc) {
            line += " (conditional on motor-vehicle-in-transport FHE)";
        }
        resp.rationale.push_back(std::move(line));
    }
    return resp;
}

}  // namespace stag
