#pragma once

// Two-step clustering of spatially defined groups. Step 1 merges the large
// groups bottom-up under Pearson-r similarity of their month-hour grids
// until a configured stop criterion fires. Step 2 assigns every remaining
// group through a declarative merge plan, with a residual cluster catching
// whatever no directive claims. A per-cluster day-class policy then decides
// whether rules are mined on the whole-week grid or split by day class.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stag/grouping.hpp"
#include "stag/temporal.hpp"

namespace stag {

struct StopCriterion {
    // Stop before a merge whose best similarity falls below this.
    std::optional<double> min_similarity = 0.55;
    // Stop once this many clusters remain.
    std::optional<int> target_count;
};

struct MergeEvent {
    int iteration = 0;
    int a = 0;  // cluster labels being merged (initial groups are 0..n-1,
    int b = 0;  // merged clusters continue the numbering)
    double similarity = 0;
    int merged = 0;  // label of the new cluster
};

struct DendrogramTrace {
    std::vector<MergeEvent> merges;
};

// A cluster under construction: the grids of its member groups, summed.
struct ProtoCluster {
    std::vector<SpatialKey> member_keys;
    TemporalGrid grid;
    int64_t size = 0;

    static ProtoCluster of(const SpatialGroup& g) {
        ProtoCluster c;
        c.member_keys = {g.key};
        c.grid = g.grid;
        c.size = g.size;
        return c;
    }
};

// Greedy agglomeration: each iteration merges the pair of clusters with the
// highest Pearson r between their summed grids. Pairs with undefined
// similarity (a constant grid) are never merged. Ties take the pair with
// the smallest labels, so the trace is deterministic.
inline std::pair<std::vector<ProtoCluster>, DendrogramTrace> agglomerate(
    std::vector<ProtoCluster> clusters, const StopCriterion& stop) {
    DendrogramTrace trace;
    if (clusters.size() < 2) return {std::move(clusters), trace};

    bool any_varying = std::any_of(clusters.begin(), clusters.end(),
                                   [](const ProtoCluster& c) { return !c.grid.is_constant(); });
    if (!any_varying) throw DataError("agglomerate: every group grid is constant");

    std::vector<int> labels(clusters.size());
    for (size_t i = 0; i < clusters.size(); ++i) labels[i] = int(i);
    int next_label = int(clusters.size());
    int iteration = 0;

    while (int(clusters.size()) > 1) {
        if (stop.target_count && int(clusters.size()) <= *stop.target_count) break;

        double best_r = 0;
        int best_i = -1, best_j = -1;
        for (size_t i = 0; i < clusters.size(); ++i) {
            for (size_t j = i + 1; j < clusters.size(); ++j) {
                auto r = pearson_r(clusters[i].grid, clusters[j].grid);
                if (!r) continue;
                if (best_i < 0 || *r > best_r) {
                    best_r = *r;
                    best_i = int(i);
                    best_j = int(j);
                }
            }
        }
        if (best_i < 0) break;  // nothing mergeable
        if (stop.min_similarity && best_r < *stop.min_similarity) break;

        ++iteration;
        trace.merges.push_back({iteration, labels[best_i], labels[best_j], best_r, next_label});

        ProtoCluster merged;
        merged.member_keys = clusters[best_i].member_keys;
        merged.member_keys.insert(merged.member_keys.end(), clusters[best_j].member_keys.begin(),
                                  clusters[best_j].member_keys.end());
        std::sort(merged.member_keys.begin(), merged.member_keys.end());
        merged.grid = clusters[best_i].grid + clusters[best_j].grid;
        merged.size = clusters[best_i].size + clusters[best_j].size;

        clusters.erase(clusters.begin() + best_j);
        labels.erase(labels.begin() + best_j);
        clusters[best_i] = std::move(merged);
        labels[best_i] = next_label++;
    }
    return {std::move(clusters), trace};
}

// One merge-plan directive: a key matches when each listed component set
// contains the key's component (an absent set matches anything).
struct MergeDirective {
    std::optional<std::set<int>> func_sys;
    std::optional<std::set<int>> rel_road;
    std::optional<std::set<int>> jun_int;
    int target = 0;

    bool matches(const SpatialKey& key) const {
        auto component_ok = [](const std::optional<std::set<int>>& allowed,
                               const std::optional<int>& value) {
            if (!allowed) return true;
            return value && allowed->count(*value) > 0;
        };
        return component_ok(func_sys, key.func_sys) && component_ok(rel_road, key.rel_road) &&
               component_ok(jun_int, key.jun_int);
    }
};

struct MergePlan {
    std::vector<MergeDirective> directives;  // applied in order, first match wins
};

enum class DayPolicy { WholeWeek, SplitWeekdayWeekend };

inline const char* to_string(DayPolicy p) {
    return p == DayPolicy::WholeWeek ? "whole_week" : "split";
}

struct DayPolicyDecision {
    DayPolicy policy = DayPolicy::WholeWeek;
    std::optional<double> i_whole;
    std::optional<double> i_weekday;
    std::optional<double> i_weekend;
    std::optional<double> r_day_classes;  // weekday vs weekend grids
    bool patterns_differ = false;         // r below the reference threshold
    std::string note;
};

struct SpatialCluster {
    int id = 0;
    std::vector<SpatialKey> member_keys;
    TemporalGrid grid;
    int64_t size = 0;
    DayPolicy policy = DayPolicy::WholeWeek;
    TemporalGrid weekday_grid;
    TemporalGrid weekend_grid;
    DayPolicyDecision decision;
};

// Step 2: assigns each remaining group to the first directive that matches
// its key; unmatched groups form the residual cluster. Directive targets
// must name existing cluster ids.
inline std::map<int, std::vector<SpatialKey>> apply_merge_plan(
    const std::set<int>& existing_cluster_ids, const std::vector<SpatialKey>& remaining,
    const MergePlan& plan, int residual_id) {
    for (const auto& d : plan.directives) {
        if (!existing_cluster_ids.count(d.target)) {
            throw DataError("merge plan directive targets unknown cluster id " +
                            std::to_string(d.target));
        }
    }
    if (existing_cluster_ids.count(residual_id)) {
        throw DataError("residual cluster id " + std::to_string(residual_id) +
                        " collides with an existing cluster");
    }
    std::map<int, std::vector<SpatialKey>> assignment;
    for (const auto& key : remaining) {
        int target = residual_id;
        for (const auto& d : plan.directives) {
            if (d.matches(key)) {
                target = d.target;
                break;
            }
        }
        assignment[target].push_back(key);
    }
    return assignment;
}

// Split the week only when both day-class grids keep a strong spatial
// pattern on their own; otherwise the whole-week grid is the better basis.
// The day-class correlation is reported for interpretation, with
// `patterns_differ` flagging values below the reference threshold.
inline DayPolicyDecision decide_day_policy(const TemporalGrid& whole, const TemporalGrid& weekday,
                                           const TemporalGrid& weekend, double r_threshold = 0.5,
                                           double i_threshold = 0.7) {
    DayPolicyDecision d;
    d.i_whole = morans_i(whole);
    d.i_weekday = morans_i(weekday);
    d.i_weekend = morans_i(weekend);
    d.r_day_classes = pearson_r(weekday, weekend);
    if (!d.i_weekday || !d.i_weekend) {
        d.policy = DayPolicy::WholeWeek;
        d.note = "day-class statistic undefined; keeping whole-week distribution";
        return d;
    }
    d.patterns_differ = d.r_day_classes && *d.r_day_classes < r_threshold;
    if (*d.i_weekday >= i_threshold && *d.i_weekend >= i_threshold) {
        d.policy = DayPolicy::SplitWeekdayWeekend;
        d.note = "both day-class patterns strong; splitting weekday/weekend";
    } else {
        d.policy = DayPolicy::WholeWeek;
        d.note = "a day-class pattern weakens; keeping whole-week distribution";
    }
    return d;
}

}  // namespace stag
