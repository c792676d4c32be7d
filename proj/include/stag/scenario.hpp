#pragma once

// Scenario decomposition over the five sparse binary variables. The tree
// splits on the variables in ascending order of non-zero count: each split
// sends true to a terminal scenario leaf and false onward to the next
// variable, so the final all-false leaf collects the common scenario.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stag/common.hpp"
#include "stag/record.hpp"

namespace stag {

enum class SparseVar { SchBus = 0, WorkZone, WithinInterchange, CrashFactor, BadWeather };

inline const char* var_name(SparseVar v) {
    static const char* names[5] = {"sch_bus", "work_zone", "within_interchange",
                                   "crash_factor", "bad_weather"};
    return names[static_cast<int>(v)];
}

// Tie-break order for the ranking; also its result on an all-false dataset.
inline std::array<SparseVar, 5> canonical_sparse_order() {
    return {SparseVar::SchBus, SparseVar::WorkZone, SparseVar::WithinInterchange,
            SparseVar::CrashFactor, SparseVar::BadWeather};
}

struct SparseFlags {
    bool sch_bus = false;
    bool work_zone = false;
    bool within_interchange = false;
    bool crash_factor = false;
    bool bad_weather = false;

    static SparseFlags of(const CrashRecord& r) {
        return {r.sch_bus, r.work_zone, r.within_interchange, r.crash_factor, r.bad_weather};
    }

    bool get(SparseVar v) const {
        switch (v) {
            case SparseVar::SchBus: return sch_bus;
            case SparseVar::WorkZone: return work_zone;
            case SparseVar::WithinInterchange: return within_interchange;
            case SparseVar::CrashFactor: return crash_factor;
            case SparseVar::BadWeather: return bad_weather;
        }
        return false;
    }

    bool operator==(const SparseFlags&) const = default;
};

inline std::vector<SparseVar> rank_sparse_variables(std::span<const CrashRecord> records) {
    auto order = canonical_sparse_order();
    std::array<int64_t, 5> counts{};
    for (const auto& r : records) {
        SparseFlags f = SparseFlags::of(r);
        for (int i = 0; i < 5; ++i) {
            if (f.get(static_cast<SparseVar>(i))) ++counts[i];
        }
    }
    std::vector<SparseVar> vars(order.begin(), order.end());
    std::stable_sort(vars.begin(), vars.end(), [&](SparseVar a, SparseVar b) {
        return counts[static_cast<int>(a)] < counts[static_cast<int>(b)];
    });
    return vars;
}

struct ScenarioLeaf {
    std::string id;     // stable name derived from the path predicate
    int depth = 0;      // variables consumed along the path
    int64_t count = 0;  // member records
    // Path predicate: order[0..depth-2] false, then order[depth-1] true
    // for scenario leaves; all five false for the common leaf.
    bool is_common = false;
};

struct ScenarioTree {
    std::vector<SparseVar> order;  // split sequence
    std::vector<ScenarioLeaf> leaves;  // split order, common leaf last
    int64_t total = 0;

    // Walks the split sequence: the first true flag terminates at its
    // scenario leaf; a record with no true flag lands in the common leaf.
    const ScenarioLeaf& classify(const SparseFlags& f) const {
        for (size_t i = 0; i < order.size(); ++i) {
            if (f.get(order[i])) return leaves[i];
        }
        return leaves.back();
    }

    std::string classify_id(const SparseFlags& f) const { return classify(f).id; }
};

inline ScenarioTree decompose(std::span<const CrashRecord> records,
                              const std::vector<SparseVar>& order) {
    if (order.size() != 5) throw DataError("scenario order must contain the five sparse variables");
    for (size_t i = 0; i < order.size(); ++i) {
        for (size_t j = i + 1; j < order.size(); ++j) {
            if (order[i] == order[j]) throw DataError("scenario order repeats a variable");
        }
    }
    ScenarioTree tree;
    tree.order = order;
    tree.total = int64_t(records.size());
    for (size_t i = 0; i < order.size(); ++i) {
        ScenarioLeaf leaf;
        leaf.id = var_name(order[i]);
        leaf.depth = int(i) + 1;
        tree.leaves.push_back(leaf);
    }
    ScenarioLeaf common;
    common.id = "common";
    common.depth = int(order.size());
    common.is_common = true;
    tree.leaves.push_back(common);

    for (const auto& r : records) {
        SparseFlags f = SparseFlags::of(r);
        size_t leaf_index = order.size();  // common
        for (size_t i = 0; i < order.size(); ++i) {
            if (f.get(order[i])) {
                leaf_index = i;
                break;
            }
        }
        ++tree.leaves[leaf_index].count;
    }
    return tree;
}

inline std::string classify_scenario(const SparseFlags& f, const ScenarioTree& tree) {
    return tree.classify_id(f);
}

// One scenario's records in input order. Non-common scenarios are not
// mined further downstream, but their subsets stay retrievable here.
inline std::vector<CrashRecord> scenario_subset(std::span<const CrashRecord> records,
                                                const ScenarioTree& tree,
                                                const std::string& scenario_id) {
    std::vector<CrashRecord> out;
    for (const auto& r : records) {
        if (tree.classify(SparseFlags::of(r)).id == scenario_id) out.push_back(r);
    }
    return out;
}

inline std::vector<CrashRecord> common_scenario_subset(std::span<const CrashRecord> records,
                                                       const ScenarioTree& tree) {
    return scenario_subset(records, tree, "common");
}

}  // namespace stag
