#pragma once

// End-to-end pipeline: ingest -> decompose -> split -> group -> cluster ->
// mine. Every stage writes its artifact into the output directory and the
// run closes with a manifest of content hashes, so identical inputs and
// configuration reproduce byte-identical artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stag/clustering.hpp"
#include "stag/config.hpp"
#include "stag/dataset.hpp"
#include "stag/grouping.hpp"
#include "stag/ingest.hpp"
#include "stag/mining.hpp"
#include "stag/scenario.hpp"
#include "stag/sha256.hpp"
#include "stag/temporal.hpp"

namespace stag {

struct PipelineResult {
    std::vector<CrashRecord> records;
    std::vector<CrashRecord> common;
    ScenarioTree tree;
    WeekSplit split;
    std::map<SpatialKey, SpatialGroup> groups;
    std::vector<SpatialCluster> clusters;
    DendrogramTrace trace;
    RuleDatabase rules;
    IngestReport report;
    std::map<std::string, std::string> artifact_hashes;  // file name -> sha256
    std::string manifest_path;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

inline nlohmann::ordered_json tree_to_json(const ScenarioTree& tree) {
    nlohmann::ordered_json j;
    j["schema"] = "scenario_tree";
    j["version"] = 1;
    auto order = nlohmann::ordered_json::array();
    for (SparseVar v : tree.order) order.push_back(var_name(v));
    j["order"] = order;
    j["total"] = tree.total;
    auto leaves = nlohmann::ordered_json::array();
    for (size_t i = 0; i < tree.leaves.size(); ++i) {
        const ScenarioLeaf& leaf = tree.leaves[i];
        nlohmann::ordered_json lj;
        lj["id"] = leaf.id;
        // predicate: earlier variables false, own variable true (common: all false)
        std::string predicate;
        size_t upto = leaf.is_common ? tree.order.size() : i;
        for (size_t k = 0; k < upto; ++k) {
            if (!predicate.empty()) predicate += " & ";
            predicate += std::string("!") + var_name(tree.order[k]);
        }
        if (!leaf.is_common) {
            if (!predicate.empty()) predicate += " & ";
            predicate += var_name(tree.order[i]);
        }
        lj["predicate"] = predicate;
        lj["count"] = leaf.count;
        lj["percent"] = tree.total == 0 ? 0.0 : 100.0 * double(leaf.count) / double(tree.total);
        leaves.push_back(lj);
    }
    j["leaves"] = leaves;
    return j;
}

inline std::string groups_to_csv(const std::map<SpatialKey, SpatialGroup>& groups,
                                 const CodeTables& tables) {
    std::string csv = "func_sys,rel_road,jun_int,label,size,known_hour,morans_i\n";
    auto code = [](const std::optional<int>& v) {
        return v ? std::to_string(*v) : std::string("NA");
    };
    for (const auto& [key, g] : groups) {
        std::string label;
        if (key.defined()) {
            label = tables.func_sys.label(*key.func_sys) + " | " + tables.rel_road.label(*key.rel_road) +
                    " | " + tables.jun_int_label(*key.jun_int);
        } else {
            label = "(unknown location)";
        }
        // label is quoted; no embedded quotes appear in code tables
        csv += code(key.func_sys) + "," + code(key.rel_road) + "," + code(key.jun_int) + ",\"" +
               label + "\"," + std::to_string(g.size) + "," + std::to_string(g.grid.total) + "," +
               (g.morans_i ? detail::format_double(*g.morans_i) : std::string()) + "\n";
    }
    return csv;
}

inline nlohmann::ordered_json split_to_json(const WeekSplit& split) {
    nlohmann::ordered_json j;
    j["schema"] = "week_split";
    j["version"] = 1;
    j["p"] = split.p;
    j["q"] = split.q;
    j["ss_fr"] = split.ss_fr;
    j["ss_su"] = split.ss_su;
    j["weekday"] = "Mo 0:00 through Fr " + std::to_string(split.p) + ":59, resuming Su " +
                   std::to_string(split.q + 1) + ":00";
    j["weekend"] = "Fr " + std::to_string(split.p + 1) + ":00 through Su " + std::to_string(split.q) +
                   ":59";
    return j;
}

namespace detail {
inline nlohmann::ordered_json opt_stat(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}
}  // namespace detail

inline nlohmann::ordered_json clusters_to_json(const std::vector<SpatialCluster>& clusters) {
    nlohmann::ordered_json j;
    j["schema"] = "clusters";
    j["version"] = 1;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : clusters) {
        nlohmann::ordered_json cj;
        cj["id"] = c.id;
        cj["size"] = c.size;
        cj["day_policy"] = to_string(c.policy);
        cj["stats"] = {{"i_whole", detail::opt_stat(c.decision.i_whole)},
                       {"i_weekday", detail::opt_stat(c.decision.i_weekday)},
                       {"i_weekend", detail::opt_stat(c.decision.i_weekend)},
                       {"r_day_classes", detail::opt_stat(c.decision.r_day_classes)},
                       {"patterns_differ", c.decision.patterns_differ},
                       {"note", c.decision.note}};
        auto keys = nlohmann::ordered_json::array();
        for (const auto& k : c.member_keys) {
            keys.push_back(nlohmann::ordered_json::array(
                {k.func_sys ? nlohmann::ordered_json(*k.func_sys) : nlohmann::ordered_json(nullptr),
                 k.rel_road ? nlohmann::ordered_json(*k.rel_road) : nlohmann::ordered_json(nullptr),
                 k.jun_int ? nlohmann::ordered_json(*k.jun_int) : nlohmann::ordered_json(nullptr)}));
        }
        cj["members"] = keys;
        arr.push_back(cj);
    }
    j["clusters"] = arr;
    return j;
}

inline nlohmann::ordered_json trace_to_json(const DendrogramTrace& trace) {
    nlohmann::ordered_json j;
    j["schema"] = "dendrogram";
    j["version"] = 1;
    auto merges = nlohmann::ordered_json::array();
    for (const auto& m : trace.merges) {
        merges.push_back({{"iteration", m.iteration},
                          {"a", m.a},
                          {"b", m.b},
                          {"similarity", m.similarity},
                          {"merged", m.merged}});
    }
    j["merges"] = merges;
    return j;
}

// Builds the final cluster set from the partitioned groups: step-1
// agglomeration over large defined-key groups, step-2 merge plan over
// everything else with a defined key, day-class grids and the day policy
// for each resulting cluster. Multi-group step-1 clusters are numbered
// 1..m in descending crash count; the residual follows them.
inline std::pair<std::vector<SpatialCluster>, DendrogramTrace> build_clusters(
    const std::map<SpatialKey, SpatialGroup>& groups, std::span<const CrashRecord> common,
    const WeekSplit& split, const PipelineConfig& cfg) {
    auto [large, small] = filter_by_size(groups, cfg.size_threshold);

    std::vector<ProtoCluster> singletons;
    for (const auto& [key, g] : large) {
        if (key.defined()) singletons.push_back(ProtoCluster::of(g));
    }

    std::vector<ProtoCluster> step1;
    DendrogramTrace trace;
    if (singletons.size() >= 2) {
        std::tie(step1, trace) = agglomerate(std::move(singletons), cfg.stop);
    } else {
        step1 = std::move(singletons);
    }

    std::vector<ProtoCluster> multi;
    std::vector<SpatialKey> remaining;
    for (auto& c : step1) {
        if (c.member_keys.size() >= 2) {
            multi.push_back(std::move(c));
        } else if (!c.member_keys.empty()) {
            remaining.push_back(c.member_keys.front());
        }
    }
    for (const auto& [key, g] : small) {
        if (key.defined()) remaining.push_back(key);
    }
    std::sort(remaining.begin(), remaining.end());

    std::sort(multi.begin(), multi.end(), [](const ProtoCluster& a, const ProtoCluster& b) {
        if (a.size != b.size) return a.size > b.size;
        return a.member_keys < b.member_keys;
    });

    std::vector<SpatialCluster> clusters;
    std::set<int> ids;
    for (size_t i = 0; i < multi.size(); ++i) {
        SpatialCluster c;
        c.id = int(i) + 1;
        c.member_keys = multi[i].member_keys;
        ids.insert(c.id);
        clusters.push_back(std::move(c));
    }
    int residual_id = cfg.residual_id > 0 ? cfg.residual_id : int(multi.size()) + 1;

    if (!remaining.empty()) {
        auto assignment = apply_merge_plan(ids, remaining, cfg.merge_plan, residual_id);
        for (auto& [target, keys] : assignment) {
            if (target == residual_id) {
                SpatialCluster residual;
                residual.id = residual_id;
                residual.member_keys = keys;
                clusters.push_back(std::move(residual));
            } else {
                for (auto& c : clusters) {
                    if (c.id == target) {
                        c.member_keys.insert(c.member_keys.end(), keys.begin(), keys.end());
                        std::sort(c.member_keys.begin(), c.member_keys.end());
                    }
                }
            }
        }
    }

    // Attach grids, sizes and the day policy.
    std::map<SpatialKey, int> key_to_cluster;
    for (size_t i = 0; i < clusters.size(); ++i) {
        for (const auto& k : clusters[i].member_keys) key_to_cluster[k] = int(i);
    }
    for (const auto& r : common) {
        auto it = key_to_cluster.find(SpatialKey::of(r));
        if (it == key_to_cluster.end()) continue;
        SpatialCluster& c = clusters[it->second];
        ++c.size;
        if (!r.hour) continue;
        c.grid.add(r.month, *r.hour);
        if (day_class(r.day_of_week, *r.hour, split) == DayClass::Weekday) {
            c.weekday_grid.add(r.month, *r.hour);
        } else {
            c.weekend_grid.add(r.month, *r.hour);
        }
    }
    for (auto& c : clusters) {
        c.decision = decide_day_policy(c.grid, c.weekday_grid, c.weekend_grid,
                                       cfg.day_policy_r_threshold, cfg.day_policy_i_threshold);
        c.policy = c.decision.policy;
    }
    return {std::move(clusters), std::move(trace)};
}

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    PipelineResult result;
    const CodeTables tables = cfg.load_tables();
    fs::create_directories(cfg.output_dir);
    const fs::path out_dir(cfg.output_dir);

    auto stage = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const DataError& e) {
            throw DataError(std::string("stage '") + name + "': " + e.what());
        } catch (const IoError& e) {
            throw IoError(std::string("stage '") + name + "': " + e.what());
        }
    };

    // ingest
    stage("ingest", [&] {
        for (const auto& path : cfg.accident_csv) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw IoError("cannot open input CSV: " + path);
            IngestResult part = parse_crash_csv(in, tables, cfg.columns);
            result.records.insert(result.records.end(), part.records.begin(), part.records.end());
            result.report.rows_read += part.report.rows_read;
            result.report.records_retained += part.report.records_retained;
            result.report.rows_dropped += part.report.rows_dropped;
            for (const auto& [reason, n] : part.report.drop_reasons) {
                result.report.drop_reasons[reason] += n;
            }
        }
        write_dataset(result.records, (out_dir / "dataset.jsonl").string());
        nlohmann::ordered_json rj;
        rj["schema"] = "ingest_report";
        rj["version"] = 1;
        rj["rows_read"] = result.report.rows_read;
        rj["records_retained"] = result.report.records_retained;
        rj["rows_dropped"] = result.report.rows_dropped;
        rj["drop_reasons"] = result.report.drop_reasons;
        detail::write_text(out_dir / "ingest_report.json", rj.dump(2) + "\n");
    });

    // decompose
    stage("decompose", [&] {
        auto order = rank_sparse_variables(result.records);
        result.tree = decompose(result.records, order);
        result.common = common_scenario_subset(result.records, result.tree);
        detail::write_text(out_dir / "scenario_tree.json",
                           tree_to_json(result.tree).dump(2) + "\n");
    });

    // split
    stage("split", [&] {
        result.split = optimize_week_split(week_hour_histogram(result.common));
        detail::write_text(out_dir / "week_split.json",
                           split_to_json(result.split).dump(2) + "\n");
    });

    // group
    stage("group", [&] {
        result.groups = partition_groups(result.common);
        detail::write_text(out_dir / "groups.csv", groups_to_csv(result.groups, tables));
    });

    // cluster
    stage("cluster", [&] {
        std::tie(result.clusters, result.trace) =
            build_clusters(result.groups, result.common, result.split, cfg);
        detail::write_text(out_dir / "clusters.json",
                           clusters_to_json(result.clusters).dump(2) + "\n");
        detail::write_text(out_dir / "dendrogram.json",
                           trace_to_json(result.trace).dump(2) + "\n");
        std::string membership = "cluster_id,func_sys,rel_road,jun_int,group_size\n";
        for (const auto& c : result.clusters) {
            for (const auto& k : c.member_keys) {
                auto it = result.groups.find(k);
                int64_t gsize = it == result.groups.end() ? 0 : it->second.size;
                auto code = [](const std::optional<int>& v) {
                    return v ? std::to_string(*v) : std::string("NA");
                };
                membership += std::to_string(c.id) + "," + code(k.func_sys) + "," +
                              code(k.rel_road) + "," + code(k.jun_int) + "," +
                              std::to_string(gsize) + "\n";
            }
        }
        detail::write_text(out_dir / "membership.csv", membership);
    });

    // mine
    stage("mine", [&] {
        Provenance prov;
        prov.dataset_id = "sha256:" + sha256_file_hex((out_dir / "dataset.jsonl").string());
        prov.config_hash = "sha256:" + sha256_hex(cfg.raw_text);
        std::vector<std::string> order_names;
        for (SparseVar v : result.tree.order) order_names.push_back(var_name(v));
        result.rules = build_rule_db(result.common, result.clusters, result.split, cfg.criteria,
                                     tables, prov, order_names);
        save_rule_db(result.rules, (out_dir / "rules.json").string());
    });

    // manifest
    stage("manifest", [&] {
        nlohmann::ordered_json j;
        j["schema"] = "manifest";
        j["version"] = 1;
        j["config_hash"] = "sha256:" + sha256_hex(cfg.raw_text);
        nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
        for (const auto& path : cfg.accident_csv) {
            inputs[path] = "sha256:" + sha256_file_hex(path);
        }
        j["inputs"] = inputs;
        nlohmann::ordered_json artifacts = nlohmann::ordered_json::object();
        for (const char* name : {"dataset.jsonl", "ingest_report.json", "scenario_tree.json",
                                 "week_split.json", "groups.csv", "clusters.json",
                                 "dendrogram.json", "membership.csv", "rules.json"}) {
            std::string hash = "sha256:" + sha256_file_hex((out_dir / name).string());
            artifacts[name] = hash;
            result.artifact_hashes[name] = hash;
        }
        j["artifacts"] = artifacts;
        result.manifest_path = (out_dir / "manifest.json").string();
        detail::write_text(result.manifest_path, j.dump(2) + "\n");
    });

    return result;
}

}  // namespace stag
