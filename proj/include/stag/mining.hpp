#pragma once

// Association rule mining per cluster and day segment. A rule associates a
// month-hour spot with a crash-type consequent:
//
//   support(spot)    S_ij = x_ij / sum x        share of crashes at the spot
//   support(type)    S_k  = sum_ij x_ijk / sum x_ij   base rate of the type
//   confidence       C    = x_ijk / x_ij        P(type | spot)
//   lift             L    = C / S_k             rise over the base rate
//
// All denominators range over the cluster x day-segment subpopulation; for
// manner-of-collision rules that subpopulation is further restricted to
// crashes whose first harmful event is "Motor Vehicle in Transport".

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stag/clustering.hpp"
#include "stag/codes.hpp"
#include "stag/record.hpp"
#include "stag/temporal.hpp"

namespace stag {

enum class RuleKind { Fhe, Mc };

inline const char* to_string(RuleKind k) { return k == RuleKind::Fhe ? "fhe" : "mc"; }

enum class DaySegment { WholeWeek, Weekday, Weekend };

inline const char* to_string(DaySegment s) {
    switch (s) {
        case DaySegment::WholeWeek: return "whole_week";
        case DaySegment::Weekday: return "weekday";
        case DaySegment::Weekend: return "weekend";
    }
    return "whole_week";
}

inline std::optional<DaySegment> day_segment_from_string(const std::string& s) {
    if (s == "whole_week") return DaySegment::WholeWeek;
    if (s == "weekday") return DaySegment::Weekday;
    if (s == "weekend") return DaySegment::Weekend;
    return std::nullopt;
}

// Consequent codes outside the closed taxonomy collapse into this bucket.
inline constexpr int kOtherTypeCode = -1;

struct AttentionRule {
    int cluster_id = 0;
    DaySegment segment = DaySegment::WholeWeek;
    int month = 0;  // 1..12
    int hour = 0;   // 0..23
    RuleKind kind = RuleKind::Fhe;
    int type_code = 0;
    std::string type_label;
    int64_t x_ij = 0;   // crashes at the spot
    int64_t x_ijk = 0;  // crashes at the spot with this type
    double support_time = 0;
    double support_type = 0;
    double confidence = 0;
    double lift = 0;

    bool operator==(const AttentionRule&) const = default;
};

struct ScreeningCriteria {
    double min_support_time = 1.0 / double(kGridSpots);  // uniform-distribution probability
    double min_support_type = 0.05;
    double min_lift = 1.0;  // strict: a rule must exceed this
};

namespace detail {

inline int consequent_type(const CrashRecord& r, RuleKind kind, const CodeTables& tables) {
    if (kind == RuleKind::Fhe) {
        if (r.fhe && tables.fhe.labels.count(*r.fhe)) return *r.fhe;
        return kOtherTypeCode;
    }
    if (r.mc && tables.mc.labels.count(*r.mc) && !tables.mc.is_unknown(*r.mc)) return *r.mc;
    return kOtherTypeCode;
}

inline std::string type_label(int code, RuleKind kind, const CodeTables& tables) {
    if (code == kOtherTypeCode) return "Other/Unknown";
    return kind == RuleKind::Fhe ? tables.fhe.label(code) : tables.mc.label(code);
}

}  // namespace detail

// Mines every rule with a non-zero spot-type count over the given
// subpopulation. Records with unknown hour have no spot and are skipped;
// for MC the subpopulation narrows to motor-vehicle-in-transport crashes.
// Output is unscreened, ordered by (month, hour, type).
inline std::vector<AttentionRule> mine_rules(std::span<const CrashRecord> subpopulation,
                                             RuleKind kind, const CodeTables& tables,
                                             int cluster_id = 0,
                                             DaySegment segment = DaySegment::WholeWeek) {
    TemporalGrid spot_counts;
    std::map<std::pair<int, std::pair<int, int>>, int64_t> spot_type;  // (type,(month,hour)) -> x_ijk
    std::map<int, int64_t> type_totals;
    int64_t total = 0;

    for (const CrashRecord& r : subpopulation) {
        if (!r.hour) continue;
        if (kind == RuleKind::Mc && !(r.fhe && *r.fhe == tables.mvit_fhe)) continue;
        int type = detail::consequent_type(r, kind, tables);
        spot_counts.add(r.month, *r.hour);
        ++spot_type[{type, {r.month, *r.hour}}];
        ++type_totals[type];
        ++total;
    }

    std::vector<AttentionRule> rules;
    if (total == 0) return rules;

    for (int month = 1; month <= kMonths; ++month) {
        for (int hour = 0; hour < kHours; ++hour) {
            int64_t x_ij = spot_counts.at(month, hour);
            if (x_ij == 0) continue;
            for (const auto& [type, type_total] : type_totals) {
                auto it = spot_type.find({type, {month, hour}});
                if (it == spot_type.end() || it->second == 0) continue;
                AttentionRule rule;
                rule.cluster_id = cluster_id;
                rule.segment = segment;
                rule.month = month;
                rule.hour = hour;
                rule.kind = kind;
                rule.type_code = type;
                rule.type_label = detail::type_label(type, kind, tables);
                rule.x_ij = x_ij;
                rule.x_ijk = it->second;
                rule.support_time = double(x_ij) / double(total);
                rule.support_type = double(type_total) / double(total);
                rule.confidence = double(rule.x_ijk) / double(x_ij);
                rule.lift = rule.confidence / rule.support_type;
                rules.push_back(std::move(rule));
            }
        }
    }
    return rules;
}

inline std::vector<AttentionRule> screen_rules(std::span<const AttentionRule> rules,
                                               const ScreeningCriteria& criteria) {
    std::vector<AttentionRule> kept;
    for (const auto& r : rules) {
        if (r.support_time >= criteria.min_support_time &&
            r.support_type >= criteria.min_support_type && r.lift > criteria.min_lift) {
            kept.push_back(r);
        }
    }
    return kept;
}

// Screened rules for one cluster x day segment, with the spot-count grid of
// the segment subpopulation so spot support is answerable even where no
// rule was retained.
struct RuleFamily {
    int cluster_id = 0;
    DaySegment segment = DaySegment::WholeWeek;
    TemporalGrid grid;      // known-hour crashes of the subpopulation
    int64_t mvit_total = 0; // size of the MC (motor-vehicle) subpopulation
    std::vector<AttentionRule> fhe_rules;
    std::vector<AttentionRule> mc_rules;

    bool operator==(const RuleFamily&) const = default;
};

struct ClusterSummary {
    int id = 0;
    DayPolicy policy = DayPolicy::WholeWeek;
    std::vector<SpatialKey> member_keys;

    bool operator==(const ClusterSummary&) const = default;
};

struct Provenance {
    std::string dataset_id;
    std::string config_hash;

    bool operator==(const Provenance&) const = default;
};

inline constexpr int kRuleDbVersion = 1;

struct RuleDatabase {
    Provenance provenance;
    ScreeningCriteria criteria;
    WeekSplit split;
    std::vector<std::string> scenario_order;  // split sequence used upstream
    std::vector<ClusterSummary> clusters;
    std::vector<RuleFamily> families;

    const RuleFamily* family(int cluster_id, DaySegment segment) const {
        for (const auto& f : families) {
            if (f.cluster_id == cluster_id && f.segment == segment) return &f;
        }
        return nullptr;
    }

    // All retained rules at one spot of a family.
    std::vector<AttentionRule> rules_at(int cluster_id, DaySegment segment, int month,
                                        int hour) const {
        std::vector<AttentionRule> out;
        const RuleFamily* f = family(cluster_id, segment);
        if (!f) return out;
        auto collect = [&](const std::vector<AttentionRule>& rules) {
            for (const auto& r : rules) {
                if (r.month == month && r.hour == hour) out.push_back(r);
            }
        };
        collect(f->fhe_rules);
        collect(f->mc_rules);
        return out;
    }
};

// Builds the database for final clusters over the common-scenario records:
// whole-week families for whole-week clusters, weekday + weekend families
// for split clusters, each holding the screened FHE and MC rules.
inline RuleDatabase build_rule_db(std::span<const CrashRecord> common_records,
                                  const std::vector<SpatialCluster>& clusters,
                                  const WeekSplit& split, const ScreeningCriteria& criteria,
                                  const CodeTables& tables, Provenance provenance = {},
                                  std::vector<std::string> scenario_order = {}) {
    RuleDatabase db;
    db.provenance = std::move(provenance);
    db.criteria = criteria;
    db.split = split;
    db.scenario_order = std::move(scenario_order);

    std::map<SpatialKey, int> key_to_cluster;
    for (const auto& c : clusters) {
        db.clusters.push_back({c.id, c.policy, c.member_keys});
        for (const auto& k : c.member_keys) key_to_cluster[k] = c.id;
    }

    std::map<int, std::vector<CrashRecord>> by_cluster;
    for (const auto& r : common_records) {
        auto it = key_to_cluster.find(SpatialKey::of(r));
        if (it != key_to_cluster.end()) by_cluster[it->second].push_back(r);
    }

    for (const auto& c : clusters) {
        auto members_it = by_cluster.find(c.id);
        static const std::vector<CrashRecord> none;
        const std::vector<CrashRecord>& members =
            members_it == by_cluster.end() ? none : members_it->second;

        auto build_family = [&](DaySegment segment) {
            std::vector<CrashRecord> subpop;
            for (const auto& r : members) {
                if (!r.hour) continue;
                if (segment != DaySegment::WholeWeek) {
                    DayClass dc = day_class(r.day_of_week, *r.hour, split);
                    if ((segment == DaySegment::Weekday) != (dc == DayClass::Weekday)) continue;
                }
                subpop.push_back(r);
            }
            RuleFamily fam;
            fam.cluster_id = c.id;
            fam.segment = segment;
            fam.grid = month_hour_histogram(subpop);
            for (const auto& r : subpop) {
                if (r.fhe && *r.fhe == tables.mvit_fhe) ++fam.mvit_total;
            }
            auto fhe = mine_rules(subpop, RuleKind::Fhe, tables, c.id, segment);
            auto mc = mine_rules(subpop, RuleKind::Mc, tables, c.id, segment);
            fam.fhe_rules = screen_rules(fhe, criteria);
            fam.mc_rules = screen_rules(mc, criteria);
            db.families.push_back(std::move(fam));
        };

        if (c.policy == DayPolicy::SplitWeekdayWeekend) {
            build_family(DaySegment::Weekday);
            build_family(DaySegment::Weekend);
        } else {
            build_family(DaySegment::WholeWeek);
        }
    }
    return db;
}

// --- serialization ---------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json rule_to_json(const AttentionRule& r) {
    nlohmann::ordered_json j;
    j["month"] = r.month;
    j["hour"] = r.hour;
    j["type"] = r.type_code;
    j["label"] = r.type_label;
    j["x_ij"] = r.x_ij;
    j["x_ijk"] = r.x_ijk;
    j["support_time"] = r.support_time;
    j["support_type"] = r.support_type;
    j["confidence"] = r.confidence;
    j["lift"] = r.lift;
    return j;
}

inline AttentionRule rule_from_json(const nlohmann::json& j, int cluster_id, DaySegment segment,
                                    RuleKind kind) {
    AttentionRule r;
    r.cluster_id = cluster_id;
    r.segment = segment;
    r.kind = kind;
    r.month = j.at("month").get<int>();
    r.hour = j.at("hour").get<int>();
    r.type_code = j.at("type").get<int>();
    r.type_label = j.at("label").get<std::string>();
    r.x_ij = j.at("x_ij").get<int64_t>();
    r.x_ijk = j.at("x_ijk").get<int64_t>();
    r.support_time = j.at("support_time").get<double>();
    r.support_type = j.at("support_type").get<double>();
    r.confidence = j.at("confidence").get<double>();
    r.lift = j.at("lift").get<double>();
    return r;
}

inline nlohmann::ordered_json grid_to_json(const TemporalGrid& g) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : g.counts) rows.push_back(row);
    return rows;
}

inline TemporalGrid grid_from_json(const nlohmann::json& j) {
    TemporalGrid g;
    if (j.size() != kMonths) throw DataError("rule db: grid must have 12 rows");
    for (int m = 0; m < kMonths; ++m) {
        if (j[m].size() != kHours) throw DataError("rule db: grid row must have 24 columns");
        for (int h = 0; h < kHours; ++h) {
            int64_t v = j[m][h].get<int64_t>();
            g.counts[m][h] = v;
            g.total += v;
        }
    }
    return g;
}

inline nlohmann::ordered_json key_to_json(const SpatialKey& k) {
    auto opt = [](const std::optional<int>& v) -> nlohmann::ordered_json {
        if (v) return *v;
        return nullptr;
    };
    return nlohmann::ordered_json::array({opt(k.func_sys), opt(k.rel_road), opt(k.jun_int)});
}

inline SpatialKey key_from_json(const nlohmann::json& j) {
    auto opt = [](const nlohmann::json& v) -> std::optional<int> {
        if (v.is_null()) return std::nullopt;
        return v.get<int>();
    };
    if (!j.is_array() || j.size() != 3) throw DataError("rule db: spatial key must be a 3-array");
    return {opt(j[0]), opt(j[1]), opt(j[2])};
}

}  // namespace detail

inline nlohmann::ordered_json rule_db_to_json(const RuleDatabase& db) {
    nlohmann::ordered_json j;
    j["schema"] = "rule_db";
    j["version"] = kRuleDbVersion;
    j["provenance"] = {{"dataset_id", db.provenance.dataset_id},
                       {"config_hash", db.provenance.config_hash}};
    j["criteria"] = {{"min_support_time", db.criteria.min_support_time},
                     {"min_support_type", db.criteria.min_support_type},
                     {"min_lift", db.criteria.min_lift}};
    j["split"] = {{"p", db.split.p}, {"q", db.split.q}, {"ss_fr", db.split.ss_fr},
                  {"ss_su", db.split.ss_su}};
    j["scenario_order"] = db.scenario_order;
    auto clusters = nlohmann::ordered_json::array();
    for (const auto& c : db.clusters) {
        nlohmann::ordered_json cj;
        cj["id"] = c.id;
        cj["day_policy"] = to_string(c.policy);
        auto keys = nlohmann::ordered_json::array();
        for (const auto& k : c.member_keys) keys.push_back(detail::key_to_json(k));
        cj["members"] = keys;
        clusters.push_back(cj);
    }
    j["clusters"] = clusters;
    auto families = nlohmann::ordered_json::array();
    for (const auto& f : db.families) {
        nlohmann::ordered_json fj;
        fj["cluster"] = f.cluster_id;
        fj["segment"] = to_string(f.segment);
        fj["total"] = f.grid.total;
        fj["mvit_total"] = f.mvit_total;
        fj["grid"] = detail::grid_to_json(f.grid);
        auto fhe = nlohmann::ordered_json::array();
        for (const auto& r : f.fhe_rules) fhe.push_back(detail::rule_to_json(r));
        fj["fhe_rules"] = fhe;
        auto mc = nlohmann::ordered_json::array();
        for (const auto& r : f.mc_rules) mc.push_back(detail::rule_to_json(r));
        fj["mc_rules"] = mc;
        families.push_back(fj);
    }
    j["families"] = families;
    return j;
}

inline RuleDatabase rule_db_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "rule_db") throw DataError("rule db: missing schema marker");
    if (j.value("version", -1) != kRuleDbVersion) {
        throw DataError("rule db: unsupported version " + std::to_string(j.value("version", -1)));
    }
    RuleDatabase db;
    db.provenance.dataset_id = j.at("provenance").at("dataset_id").get<std::string>();
    db.provenance.config_hash = j.at("provenance").at("config_hash").get<std::string>();
    db.criteria.min_support_time = j.at("criteria").at("min_support_time").get<double>();
    db.criteria.min_support_type = j.at("criteria").at("min_support_type").get<double>();
    db.criteria.min_lift = j.at("criteria").at("min_lift").get<double>();
    db.split.p = j.at("split").at("p").get<int>();
    db.split.q = j.at("split").at("q").get<int>();
    db.split.ss_fr = j.at("split").at("ss_fr").get<double>();
    db.split.ss_su = j.at("split").at("ss_su").get<double>();
    for (const auto& s : j.at("scenario_order")) db.scenario_order.push_back(s.get<std::string>());
    for (const auto& cj : j.at("clusters")) {
        ClusterSummary c;
        c.id = cj.at("id").get<int>();
        c.policy = cj.at("day_policy").get<std::string>() == "split" ? DayPolicy::SplitWeekdayWeekend
                                                                     : DayPolicy::WholeWeek;
        for (const auto& kj : cj.at("members")) c.member_keys.push_back(detail::key_from_json(kj));
        db.clusters.push_back(std::move(c));
    }
    for (const auto& fj : j.at("families")) {
        RuleFamily f;
        f.cluster_id = fj.at("cluster").get<int>();
        auto seg = day_segment_from_string(fj.at("segment").get<std::string>());
        if (!seg) throw DataError("rule db: bad segment name");
        f.segment = *seg;
        f.mvit_total = fj.at("mvit_total").get<int64_t>();
        f.grid = detail::grid_from_json(fj.at("grid"));
        if (f.grid.total != fj.at("total").get<int64_t>()) {
            throw DataError("rule db: family grid total mismatch");
        }
        for (const auto& rj : fj.at("fhe_rules")) {
            f.fhe_rules.push_back(detail::rule_from_json(rj, f.cluster_id, f.segment, RuleKind::Fhe));
        }
        for (const auto& rj : fj.at("mc_rules")) {
            f.mc_rules.push_back(detail::rule_from_json(rj, f.cluster_id, f.segment, RuleKind::Mc));
        }
        db.families.push_back(std::move(f));
    }
    return db;
}

inline void save_rule_db(const RuleDatabase& db, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open rule db for writing: " + path);
    out << rule_db_to_json(db).dump(2) << '\n';
    if (!out) throw IoError("rule db write failed: " + path);
}

inline RuleDatabase load_rule_db(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open rule db: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("rule db: invalid JSON: " + path);
    return rule_db_from_json(j);
}

}  // namespace stag
