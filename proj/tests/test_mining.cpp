#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "stag/mining.hpp"
#include "support.hpp"

using namespace stag;

namespace {

// Independent nested-loop oracle: tallies counts per (month, hour, type)
// directly off the records and evaluates the metric formulas in place.
struct OracleRule {
    int month, hour, type;
    int64_t x_ij, x_ijk;
    double s_time, s_type, confidence, lift;
};

std::vector<OracleRule> oracle_mine(const std::vector<CrashRecord>& records, RuleKind kind,
                                    const CodeTables& tables) {
    std::vector<const CrashRecord*> pop;
    for (const auto& r : records) {
        if (!r.hour) continue;
        if (kind == RuleKind::Mc && !(r.fhe && *r.fhe == tables.mvit_fhe)) continue;
        pop.push_back(&r);
    }
    auto type_of = [&](const CrashRecord& r) {
        if (kind == RuleKind::Fhe) {
            return (r.fhe && tables.fhe.labels.count(*r.fhe)) ? *r.fhe : kOtherTypeCode;
        }
        return (r.mc && tables.mc.labels.count(*r.mc) && !tables.mc.is_unknown(*r.mc))
                   ? *r.mc
                   : kOtherTypeCode;
    };
    std::vector<OracleRule> rules;
    const double total = double(pop.size());
    if (pop.empty()) return rules;
    std::set<int> types;
    for (const auto* r : pop) types.insert(type_of(*r));
    for (int month = 1; month <= 12; ++month) {
        for (int hour = 0; hour < 24; ++hour) {
            int64_t x_ij = 0;
            for (const auto* r : pop) {
                if (r->month == month && *r->hour == hour) ++x_ij;
            }
            if (x_ij == 0) continue;
            for (int type : types) {
                int64_t x_ijk = 0, type_total = 0;
                for (const auto* r : pop) {
                    if (type_of(*r) == type) {
                        ++type_total;
                        if (r->month == month && *r->hour == hour) ++x_ijk;
                    }
                }
                if (x_ijk == 0) continue;
                OracleRule rule;
                rule.month = month;
                rule.hour = hour;
                rule.type = type;
                rule.x_ij = x_ij;
                rule.x_ijk = x_ijk;
                rule.s_time = double(x_ij) / total;
                rule.s_type = double(type_total) / total;
                rule.confidence = double(x_ijk) / double(x_ij);
                rule.lift = rule.confidence / rule.s_type;
                rules.push_back(rule);
            }
        }
    }
    return rules;
}

std::vector<CrashRecord> synthetic_cluster(uint64_t seed, int n) {
    testsupport::Rng rng(seed);
    std::vector<CrashRecord> records;
    const int fhe_codes[5] = {1, 8, 12, 42, 99};  // 99 maps to the Other bucket
    const int mc_codes[5] = {1, 2, 6, 7, 99};
    for (int i = 0; i < n; ++i) {
        int fhe = fhe_codes[rng.below(5)];
        auto r = testsupport::make_record(rng.range(1, 12), rng.range(0, 23),
                                          testsupport::random_day(rng), fhe);
        if (fhe == 99) r.fhe = std::nullopt;  // ingest normalizes unknown codes
        if (r.fhe && *r.fhe == 12) r.mc = mc_codes[rng.below(5)];
        if (rng.uniform() < 0.05) r.hour = std::nullopt;
        records.push_back(r);
    }
    return records;
}

}  // namespace

TEST_CASE("mined metrics equal the brute-force oracle", "[mining]") {
    auto tables = CodeTables::defaults();
    for (uint64_t seed : {101, 202, 303}) {
        auto records = synthetic_cluster(seed, 1000);
        for (RuleKind kind : {RuleKind::Fhe, RuleKind::Mc}) {
            auto mined = mine_rules(records, kind, tables);
            auto expected = oracle_mine(records, kind, tables);
            REQUIRE(mined.size() == expected.size());
            for (size_t i = 0; i < mined.size(); ++i) {
                CHECK(mined[i].month == expected[i].month);
                CHECK(mined[i].hour == expected[i].hour);
                CHECK(mined[i].type_code == expected[i].type);
                CHECK(mined[i].x_ij == expected[i].x_ij);
                CHECK(mined[i].x_ijk == expected[i].x_ijk);
                CHECK(mined[i].support_time ==
                      Catch::Approx(expected[i].s_time).margin(1e-12));
                CHECK(mined[i].support_type ==
                      Catch::Approx(expected[i].s_type).margin(1e-12));
                CHECK(mined[i].confidence ==
                      Catch::Approx(expected[i].confidence).margin(1e-12));
                CHECK(mined[i].lift == Catch::Approx(expected[i].lift).margin(1e-12));
            }
        }
    }
}

TEST_CASE("degenerate purity: single type at a spot", "[mining]") {
    auto tables = CodeTables::defaults();
    std::vector<CrashRecord> records;
    // 10 pedestrian crashes at (3, 6); 90 spread elsewhere with other types
    for (int i = 0; i < 10; ++i) records.push_back(testsupport::make_record(3, 6, DayOfWeek::Tu, 8));
    testsupport::Rng rng(5);
    for (int i = 0; i < 90; ++i) {
        int month = rng.range(1, 12), hour = rng.range(0, 23);
        if (month == 3 && hour == 6) hour = 7;
        records.push_back(testsupport::make_record(month, hour, DayOfWeek::Tu, 12));
    }
    auto mined = mine_rules(records, RuleKind::Fhe, tables);
    const AttentionRule* ped = nullptr;
    for (const auto& r : mined) {
        if (r.month == 3 && r.hour == 6 && r.type_code == 8) ped = &r;
    }
    REQUIRE(ped != nullptr);
    CHECK(ped->confidence == 1.0);
    CHECK(ped->support_type == Catch::Approx(0.1));
    CHECK(ped->lift == Catch::Approx(1.0 / ped->support_type));
}

TEST_CASE("confidence sums to one per populated spot", "[mining]") {
    auto tables = CodeTables::defaults();
    auto records = synthetic_cluster(404, 1500);
    for (RuleKind kind : {RuleKind::Fhe, RuleKind::Mc}) {
        auto mined = mine_rules(records, kind, tables);
        std::map<std::pair<int, int>, double> conf_sum;
        std::map<std::pair<int, int>, int64_t> count_sum, spot_count;
        for (const auto& r : mined) {
            conf_sum[{r.month, r.hour}] += r.confidence;
            count_sum[{r.month, r.hour}] += r.x_ijk;
            spot_count[{r.month, r.hour}] = r.x_ij;
        }
        for (const auto& [spot, s] : conf_sum) {
            CHECK(s == Catch::Approx(1.0).margin(1e-12));
            CHECK(count_sum[spot] == spot_count[spot]);
        }
    }
}

TEST_CASE("support consistency: sum of S_ij * C equals S_k", "[mining]") {
    auto tables = CodeTables::defaults();
    auto records = synthetic_cluster(505, 2000);
    auto mined = mine_rules(records, RuleKind::Fhe, tables);
    std::map<int, double> lhs;
    std::map<int, double> rhs;
    for (const auto& r : mined) {
        lhs[r.type_code] += r.support_time * r.confidence;
        rhs[r.type_code] = r.support_type;
    }
    for (const auto& [type, sum] : lhs) {
        CHECK(sum == Catch::Approx(rhs[type]).margin(1e-12));
    }
}

TEST_CASE("screening boundaries", "[mining]") {
    ScreeningCriteria criteria;  // defaults: 1/288, 0.05, lift > 1

    AttentionRule r;
    r.support_time = 1.0 / 288.0;
    r.support_type = 0.05;
    r.confidence = 0.1;
    r.lift = 1.0;  // exactly 1: strict comparison rejects
    std::vector<AttentionRule> rules{r};
    CHECK(screen_rules(rules, criteria).empty());

    rules[0].lift = 1.0000001;
    CHECK(screen_rules(rules, criteria).size() == 1);  // thresholds inclusive

    rules[0].support_time = 1.0 / 288.0 - 1e-9;
    CHECK(screen_rules(rules, criteria).empty());
}

TEST_CASE("screening is monotone in every criterion", "[mining]") {
    auto tables = CodeTables::defaults();
    auto records = synthetic_cluster(606, 1200);
    auto mined = mine_rules(records, RuleKind::Fhe, tables);
    ScreeningCriteria base;
    auto kept = screen_rules(mined, base);
    for (double bump : {0.001, 0.01, 0.1}) {
        ScreeningCriteria tighter = base;
        tighter.min_support_time += bump;
        tighter.min_support_type += bump;
        tighter.min_lift += bump;
        auto fewer = screen_rules(mined, tighter);
        CHECK(fewer.size() <= kept.size());
        for (const auto& r : fewer) {
            CHECK(std::find(kept.begin(), kept.end(), r) != kept.end());
        }
    }
}

TEST_CASE("exact threshold boundary retains via integer identity", "[mining]") {
    auto tables = CodeTables::defaults();
    // 288 records, exactly one at (1, 0): S_ij is exactly 1/288
    std::vector<CrashRecord> records;
    records.push_back(testsupport::make_record(1, 0, DayOfWeek::We, 8));
    int placed = 1;
    for (int m = 1; m <= 12 && placed < 288; ++m) {
        for (int h = 0; h < 24 && placed < 288; ++h) {
            if (m == 1 && h == 0) continue;
            records.push_back(testsupport::make_record(m, h, DayOfWeek::We, 12));
            ++placed;
        }
    }
    REQUIRE(records.size() == 288);
    auto mined = mine_rules(records, RuleKind::Fhe, tables);
    ScreeningCriteria criteria;
    criteria.min_support_type = 0.0;  // isolate the S_ij comparison
    auto kept = screen_rules(mined, criteria);
    bool found = false;
    for (const auto& r : kept) {
        if (r.month == 1 && r.hour == 0 && r.type_code == 8) found = true;
    }
    CHECK(found);  // S_ij == min_support_time passes the >= comparison
}

TEST_CASE("empty subpopulation mines nothing", "[mining]") {
    auto tables = CodeTables::defaults();
    CHECK(mine_rules({}, RuleKind::Fhe, tables).empty());
    // MC over a population with no motor-vehicle crashes
    std::vector<CrashRecord> peds{testsupport::make_record(1, 1, DayOfWeek::Mo, 8)};
    CHECK(mine_rules(peds, RuleKind::Mc, tables).empty());
}

TEST_CASE("rule database build, save, load round trip", "[mining]") {
    auto tables = CodeTables::defaults();
    auto records = synthetic_cluster(707, 1500);

    SpatialCluster cluster;
    cluster.id = 1;
    cluster.member_keys = {{3, 1, 1}};
    cluster.policy = DayPolicy::SplitWeekdayWeekend;
    SpatialCluster whole;
    whole.id = 2;
    whole.member_keys = {{1, 1, 1}};
    whole.policy = DayPolicy::WholeWeek;
    // route half the records to each cluster
    for (size_t i = 0; i < records.size(); ++i) {
        records[i].func_sys = (i % 2 == 0) ? 3 : 1;
        records[i].rel_road = 1;
        records[i].jun_int = 1;
    }

    WeekSplit split;
    split.p = 11;
    split.q = 8;
    ScreeningCriteria criteria;
    criteria.min_lift = 0.0;  // keep plenty of rules for the round trip
    criteria.min_support_type = 0.0;
    criteria.min_support_time = 0.0;
    Provenance prov{"sha256:dataset", "sha256:config"};
    auto db = build_rule_db(records, {cluster, whole}, split, criteria, tables, prov,
                            {"sch_bus", "work_zone", "within_interchange", "crash_factor",
                             "bad_weather"});

    REQUIRE(db.families.size() == 3);  // weekday + weekend + whole_week
    CHECK(db.family(1, DaySegment::Weekday) != nullptr);
    CHECK(db.family(1, DaySegment::Weekend) != nullptr);
    CHECK(db.family(2, DaySegment::WholeWeek) != nullptr);
    // split families partition the cluster's known-hour records
    int64_t cluster1_known = 0;
    for (const auto& r : records) {
        if (r.hour && *r.func_sys == 3) ++cluster1_known;
    }
    CHECK(db.family(1, DaySegment::Weekday)->grid.total +
              db.family(1, DaySegment::Weekend)->grid.total ==
          cluster1_known);

    auto path = std::filesystem::temp_directory_path() / "stag_rules_test.json";
    save_rule_db(db, path.string());
    auto loaded = load_rule_db(path.string());
    CHECK(loaded.provenance == db.provenance);
    CHECK(loaded.split == db.split);
    CHECK(loaded.clusters == db.clusters);
    CHECK(loaded.families == db.families);
    CHECK(loaded.criteria.min_lift == db.criteria.min_lift);

    // bit-exact: re-serialization reproduces identical bytes
    auto path2 = std::filesystem::temp_directory_path() / "stag_rules_test2.json";
    save_rule_db(loaded, path2.string());
    std::ifstream a(path), b(path2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("empty cluster set builds an empty database", "[mining]") {
    auto tables = CodeTables::defaults();
    auto db = build_rule_db({}, {}, WeekSplit{}, ScreeningCriteria{}, tables);
    CHECK(db.families.empty());
    CHECK(db.clusters.empty());
}

TEST_CASE("rule db version mismatch is rejected", "[mining]") {
    nlohmann::json j = {{"schema", "rule_db"}, {"version", 99}};
    CHECK_THROWS_AS(rule_db_from_json(j), DataError);
}
