// Acceptance suite: one pass/fail line per criterion. Returns nonzero when
// any criterion fails. The dataset-conditional criterion is skipped unless
// STAG_FARS_DIR points at a directory of FARS accident CSV files.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "stag/config.hpp"
#include "stag/dataset.hpp"
#include "stag/guidance.hpp"
#include "stag/ingest.hpp"
#include "stag/mining.hpp"
#include "stag/pipeline.hpp"
#include "stag/scene.hpp"
#include "fixture_gen.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Skip : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

void require_close(double actual, double expected, double tol, const std::string& what) {
    if (!(std::abs(actual - expected) <= tol)) {
        std::ostringstream ss;
        ss << what << ": got " << actual << ", want " << expected << " +/- " << tol;
        throw Failure(ss.str());
    }
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / "stag_acceptance";
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// criterion 1+2 support: synthetic clusters and the brute-force oracle

std::vector<stag::CrashRecord> synthetic_cluster(uint64_t seed, int n) {
    testsupport::Rng rng(seed);
    std::vector<stag::CrashRecord> records;
    const int fhe_codes[6] = {1, 8, 9, 12, 42, 99};
    const int mc_codes[5] = {1, 2, 6, 7, 99};
    for (int i = 0; i < n; ++i) {
        int fhe = fhe_codes[rng.below(6)];
        auto r = testsupport::make_record(rng.range(1, 12), rng.range(0, 23),
                                          testsupport::random_day(rng), fhe);
        if (fhe == 99) r.fhe = std::nullopt;
        if (r.fhe && *r.fhe == 12) r.mc = mc_codes[rng.below(5)];
        if (rng.uniform() < 0.03) r.hour = std::nullopt;
        records.push_back(r);
    }
    return records;
}

struct OracleEntry {
    int64_t x_ij = 0, x_ijk = 0, type_total = 0, total = 0;
};

// Independent counting pass over the records; metrics by direct formula.
std::map<std::tuple<int, int, int>, OracleEntry> oracle_counts(
    const std::vector<stag::CrashRecord>& records, stag::RuleKind kind,
    const stag::CodeTables& tables) {
    std::vector<const stag::CrashRecord*> pop;
    for (const auto& r : records) {
        if (!r.hour) continue;
        if (kind == stag::RuleKind::Mc && !(r.fhe && *r.fhe == tables.mvit_fhe)) continue;
        pop.push_back(&r);
    }
    auto type_of = [&](const stag::CrashRecord& r) {
        if (kind == stag::RuleKind::Fhe) {
            return (r.fhe && tables.fhe.labels.count(*r.fhe)) ? *r.fhe : stag::kOtherTypeCode;
        }
        return (r.mc && tables.mc.labels.count(*r.mc) && !tables.mc.is_unknown(*r.mc))
                   ? *r.mc
                   : stag::kOtherTypeCode;
    };
    std::map<std::tuple<int, int, int>, OracleEntry> out;
    std::map<std::pair<int, int>, int64_t> spot;
    std::map<int, int64_t> per_type;
    for (const auto* r : pop) {
        ++spot[{r->month, *r->hour}];
        ++per_type[type_of(*r)];
    }
    for (const auto* r : pop) {
        auto key = std::make_tuple(r->month, *r->hour, type_of(*r));
        auto& e = out[key];
        ++e.x_ijk;
        e.x_ij = spot[{r->month, *r->hour}];
        e.type_total = per_type[type_of(*r)];
        e.total = int64_t(pop.size());
    }
    return out;
}

// ---------------------------------------------------------------------------

void criterion_rule_metrics_oracle() {
    auto start = Clock::now();
    auto tables = stag::CodeTables::defaults();
    testsupport::Rng seeds(20250101);
    for (int c = 0; c < 20; ++c) {
        int n = 200 + int(seeds.below(1801));  // <= 2k records
        auto records = synthetic_cluster(seeds.next(), n);
        for (auto kind : {stag::RuleKind::Fhe, stag::RuleKind::Mc}) {
            auto mined = stag::mine_rules(records, kind, tables);
            auto oracle = oracle_counts(records, kind, tables);
            require(mined.size() == oracle.size(),
                    "rule count mismatch with oracle (cluster " + std::to_string(c) + ")");
            for (const auto& r : mined) {
                auto it = oracle.find({r.month, r.hour, r.type_code});
                require(it != oracle.end(), "mined rule missing from oracle");
                const auto& e = it->second;
                require(r.x_ij == e.x_ij && r.x_ijk == e.x_ijk, "count mismatch with oracle");
                require_close(r.support_time, double(e.x_ij) / double(e.total), 1e-12, "S_ij");
                require_close(r.support_type, double(e.type_total) / double(e.total), 1e-12,
                              "S_k");
                require_close(r.confidence, double(e.x_ijk) / double(e.x_ij), 1e-12, "C");
                require_close(r.lift, (double(e.x_ijk) / double(e.x_ij)) /
                                          (double(e.type_total) / double(e.total)),
                              1e-12, "L");
            }
        }
    }
    double elapsed = seconds_since(start);
    require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + "s exceeds 10s");
}

void criterion_consistency_identities() {
    auto tables = stag::CodeTables::defaults();
    testsupport::Rng seeds(20250202);
    for (int c = 0; c < 10; ++c) {
        auto records = synthetic_cluster(seeds.next(), 1500);
        for (auto kind : {stag::RuleKind::Fhe, stag::RuleKind::Mc}) {
            auto mined = stag::mine_rules(records, kind, tables);
            std::map<std::pair<int, int>, double> conf_sum;
            std::map<int, double> weighted, s_k;
            for (const auto& r : mined) {
                conf_sum[{r.month, r.hour}] += r.confidence;
                weighted[r.type_code] += r.support_time * r.confidence;
                s_k[r.type_code] = r.support_type;
            }
            for (const auto& [spot, sum] : conf_sum) {
                require_close(sum, 1.0, 1e-12, "sum_k C at a populated spot");
            }
            for (const auto& [type, sum] : weighted) {
                require_close(sum, s_k[type], 1e-12, "sum_ij S_ij*C vs S_k");
            }
        }
    }
}

void criterion_split_optimizer() {
    auto start = Clock::now();
    testsupport::Rng rng(20250303);
    for (int trial = 0; trial < 100; ++trial) {
        stag::WeekHourSeries s;
        for (int d = 0; d < 7; ++d) {
            for (int h = 0; h < 24; ++h) s.counts[d][h] = rng.range(0, 80);
        }
        auto split = stag::optimize_week_split(s);

        // exhaustive oracle with smallest-index tie rule
        auto friday_ss = [&](int p) {
            double ss = 0;
            for (int i = 0; i <= p; ++i) {
                double xd = (s.counts[0][i] + s.counts[1][i] + s.counts[2][i] + s.counts[3][i]) / 4.0;
                ss += (s.counts[4][i] - xd) * (s.counts[4][i] - xd);
            }
            for (int i = p + 1; i < 24; ++i) {
                double d = double(s.counts[4][i]) - double(s.counts[5][i]);
                ss += d * d;
            }
            return ss;
        };
        auto sunday_ss = [&](int q) {
            double ss = 0;
            for (int i = 0; i <= q; ++i) {
                double d = double(s.counts[6][i]) - double(s.counts[5][i]);
                ss += d * d;
            }
            for (int i = q + 1; i < 24; ++i) {
                double xd = (s.counts[0][i] + s.counts[1][i] + s.counts[2][i] + s.counts[3][i]) / 4.0;
                ss += (s.counts[6][i] - xd) * (s.counts[6][i] - xd);
            }
            return ss;
        };
        int best_p = 0, best_q = 0;
        for (int c = 1; c < 24; ++c) {
            if (friday_ss(c) < friday_ss(best_p)) best_p = c;
            if (sunday_ss(c) < sunday_ss(best_q)) best_q = c;
        }
        require(split.p == best_p && split.q == best_q,
                "split argmin mismatch at trial " + std::to_string(trial));
    }
    double elapsed = seconds_since(start);
    require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + "s exceeds 1s");
}

void criterion_morans_i() {
    // hand-computed 2x2 case, exact
    std::vector<double> y = {1, 0, 0, 1};
    auto I = stag::morans_i(y, stag::NeighborWeights::queen(2, 2));
    require(I.has_value(), "2x2 Moran's I undefined");
    require(*I == -1.0 / 3.0, "2x2 Moran's I is not exactly -1/3");

    // constant grid signals Undefined
    stag::TemporalGrid constant;
    for (int m = 1; m <= 12; ++m) {
        for (int h = 0; h < 24; ++h) constant.add(m, h, 5);
    }
    require(!stag::morans_i(constant).has_value(), "constant grid must be undefined");

    // permutation null: mean of I over shuffles approaches -1/(N-1)
    testsupport::Rng rng(20250404);
    std::vector<double> grid(288);
    for (auto& v : grid) v = double(rng.range(0, 40));
    auto w = stag::NeighborWeights::queen(12, 24);
    double sum = 0;
    int shuffles = 1000;
    for (int s = 0; s < shuffles; ++s) {
        for (size_t i = grid.size(); i > 1; --i) {
            std::swap(grid[i - 1], grid[rng.below(i)]);
        }
        auto shuffled_i = stag::morans_i(grid, w);
        require(shuffled_i.has_value(), "shuffled grid unexpectedly constant");
        sum += *shuffled_i;
    }
    double mean = sum / shuffles;
    require_close(mean, -1.0 / 287.0, 0.01, "permutation-null mean of Moran's I");
}

void criterion_planted_pattern() {
    auto start = Clock::now();
    auto dir = scratch_dir();
    auto fx = testsupport::generate_planted(20250505, 50000);
    auto csv_path = (dir / "planted.csv").string();
    {
        std::ofstream out(csv_path, std::ios::binary);
        out << fx.csv;
    }
    std::string cfg_text = "[input]\naccident_csv = [\"" + csv_path + "\"]\n" +
                           "[output]\ndir = \"" + (dir / "out").string() + "\"\n" +
                           "[clustering]\nmin_similarity = 0.55\n" +
                           "[day_policy]\ni_threshold = 1.5\n";
    auto cfg = stag::parse_pipeline_config(cfg_text);
    auto result = stag::run_pipeline(cfg);

    // plant (a): the merged cluster's temporal grid is strongly autocorrelated
    require(result.clusters.size() >= 1, "no clusters formed");
    auto cluster_id = stag::resolve_cluster(fx.merged_keys[0], result.rules);
    require(cluster_id.has_value(), "planted key not clustered");
    const stag::SpatialCluster* cluster = nullptr;
    for (const auto& c : result.clusters) {
        if (c.id == *cluster_id) cluster = &c;
    }
    require(cluster != nullptr, "cluster lookup failed");
    auto I = stag::morans_i(cluster->grid);
    require(I.has_value() && *I > 0.3,
            "planted temporal cluster not recovered (Moran's I too low)");

    // plant (b): the spot-type association survives screening with lift ~2
    const stag::RuleFamily* fam = result.rules.family(*cluster_id, stag::DaySegment::WholeWeek);
    require(fam != nullptr, "no whole-week rule family for the planted cluster");
    const stag::AttentionRule* planted = nullptr;
    for (const auto& r : fam->fhe_rules) {
        if (r.month == fx.planted_month && r.hour == fx.planted_hour &&
            r.type_code == fx.planted_type) {
            planted = &r;
        }
    }
    require(planted != nullptr, "planted rule did not survive screening");
    require_close(planted->lift, 2.0, 0.15, "planted lift");

    double elapsed = seconds_since(start);
    require(elapsed < 30.0, "runtime " + std::to_string(elapsed) + "s exceeds 30s");
}

void criterion_partition_conservation() {
    auto dir = scratch_dir();
    struct Case {
        std::string name;
        std::string csv;
    };
    std::vector<Case> cases;
    cases.push_back({"planted", testsupport::generate_planted(20250606, 8000).csv});
    cases.push_back({"messy", testsupport::generate_messy(20250607, 4000, 9)});
    for (const auto& c : cases) {
        auto csv_path = (dir / (c.name + ".csv")).string();
        {
            std::ofstream out(csv_path, std::ios::binary);
            out << c.csv;
        }
        auto cfg = stag::parse_pipeline_config(
            "[input]\naccident_csv = [\"" + csv_path + "\"]\n" + "[output]\ndir = \"" +
            (dir / ("out_" + c.name)).string() + "\"\n" + "[grouping]\nsize_threshold = 50\n");
        auto result = stag::run_pipeline(cfg);

        int64_t leaf_sum = 0;
        for (const auto& leaf : result.tree.leaves) leaf_sum += leaf.count;
        require(leaf_sum == int64_t(result.records.size()),
                c.name + ": scenario leaves do not sum to the dataset");

        int64_t group_sum = 0, defined = 0;
        for (const auto& [key, g] : result.groups) {
            group_sum += g.size;
            if (key.defined()) defined += g.size;
        }
        require(group_sum == int64_t(result.common.size()),
                c.name + ": groups do not sum to the common scenario");

        int64_t cluster_sum = 0;
        for (const auto& cl : result.clusters) cluster_sum += cl.size;
        require(cluster_sum == defined,
                c.name + ": clusters do not sum to the defined-key population");
    }
}

void criterion_scene_regression() {
    std::ifstream in(std::string(STAG_SOURCE_DIR) + "/data/fixtures/dashcam_frame.json");
    require(in.good(), "bundled scene fixture missing");
    nlohmann::json fj = nlohmann::json::parse(in);
    auto frame = stag::parse_scene_frame(fj);
    stag::Calibration calib;  // shipped calibration

    auto flags = stag::flag_risky_pedestrians(frame, calib);
    require(flags.size() == 2, "expected two pedestrians in the fixture");
    require(flags[0].distance_ft.has_value(), "front pedestrian distance undefined");
    require_close(*flags[0].distance_ft, 5.1, 0.05, "front pedestrian distance");
    require(flags[0].risky, "direct-lane pedestrian must be flagged risky");
    require(!flags[1].risky, "walkway pedestrian must not be flagged risky");

    stag::GuidanceResponse guidance;
    guidance.scenario_id = "common";
    guidance.cluster_id = 2;
    guidance.day_class = stag::DayClass::Weekday;
    guidance.segment = stag::DaySegment::Weekday;
    guidance.support_time = 0.0037;
    stag::AttentionRule ped;
    ped.kind = stag::RuleKind::Fhe;
    ped.type_code = 8;
    ped.type_label = "Pedestrian";
    ped.confidence = 0.4244;
    ped.lift = 1.7114;
    ped.month = 3;
    ped.hour = 6;
    stag::AttentionRule ftr = ped;
    ftr.kind = stag::RuleKind::Mc;
    ftr.type_code = 1;
    ftr.type_label = "Front-to-Rear";
    ftr.confidence = 0.0988;
    ftr.lift = 1.3668;
    guidance.rules = {ped, ftr};

    auto scene = stag::apply_attention(frame, guidance, calib);
    require(scene.objects.size() == 5, "expected five annotated objects");
    require(scene.objects[0].attended, "direct-lane pedestrian must be attended");
    require(!scene.objects[1].attended, "walkway pedestrian must not be attended");
    require(!scene.objects[2].attended,
            "opposite-direction vehicle must be unattended under a front-to-rear rule");
}

void criterion_fars_reproduction() {
    const char* env = std::getenv("STAG_FARS_DIR");
    if (!env || std::string(env).empty()) {
        throw Skip("set STAG_FARS_DIR to a directory of FARS 2013-2017 accident CSVs to enable");
    }
    fs::path fars_dir(env);
    std::vector<std::string> csvs;
    for (const auto& entry : fs::directory_iterator(fars_dir)) {
        if (entry.path().extension() == ".csv" || entry.path().extension() == ".CSV") {
            csvs.push_back(entry.path().string());
        }
    }
    std::sort(csvs.begin(), csvs.end());
    require(!csvs.empty(), "STAG_FARS_DIR contains no CSV files");

    auto dir = scratch_dir();
    // pass 1: no merge plan; identify step-1 clusters by their anchor keys
    std::ostringstream inputs;
    inputs << "[input]\naccident_csv = [";
    for (size_t i = 0; i < csvs.size(); ++i) {
        inputs << (i ? ", " : "") << '"' << csvs[i] << '"';
    }
    inputs << "]\n";
    auto cfg1 = stag::parse_pipeline_config(inputs.str() + "[output]\ndir = \"" +
                                            (dir / "fars_pass1").string() + "\"\n");
    auto pass1 = stag::run_pipeline(cfg1);

    require(pass1.records.size() == 162104,
            "record count: got " + std::to_string(pass1.records.size()) + ", want 162104");
    int64_t common_count = 0;
    for (const auto& leaf : pass1.tree.leaves) {
        if (leaf.id == "common") common_count = leaf.count;
    }
    require(common_count == 128149,
            "common scenario: got " + std::to_string(common_count) + ", want 128149");
    double pct = 100.0 * double(common_count) / double(pass1.records.size());
    require_close(pct, 79.05, 0.05, "common-scenario percentage");

    require(pass1.groups.size() == 184,
            "spatial groups: got " + std::to_string(pass1.groups.size()) + ", want 184");
    auto [large, small] = stag::filter_by_size(pass1.groups, 100);
    require(large.size() == 68, "large groups: got " + std::to_string(large.size()));
    int64_t large_sum = 0;
    for (const auto& [k, g] : large) large_sum += g.size;
    require(large_sum == 123782, "large-group crashes: got " + std::to_string(large_sum));

    require(pass1.split.p == 11 && pass1.split.q == 8,
            "split: got p=" + std::to_string(pass1.split.p) + " q=" +
                std::to_string(pass1.split.q) + ", want p=11 q=8");

    // published group-level Moran's I examples
    auto group_moran = [&](const stag::SpatialKey& key) -> double {
        auto it = pass1.groups.find(key);
        require(it != pass1.groups.end() && it->second.morans_i.has_value(),
                "reference group missing or constant");
        return *it->second.morans_i;
    };
    require_close(group_moran({3, 1, 103}), 0.65, 0.02,
                  "arterial/roadway/T-intersection group I");
    require_close(group_moran({1, 4, 1}), 0.23, 0.02, "interstate/roadside/non-junction group I");

    // anchor keys from the published cluster descriptions
    stag::SpatialKey anchor_highspeed{1, 1, 1};   // interstates, on roadway, non-junction
    stag::SpatialKey anchor_roadway{7, 1, 4};     // local, on roadway, driveway access
    stag::SpatialKey anchor_roadside{3, 4, 1};    // arterial, on roadside, non-junction
    auto id_highspeed = stag::resolve_cluster(anchor_highspeed, pass1.rules);
    auto id_roadway = stag::resolve_cluster(anchor_roadway, pass1.rules);
    auto id_roadside = stag::resolve_cluster(anchor_roadside, pass1.rules);
    require(id_highspeed && id_roadway && id_roadside,
            "anchor keys not clustered in pass 1; adjust the stop criterion");

    // pass 2: route the leftover groups with the published merge plan
    std::string plan = "[[clustering.merge]]\ntarget = " + std::to_string(*id_roadway) +
                       "\nfunc_sys = [3, 4, 5, 6, 7]\nrel_road = [1]\n" +
                       "[[clustering.merge]]\ntarget = " + std::to_string(*id_roadside) +
                       "\nfunc_sys = [3, 4, 5, 6, 7]\nrel_road = [5]\njun_int = [1]\n";
    auto cfg2 = stag::parse_pipeline_config(inputs.str() + "[output]\ndir = \"" +
                                            (dir / "fars_pass2").string() + "\"\n" + plan);
    auto pass2 = stag::run_pipeline(cfg2);

    auto cluster_by_anchor = [&](const stag::SpatialKey& key) -> const stag::SpatialCluster* {
        auto id = stag::resolve_cluster(key, pass2.rules);
        if (!id) return nullptr;
        for (const auto& c : pass2.clusters) {
            if (c.id == *id) return &c;
        }
        return nullptr;
    };
    const auto* c1 = cluster_by_anchor(anchor_highspeed);
    const auto* c2 = cluster_by_anchor(anchor_roadway);
    const auto* c3 = cluster_by_anchor(anchor_roadside);
    require(c1 && c2 && c3, "anchor clusters missing in pass 2");

    // published Moran's I profile (whole week / weekday / weekend)
    auto check_moran = [&](const stag::SpatialCluster* c, double whole, double weekday,
                           double weekend, const std::string& name) {
        require(c->decision.i_whole && c->decision.i_weekday && c->decision.i_weekend,
                name + ": undefined Moran's I");
        require_close(*c->decision.i_whole, whole, 0.02, name + " whole-week I");
        require_close(*c->decision.i_weekday, weekday, 0.02, name + " weekday I");
        require_close(*c->decision.i_weekend, weekend, 0.02, name + " weekend I");
    };
    check_moran(c1, 0.64, 0.41, 0.66, "high-speed cluster");
    check_moran(c2, 0.83, 0.80, 0.84, "roadway cluster");
    check_moran(c3, 0.84, 0.81, 0.81, "roadside cluster");

    require(c2->decision.r_day_classes.has_value(), "roadway cluster r undefined");
    require_close(*c2->decision.r_day_classes, 0.67, 0.02, "roadway weekday/weekend r");
    require(c3->decision.r_day_classes.has_value(), "roadside cluster r undefined");
    require_close(*c3->decision.r_day_classes, 0.34, 0.02, "roadside weekday/weekend r");

    // day policies and the resulting six rule families
    require(c1->policy == stag::DayPolicy::WholeWeek, "high-speed cluster should stay whole-week");
    require(c2->policy == stag::DayPolicy::SplitWeekdayWeekend, "roadway cluster should split");
    require(c3->policy == stag::DayPolicy::SplitWeekdayWeekend, "roadside cluster should split");
    require(pass2.rules.families.size() == 6,
            "expected six rule families, got " + std::to_string(pass2.rules.families.size()));

    // query: local road, on roadway, driveway access, weekday 6am in March
    stag::DrivingContext ctx;
    ctx.key = anchor_roadway;
    ctx.month = 3;
    ctx.hour = 6;
    ctx.day = stag::DayOfWeek::We;
    auto resp = stag::query(ctx, pass2.rules);
    require_close(resp.support_time, 0.0037, 0.0001, "spot support at March/6am (roadway weekday)");
    const stag::AttentionRule* ped = nullptr;
    const stag::AttentionRule* ftr = nullptr;
    for (const auto& r : resp.rules) {
        if (r.kind == stag::RuleKind::Fhe && r.type_label == "Pedestrian") ped = &r;
        if (r.kind == stag::RuleKind::Mc && r.type_code == 1) ftr = &r;
    }
    require(ped != nullptr, "pedestrian rule not retrieved");
    require_close(ped->confidence, 0.4244, 0.0005, "pedestrian rule confidence");
    require_close(ped->lift, 1.7114, 0.0005, "pedestrian rule lift");
    require(ftr != nullptr, "front-to-rear rule not retrieved");
    require_close(ftr->confidence, 0.0988, 0.0005, "front-to-rear confidence");
    require_close(ftr->lift, 1.3668, 0.0005, "front-to-rear lift");

    // published high-speed-cluster rules at hour 0 of May
    stag::DrivingContext may0;
    may0.key = anchor_highspeed;
    may0.month = 5;
    may0.hour = 0;
    may0.day = stag::DayOfWeek::We;
    auto may0_resp = stag::query(may0, pass2.rules);
    const stag::AttentionRule* may_ped = nullptr;
    const stag::AttentionRule* may_roll = nullptr;
    for (const auto& r : may0_resp.rules) {
        if (r.kind != stag::RuleKind::Fhe) continue;
        if (r.type_label == "Pedestrian") may_ped = &r;
        if (r.type_code == 1) may_roll = &r;
    }
    require(may_ped != nullptr, "May/hour-0 pedestrian rule not retained");
    require_close(may_ped->confidence, 0.531, 0.005, "May/hour-0 pedestrian confidence");
    require_close(may_ped->lift, 2.2, 0.05, "May/hour-0 pedestrian lift");
    require(may_roll != nullptr, "May/hour-0 rollover rule not retained");
    require_close(may_roll->confidence, 0.094, 0.005, "May/hour-0 rollover confidence");
    require_close(may_roll->lift, 1.2, 0.05, "May/hour-0 rollover lift");

    // regression: no rollover rule survives screening for the roadway
    // cluster's weekday family
    const stag::RuleFamily* c2_weekday =
        pass2.rules.family(c2->id, stag::DaySegment::Weekday);
    require(c2_weekday != nullptr, "roadway cluster lacks a weekday family");
    for (const auto& r : c2_weekday->fhe_rules) {
        require(r.type_code != 1,
                "unexpected retained rollover rule in the roadway weekday family");
    }

    // a spot with no retained rules answers with an empty rule list
    stag::DrivingContext quiet;
    quiet.key = anchor_highspeed;
    quiet.month = 5;
    quiet.hour = 18;
    quiet.day = stag::DayOfWeek::We;
    auto quiet_resp = stag::query(quiet, pass2.rules);
    require(quiet_resp.rules.empty(), "expected no retained rules at May 18:00 (high-speed)");
}

void criterion_determinism() {
    auto dir = scratch_dir();
    auto fx = testsupport::generate_planted(20250909, 10000);
    auto csv_path = (dir / "determinism.csv").string();
    {
        std::ofstream out(csv_path, std::ios::binary);
        out << fx.csv;
    }
    auto cfg = stag::parse_pipeline_config("[input]\naccident_csv = [\"" + csv_path + "\"]\n" +
                                           "[output]\ndir = \"" + (dir / "det_out").string() +
                                           "\"\n");
    auto r1 = stag::run_pipeline(cfg);
    std::string first = read_file(r1.manifest_path);
    auto r2 = stag::run_pipeline(cfg);
    std::string second = read_file(r2.manifest_path);
    require(first == second, "manifests differ between identical runs");
}

struct Criterion {
    int id;
    std::string name;
    std::function<void()> run;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "rule metrics match the brute-force oracle", criterion_rule_metrics_oracle},
        {2, "confidence and support consistency identities", criterion_consistency_identities},
        {3, "week-split optimizer equals exhaustive search", criterion_split_optimizer},
        {4, "Moran's I: exact case, permutation null, undefined case", criterion_morans_i},
        {5, "planted spatio-temporal pattern is recovered", criterion_planted_pattern},
        {6, "partition conservation through every stage", criterion_partition_conservation},
        {7, "scene analysis regression on the bundled frame", criterion_scene_regression},
        {8, "reference-dataset reproduction (needs STAG_FARS_DIR)", criterion_fars_reproduction},
        {9, "byte-identical manifests across reruns", criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        try {
            c.run();
            std::cout << "PASS  " << c.id << "  " << c.name << "\n";
        } catch (const Skip& s) {
            std::cout << "SKIP  " << c.id << "  " << c.name << " (" << s.what() << ")\n";
        } catch (const std::exception& e) {
            std::cout << "FAIL  " << c.id << "  " << c.name << " (" << e.what() << ")\n";
            ++failures;
        }
    }
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
