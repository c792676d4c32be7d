// stag command-line tool: runs the crash-report analytics pipeline stage by
// stage or end to end, queries the mined rule database, analyzes scene
// frames against it, and renders SVG charts.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stag/config.hpp"
#include "stag/dataset.hpp"
#include "stag/guidance.hpp"
#include "stag/ingest.hpp"
#include "stag/pipeline.hpp"
#include "stag/scene.hpp"
#include "stag/svg.hpp"

namespace {

using nlohmann::ordered_json;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw stag::IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw stag::IoError("write failed: " + path);
}

stag::PipelineConfig config_or_default(const std::string& path) {
    if (path.empty()) return stag::parse_pipeline_config("");
    return stag::load_pipeline_config(path);
}

// Stages downstream of ingest recompute their inputs from the normalized
// dataset; every stage is deterministic, so this reproduces the artifacts
// a full `run` would write.
struct StagePrep {
    std::vector<stag::CrashRecord> records;
    std::vector<stag::CrashRecord> common;
    stag::ScenarioTree tree;
    stag::WeekSplit split;

    static StagePrep from_dataset(const std::string& dataset_path) {
        StagePrep p;
        p.records = stag::load_dataset(dataset_path);
        auto order = stag::rank_sparse_variables(p.records);
        p.tree = stag::decompose(p.records, order);
        p.common = stag::common_scenario_subset(p.records, p.tree);
        p.split = stag::optimize_week_split(stag::week_hour_histogram(p.common));
        return p;
    }
};

int cmd_ingest(const std::vector<std::string>& inputs, const std::string& tables_path,
               const std::string& config_path, const std::string& out_path,
               const std::string& report_path) {
    auto cfg = config_or_default(config_path);
    stag::CodeTables tables = cfg.load_tables();
    if (!tables_path.empty()) {  // explicit flag wins over the config
        std::ifstream in(tables_path, std::ios::binary);
        if (!in) throw stag::IoError("cannot open code tables: " + tables_path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw stag::DataError("code tables: invalid JSON");
        tables = stag::CodeTables::from_json(j);
    }
    std::vector<stag::CrashRecord> records;
    stag::IngestReport report;
    for (const auto& path : inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw stag::IoError("cannot open input CSV: " + path);
        auto part = stag::parse_crash_csv(in, tables, cfg.columns);
        records.insert(records.end(), part.records.begin(), part.records.end());
        report.rows_read += part.report.rows_read;
        report.records_retained += part.report.records_retained;
        report.rows_dropped += part.report.rows_dropped;
        for (const auto& [reason, n] : part.report.drop_reasons) report.drop_reasons[reason] += n;
    }
    stag::write_dataset(records, out_path);
    ordered_json rj;
    rj["schema"] = "ingest_report";
    rj["version"] = 1;
    rj["rows_read"] = report.rows_read;
    rj["records_retained"] = report.records_retained;
    rj["rows_dropped"] = report.rows_dropped;
    rj["drop_reasons"] = report.drop_reasons;
    if (!report_path.empty()) write_file(report_path, rj.dump(2) + "\n");
    std::cout << rj.dump(2) << "\n";
    return 0;
}

int cmd_decompose(const std::string& dataset_path, const std::string& out_path) {
    auto records = stag::load_dataset(dataset_path);
    auto order = stag::rank_sparse_variables(records);
    auto tree = stag::decompose(records, order);
    auto j = stag::tree_to_json(tree);
    if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_split(const std::string& dataset_path, const std::string& out_path) {
    auto prep = StagePrep::from_dataset(dataset_path);
    auto j = stag::split_to_json(prep.split);
    if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_group(const std::string& dataset_path, const std::string& config_path,
              const std::string& out_path, int64_t threshold) {
    auto cfg = config_or_default(config_path);
    auto tables = cfg.load_tables();
    auto prep = StagePrep::from_dataset(dataset_path);
    auto groups = stag::partition_groups(prep.common);
    std::string csv = stag::groups_to_csv(groups, tables);
    if (!out_path.empty()) write_file(out_path, csv);
    auto [large, small] = stag::filter_by_size(groups, threshold);
    std::cout << "groups: " << groups.size() << " (" << large.size() << " with size > "
              << threshold << ")\n";
    if (out_path.empty()) std::cout << csv;
    return 0;
}

int cmd_cluster(const std::string& dataset_path, const std::string& config_path,
                const std::string& out_dir) {
    auto cfg = config_or_default(config_path);
    auto prep = StagePrep::from_dataset(dataset_path);
    auto groups = stag::partition_groups(prep.common);
    auto [clusters, trace] = stag::build_clusters(groups, prep.common, prep.split, cfg);
    std::filesystem::create_directories(out_dir);
    std::filesystem::path dir(out_dir);
    write_file((dir / "clusters.json").string(),
               stag::clusters_to_json(clusters).dump(2) + "\n");
    write_file((dir / "dendrogram.json").string(),
               stag::trace_to_json(trace).dump(2) + "\n");
    std::string membership = "cluster_id,func_sys,rel_road,jun_int,group_size\n";
    for (const auto& c : clusters) {
        for (const auto& k : c.member_keys) {
            auto it = groups.find(k);
            auto code = [](const std::optional<int>& v) {
                return v ? std::to_string(*v) : std::string("NA");
            };
            membership += std::to_string(c.id) + "," + code(k.func_sys) + "," + code(k.rel_road) +
                          "," + code(k.jun_int) + "," +
                          std::to_string(it == groups.end() ? 0 : it->second.size) + "\n";
        }
    }
    write_file((dir / "membership.csv").string(), membership);
    std::cout << "clusters: " << clusters.size() << ", merge trace length: " << trace.merges.size()
              << "\n";
    return 0;
}

int cmd_mine(const std::string& dataset_path, const std::string& config_path,
             const std::string& out_path) {
    auto cfg = config_or_default(config_path);
    auto tables = cfg.load_tables();
    auto prep = StagePrep::from_dataset(dataset_path);
    auto groups = stag::partition_groups(prep.common);
    auto [clusters, trace] = stag::build_clusters(groups, prep.common, prep.split, cfg);
    stag::Provenance prov;
    prov.dataset_id = "sha256:" + stag::sha256_file_hex(dataset_path);
    prov.config_hash = "sha256:" + stag::sha256_hex(cfg.raw_text);
    std::vector<std::string> order_names;
    for (stag::SparseVar v : prep.tree.order) order_names.push_back(stag::var_name(v));
    auto db = stag::build_rule_db(prep.common, clusters, prep.split, cfg.criteria, tables, prov,
                                  order_names);
    stag::save_rule_db(db, out_path);
    size_t retained = 0;
    for (const auto& f : db.families) retained += f.fhe_rules.size() + f.mc_rules.size();
    std::cout << "rule families: " << db.families.size() << ", retained rules: " << retained
              << "\n";
    return 0;
}

stag::DrivingContext context_from_flags(const std::string& time_iso, int func_sys, int rel_road,
                                        int jun_int, int reljct2, int typ_int,
                                        const stag::SparseFlags& flags) {
    stag::DrivingContext ctx;
    ctx.flags = flags;
    auto dt = stag::parse_iso_datetime(time_iso);
    ctx.month = dt.month;
    ctx.hour = dt.hour;
    ctx.day = stag::civil_day_of_week(dt.year, dt.month, dt.day);
    ctx.key.func_sys = func_sys >= 0 ? std::optional<int>(func_sys) : std::nullopt;
    ctx.key.rel_road = rel_road >= 0 ? std::optional<int>(rel_road) : std::nullopt;
    if (jun_int >= 0) {
        ctx.key.jun_int = jun_int;
    } else if (reljct2 >= 0) {
        auto tables = stag::CodeTables::defaults();
        ctx.key.jun_int = stag::derive_jun_int(
            reljct2, typ_int >= 0 ? std::optional<int>(typ_int) : std::nullopt, tables);
    }
    return ctx;
}

ordered_json response_to_json(const stag::GuidanceResponse& resp) {
    ordered_json j;
    j["scenario"] = resp.scenario_id;
    j["cluster"] = resp.cluster_id ? ordered_json(*resp.cluster_id) : ordered_json(nullptr);
    j["day_class"] = stag::to_string(resp.day_class);
    j["segment"] = stag::to_string(resp.segment);
    j["support_time"] = resp.support_time;
    auto rules = ordered_json::array();
    for (const auto& r : resp.rules) {
        rules.push_back({{"kind", stag::to_string(r.kind)},
                         {"type", r.type_code},
                         {"label", r.type_label},
                         {"month", r.month},
                         {"hour", r.hour},
                         {"support_time", r.support_time},
                         {"support_type", r.support_type},
                         {"confidence", r.confidence},
                         {"lift", r.lift}});
    }
    j["rules"] = rules;
    j["rationale"] = resp.rationale;
    return j;
}

void print_response_text(const stag::GuidanceResponse& resp) {
    std::cout << "scenario:  " << resp.scenario_id << "\n";
    std::cout << "cluster:   "
              << (resp.cluster_id ? std::to_string(*resp.cluster_id) : std::string("none")) << "\n";
    std::cout << "day class: " << stag::to_string(resp.day_class) << " (family "
              << stag::to_string(resp.segment) << ")\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", resp.support_time * 1000.0);
    std::cout << "S(spot):   " << buf << " per mille\n";
    if (resp.rules.empty()) {
        std::cout << "rules:     none\n";
    } else {
        std::cout << "rules:\n";
        for (const auto& r : resp.rules) {
            std::snprintf(buf, sizeof buf, "C=%.4f L=%.4f", r.confidence, r.lift);
            std::cout << "  " << (r.kind == stag::RuleKind::Fhe ? "FHE" : "MC ") << "  "
                      << r.type_label << "  " << buf << "\n";
        }
    }
    for (const auto& line : resp.rationale) std::cout << "note: " << line << "\n";
}

int cmd_analyze_scene(const std::string& rules_path, const std::string& frame_path,
                      const std::string& config_path, const std::string& out_path) {
    auto cfg = config_or_default(config_path);
    auto db = stag::load_rule_db(rules_path);
    std::ifstream in(frame_path, std::ios::binary);
    if (!in) throw stag::IoError("cannot open frame: " + frame_path);
    nlohmann::json fj = nlohmann::json::parse(in, nullptr, false);
    if (fj.is_discarded()) throw stag::DataError("scene frame: invalid JSON");
    auto frame = stag::parse_scene_frame(fj);

    stag::DrivingContext ctx;
    ctx.flags = frame.flags;
    auto dt = stag::parse_iso_datetime(frame.time_iso);
    ctx.month = dt.month;
    ctx.hour = dt.hour;
    ctx.day = stag::civil_day_of_week(dt.year, dt.month, dt.day);
    ctx.key.func_sys = frame.func_sys;
    ctx.key.rel_road = frame.rel_road;
    auto tables = stag::CodeTables::defaults();
    ctx.key.jun_int = stag::derive_jun_int(frame.reljct2, frame.typ_int, tables);

    auto guidance = stag::query(ctx, db);
    auto scene = stag::apply_attention(frame, guidance, cfg.calibration);
    auto j = stag::annotated_scene_to_json(frame, guidance, scene);
    if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_render(const std::string& what, const std::string& rules_path,
               const std::string& dataset_path, int cluster, const std::string& segment,
               const std::string& kind, int type, int hm_func_sys, int hm_rel_road,
               int hm_jun_int, const std::string& out_path) {
    std::string svg;
    if (what == "rules") {
        auto db = stag::load_rule_db(rules_path);
        auto seg = stag::day_segment_from_string(segment);
        if (!seg) throw stag::DataError("unknown segment: " + segment);
        const stag::RuleFamily* fam = db.family(cluster, *seg);
        if (!fam) throw stag::DataError("no rule family for cluster " + std::to_string(cluster) +
                                        " segment " + segment);
        const auto& rules = kind == "mc" ? fam->mc_rules : fam->fhe_rules;
        std::vector<stag::AttentionRule> selected;
        std::string label;
        for (const auto& r : rules) {
            if (r.type_code == type) {
                label = r.type_label;
                selected.push_back(r);
            }
        }
        std::string title = "cluster " + std::to_string(cluster) + " " + segment + " " +
                            (kind == "mc" ? "MC" : "FHE") + " type " + std::to_string(type) +
                            (label.empty() ? "" : " (" + label + ")");
        svg = stag::svg::render_rule_grid(selected, title);
    } else if (what == "heatmap") {
        auto prep = StagePrep::from_dataset(dataset_path);
        std::string title = "common scenario month-hour distribution";
        std::vector<stag::CrashRecord> subset;
        const std::vector<stag::CrashRecord>* source = &prep.common;
        if (hm_func_sys >= 0 && hm_rel_road >= 0 && hm_jun_int >= 0) {
            stag::SpatialKey key{hm_func_sys, hm_rel_road, hm_jun_int};
            for (const auto& r : prep.common) {
                if (stag::SpatialKey::of(r) == key) subset.push_back(r);
            }
            source = &subset;
            title = "group " + std::to_string(hm_func_sys) + "/" + std::to_string(hm_rel_road) +
                    "/" + std::to_string(hm_jun_int) + " month-hour distribution";
        }
        auto grid = stag::month_hour_histogram(*source);
        svg = stag::svg::render_heatmap(grid, title);
    } else {
        throw stag::DataError("render: --what must be 'rules' or 'heatmap'");
    }
    if (out_path.empty()) {
        std::cout << svg;
    } else {
        write_file(out_path, svg);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scenario-wise spatio-temporal attention guidance toolkit"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse crash CSV files into a normalized dataset");
    std::vector<std::string> ingest_inputs;
    std::string ingest_tables, ingest_config, ingest_out = "dataset.jsonl", ingest_report;
    ingest->add_option("--input,-i", ingest_inputs, "Accident CSV file(s)")->required();
    ingest->add_option("--tables", ingest_tables, "Code tables JSON (defaults built in)");
    ingest->add_option("--config,-c", ingest_config, "Pipeline config (tables path, column names)");
    ingest->add_option("--out,-o", ingest_out, "Output dataset path");
    ingest->add_option("--report", ingest_report, "Also write the ingest report here");

    // tables
    auto* tables_cmd = app.add_subcommand("tables", "Dump the built-in code tables as JSON");
    std::string tables_out;
    tables_cmd->add_option("--out,-o", tables_out, "Write to file instead of stdout");

    // decompose
    auto* decompose = app.add_subcommand("decompose", "Scenario decomposition summary");
    std::string dec_dataset, dec_out;
    decompose->add_option("--dataset,-d", dec_dataset, "Normalized dataset")->required();
    decompose->add_option("--out,-o", dec_out, "Write the JSON summary here");

    // split
    auto* split = app.add_subcommand("split", "Optimize the weekday/weekend split");
    std::string split_dataset, split_out;
    split->add_option("--dataset,-d", split_dataset, "Normalized dataset")->required();
    split->add_option("--out,-o", split_out, "Write the JSON result here");

    // group
    auto* group = app.add_subcommand("group", "Partition into spatially defined groups");
    std::string group_dataset, group_config, group_out;
    int64_t group_threshold = 100;
    group->add_option("--dataset,-d", group_dataset, "Normalized dataset")->required();
    group->add_option("--config,-c", group_config, "Pipeline config (for code tables)");
    group->add_option("--out,-o", group_out, "Write the CSV summary here");
    group->add_option("--threshold", group_threshold, "Size threshold (strict)");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "Two-step clustering of spatial groups");
    std::string cluster_dataset, cluster_config, cluster_out = ".";
    cluster->add_option("--dataset,-d", cluster_dataset, "Normalized dataset")->required();
    cluster->add_option("--config,-c", cluster_config, "Pipeline config");
    cluster->add_option("--out-dir,-o", cluster_out, "Directory for cluster artifacts");

    // mine
    auto* mine = app.add_subcommand("mine", "Mine and screen attention rules");
    std::string mine_dataset, mine_config, mine_out = "rules.json";
    mine->add_option("--dataset,-d", mine_dataset, "Normalized dataset")->required();
    mine->add_option("--config,-c", mine_config, "Pipeline config");
    mine->add_option("--out,-o", mine_out, "Rule database path");

    // query
    auto* query = app.add_subcommand("query", "Query the rule database for a driving context");
    std::string query_rules, query_time, query_format = "text";
    int q_func_sys = -1, q_rel_road = -1, q_jun_int = -1, q_reljct2 = -1, q_typ_int = -1;
    stag::SparseFlags q_flags;
    query->add_option("--rules,-r", query_rules, "Rule database")->required();
    query->add_option("--time,-t", query_time, "ISO timestamp, e.g. 2017-03-15T06:24")->required();
    query->add_option("--func-sys", q_func_sys, "Road functional system code");
    query->add_option("--rel-road", q_rel_road, "Relation to trafficway code");
    query->add_option("--jun-int", q_jun_int, "Merged junction/intersection code");
    query->add_option("--reljct2", q_reljct2, "Relation to junction code (alternative to --jun-int)");
    query->add_option("--typ-int", q_typ_int, "Intersection type code (with --reljct2)");
    query->add_flag("--sch-bus", q_flags.sch_bus, "School-bus-related scene");
    query->add_flag("--work-zone", q_flags.work_zone, "Work-zone scene");
    query->add_flag("--interchange", q_flags.within_interchange, "Within interchange area");
    query->add_flag("--crash-factor", q_flags.crash_factor, "Crash-level related factor present");
    query->add_flag("--bad-weather", q_flags.bad_weather, "Adverse atmospheric conditions");
    query->add_option("--format", query_format, "Output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));

    // analyze-scene
    auto* analyze = app.add_subcommand("analyze-scene", "Apply attention guidance to a scene frame");
    std::string an_rules, an_frame, an_config, an_out;
    analyze->add_option("--rules,-r", an_rules, "Rule database")->required();
    analyze->add_option("--frame,-f", an_frame, "Scene frame JSON")->required();
    analyze->add_option("--config,-c", an_config, "Pipeline config (for calibration)");
    analyze->add_option("--out,-o", an_out, "Write the annotated JSON here");

    // render
    auto* render = app.add_subcommand("render", "Render SVG charts");
    std::string r_what = "rules", r_rules, r_dataset, r_segment = "whole_week", r_kind = "fhe",
                r_out;
    int r_cluster = 1, r_type = 0;
    render->add_option("--what", r_what, "'rules' or 'heatmap'")
        ->check(CLI::IsMember({"rules", "heatmap"}));
    render->add_option("--rules,-r", r_rules, "Rule database (for --what rules)");
    render->add_option("--dataset,-d", r_dataset, "Normalized dataset (for --what heatmap)");
    render->add_option("--cluster", r_cluster, "Cluster id");
    render->add_option("--segment", r_segment, "whole_week, weekday or weekend");
    render->add_option("--kind", r_kind, "fhe or mc")->check(CLI::IsMember({"fhe", "mc"}));
    render->add_option("--type", r_type, "Consequent type code");
    int r_func_sys = -1, r_rel_road = -1, r_jun_int = -1;
    render->add_option("--func-sys", r_func_sys, "Heatmap: restrict to this group key");
    render->add_option("--rel-road", r_rel_road, "Heatmap: restrict to this group key");
    render->add_option("--jun-int", r_jun_int, "Heatmap: restrict to this group key");
    render->add_option("--out,-o", r_out, "Output SVG path");

    // run
    auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
    std::string run_config;
    run->add_option("--config,-c", run_config, "Pipeline config")->required();

    try {
        app.parse(argc, argv);

        if (*ingest) {
            return cmd_ingest(ingest_inputs, ingest_tables, ingest_config, ingest_out,
                              ingest_report);
        }
        if (*tables_cmd) {
            std::string text = stag::CodeTables::defaults().to_json().dump(2) + "\n";
            if (tables_out.empty()) {
                std::cout << text;
            } else {
                write_file(tables_out, text);
            }
            return 0;
        }
        if (*decompose) return cmd_decompose(dec_dataset, dec_out);
        if (*split) return cmd_split(split_dataset, split_out);
        if (*group) return cmd_group(group_dataset, group_config, group_out, group_threshold);
        if (*cluster) return cmd_cluster(cluster_dataset, cluster_config, cluster_out);
        if (*mine) return cmd_mine(mine_dataset, mine_config, mine_out);
        if (*query) {
            auto db = stag::load_rule_db(query_rules);
            auto ctx = context_from_flags(query_time, q_func_sys, q_rel_road, q_jun_int, q_reljct2,
                                          q_typ_int, q_flags);
            auto resp = stag::query(ctx, db);
            if (query_format == "json") {
                std::cout << response_to_json(resp).dump(2) << "\n";
            } else {
                print_response_text(resp);
            }
            return 0;
        }
        if (*analyze) return cmd_analyze_scene(an_rules, an_frame, an_config, an_out);
        if (*render) {
            return cmd_render(r_what, r_rules, r_dataset, r_cluster, r_segment, r_kind, r_type,
                              r_func_sys, r_rel_road, r_jun_int, r_out);
        }
        if (*run) {
            auto cfg = stag::load_pipeline_config(run_config);
            auto result = stag::run_pipeline(cfg);
            std::cout << "pipeline complete: " << result.records.size() << " records, "
                      << result.common.size() << " in the common scenario, "
                      << result.clusters.size() << " clusters\n";
            std::cout << "manifest: " << result.manifest_path << "\n";
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1; --help exits 0
    } catch (const stag::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const stag::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
