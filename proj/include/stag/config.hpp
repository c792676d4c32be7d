#pragma once

// Pipeline configuration: one TOML-style document with per-stage sections.
// Every screening threshold, the clustering stop criterion, the step-2
// merge plan and the scene calibration are surfaced here.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stag/clustering.hpp"
#include "stag/codes.hpp"
#include "stag/ingest.hpp"
#include "stag/mining.hpp"
#include "stag/scene.hpp"
#include "stag/toml.hpp"

namespace stag {

struct PipelineConfig {
    std::vector<std::string> accident_csv;
    std::string code_tables_path;  // empty = built-in defaults
    std::string output_dir = "out";
    ColumnMapping columns;

    int64_t size_threshold = 100;

    StopCriterion stop;
    MergePlan merge_plan;
    int residual_id = 0;  // 0 = assign automatically after step 1

    double day_policy_i_threshold = 0.7;
    double day_policy_r_threshold = 0.5;

    ScreeningCriteria criteria;
    Calibration calibration;

    std::string raw_text;  // exact bytes the config was parsed from

    CodeTables load_tables() const {
        if (code_tables_path.empty()) return CodeTables::defaults();
        std::ifstream in(code_tables_path, std::ios::binary);
        if (!in) throw IoError("cannot open code tables: " + code_tables_path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw DataError("code tables: invalid JSON: " + code_tables_path);
        return CodeTables::from_json(j);
    }
};

namespace detail {

inline std::set<int> int_set(const toml::Value& v) {
    std::set<int> out;
    for (const auto& e : v.as_array()) out.insert(int(e.as_int()));
    return out;
}

}  // namespace detail

inline PipelineConfig parse_pipeline_config(const std::string& text) {
    toml::Table t = toml::parse(text);
    PipelineConfig cfg;
    cfg.raw_text = text;

    if (const toml::Value* v = toml::find(t, "input.accident_csv")) {
        if (v->is_string()) {
            cfg.accident_csv.push_back(v->as_string());
        } else {
            for (const auto& e : v->as_array()) cfg.accident_csv.push_back(e.as_string());
        }
    }
    cfg.code_tables_path = toml::get_string(t, "input.code_tables", "");
    cfg.output_dir = toml::get_string(t, "output.dir", "out");

    // [ingest.columns]: CSV column-name overrides, keyed by record field
    if (const toml::Value* cols = toml::find(t, "ingest.columns")) {
        ColumnMapping& m = cfg.columns;
        std::map<std::string, std::string*> fields = {
            {"case_id", &m.case_id},       {"year", &m.year},
            {"month", &m.month},           {"day_week", &m.day_week},
            {"hour", &m.hour},             {"func_sys", &m.func_sys},
            {"rel_road", &m.rel_road},     {"reljct2", &m.reljct2},
            {"typ_int", &m.typ_int},       {"light_cond", &m.light_cond},
            {"weather", &m.weather},       {"work_zone", &m.work_zone},
            {"sch_bus", &m.sch_bus},       {"within_interchange", &m.within_interchange},
            {"fhe", &m.fhe},               {"mc", &m.mc}};
        for (const auto& [key, value] : cols->as_table()) {
            if (key == "crash_factors") {
                m.crash_factors.clear();
                for (const auto& v : value.as_array()) m.crash_factors.push_back(v.as_string());
                continue;
            }
            auto it = fields.find(key);
            if (it == fields.end()) throw DataError("ingest.columns: unknown field '" + key + "'");
            *it->second = value.as_string();
        }
    }

    cfg.size_threshold = toml::get_int(t, "grouping.size_threshold", 100);
    if (cfg.size_threshold < 0) throw DataError("grouping.size_threshold must be non-negative");

    cfg.stop.min_similarity = std::nullopt;
    cfg.stop.target_count = std::nullopt;
    if (const toml::Value* v = toml::find(t, "clustering.min_similarity")) {
        cfg.stop.min_similarity = v->as_double();
        if (*cfg.stop.min_similarity < -1.0 || *cfg.stop.min_similarity > 1.0) {
            throw DataError("clustering.min_similarity must lie in [-1, 1]");
        }
    }
    if (const toml::Value* v = toml::find(t, "clustering.target_count")) {
        cfg.stop.target_count = int(v->as_int());
        if (*cfg.stop.target_count < 1) throw DataError("clustering.target_count must be positive");
    }
    if (!cfg.stop.min_similarity && !cfg.stop.target_count) {
        cfg.stop.min_similarity = 0.55;
    }
    cfg.residual_id = int(toml::get_int(t, "clustering.residual_id", 0));

    if (const toml::Value* merges = toml::find(t, "clustering.merge")) {
        for (const auto& mv : merges->as_array()) {
            const toml::Table& mt = mv.as_table();
            MergeDirective d;
            if (const toml::Value* v = toml::find(mt, "func_sys")) d.func_sys = detail::int_set(*v);
            if (const toml::Value* v = toml::find(mt, "rel_road")) d.rel_road = detail::int_set(*v);
            if (const toml::Value* v = toml::find(mt, "jun_int")) d.jun_int = detail::int_set(*v);
            const toml::Value* target = toml::find(mt, "target");
            if (!target) throw DataError("clustering.merge directive needs a target cluster id");
            d.target = int(target->as_int());
            cfg.merge_plan.directives.push_back(std::move(d));
        }
    }

    cfg.day_policy_i_threshold = toml::get_double(t, "day_policy.i_threshold", 0.7);
    cfg.day_policy_r_threshold = toml::get_double(t, "day_policy.r_threshold", 0.5);

    cfg.criteria.min_support_time =
        toml::get_double(t, "screening.min_support_time", 1.0 / double(kGridSpots));
    cfg.criteria.min_support_type = toml::get_double(t, "screening.min_support_type", 0.05);
    cfg.criteria.min_lift = toml::get_double(t, "screening.min_lift", 1.0);
    if (cfg.criteria.min_support_time < 0 || cfg.criteria.min_support_time > 1 ||
        cfg.criteria.min_support_type < 0 || cfg.criteria.min_support_type > 1 ||
        cfg.criteria.min_lift < 0) {
        throw DataError("screening criteria out of legal range");
    }

    Calibration& c = cfg.calibration;
    c.focal_inches = toml::get_double(t, "scene.focal_inches", c.focal_inches);
    c.pixel_scale = toml::get_double(t, "scene.pixel_scale", c.pixel_scale);
    c.van_height_ft = toml::get_double(t, "scene.van_height_ft", c.van_height_ft);
    c.suv_height_ft = toml::get_double(t, "scene.suv_height_ft", c.suv_height_ft);
    c.car_height_ft = toml::get_double(t, "scene.car_height_ft", c.car_height_ft);
    c.pedestrian_height_ft = toml::get_double(t, "scene.pedestrian_height_ft", c.pedestrian_height_ft);
    c.risk_distance_ft = toml::get_double(t, "scene.risk_distance_ft", c.risk_distance_ft);
    if (c.focal_inches <= 0 || c.pixel_scale <= 0 || c.van_height_ft <= 0 || c.suv_height_ft <= 0 ||
        c.car_height_ft <= 0 || c.pedestrian_height_ft <= 0 || c.risk_distance_ft <= 0) {
        throw DataError("scene calibration values must be positive");
    }
    if (const toml::Value* v = toml::find(t, "scene.roi_cells")) {
        c.roi_cells.clear();
        for (const auto& cell : v->as_array()) {
            const auto& pair = cell.as_array();
            if (pair.size() != 2) throw DataError("scene.roi_cells entries must be [row, col]");
            int row = int(pair[0].as_int()), col = int(pair[1].as_int());
            if (row < 0 || row > 3 || col < 0 || col > 3) {
                throw DataError("scene.roi_cells indices must lie in 0..3");
            }
            c.roi_cells.insert({row, col});
        }
    }
    return cfg;
}

// Load + validate: referenced files must exist.
inline PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    PipelineConfig cfg = parse_pipeline_config(ss.str());
    for (const auto& csv : cfg.accident_csv) {
        if (!std::filesystem::exists(csv)) throw DataError("input CSV does not exist: " + csv);
    }
    if (!cfg.code_tables_path.empty() && !std::filesystem::exists(cfg.code_tables_path)) {
        throw DataError("code tables file does not exist: " + cfg.code_tables_path);
    }
    return cfg;
}

}  // namespace stag
