#pragma once

// Declarative code tables for crash-report variables. The mappings are
// data, not logic: which raw codes mean "unknown", which weather codes
// count as adverse, which junction codes form the intersection branch of
// the merged JUN_INT variable, and the closed FHE/MC taxonomies used as
// rule consequents. Defaults follow the FARS accident-file coding for
// 2013-2017; every set here can be overridden from a JSON file.

#include <map>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "stag/common.hpp"

namespace stag {

struct CodeDomain {
    std::map<int, std::string> labels;
    std::set<int> unknown;  // raw codes normalized to Unknown

    bool is_unknown(int code) const { return unknown.count(code) > 0; }
    std::string label(int code) const {
        auto it = labels.find(code);
        if (it != labels.end()) return it->second;
        if (is_unknown(code)) return "Unknown";
        return "Code " + std::to_string(code);
    }
};

// JUN_INT numbering: non-intersection RELJCT2 codes pass through untouched;
// intersection types are offset into their own range so the two sets of
// codes cannot collide; 199 marks an intersection of unreported type.
inline constexpr int kJunIntIntersectionBase = 100;
inline constexpr int kJunIntIntersectionUnspecified = 199;

struct CodeTables {
    CodeDomain func_sys;
    CodeDomain rel_road;
    CodeDomain reljct2;
    CodeDomain typ_int;
    CodeDomain light_cond;
    CodeDomain weather;
    CodeDomain fhe;  // first harmful event taxonomy
    CodeDomain mc;   // manner-of-collision taxonomy

    std::map<int, DayOfWeek> day_week;        // raw DAY_WEEK code -> day
    std::set<int> hour_unknown{99};           // raw HOUR codes meaning unknown
    std::set<int> intersection_reljct2;       // RELJCT2 codes replaced by JUN_INT
    std::set<int> specific_intersection_typ;  // TYP_INT codes usable as JUN_INT
    std::set<int> work_zone_codes;            // WRK_ZONE codes meaning "in a work zone"
    std::set<int> sch_bus_codes;              // SCH_BUS codes meaning "school bus related"
    std::set<int> within_interchange_codes;   // RELJCT1 codes meaning "within interchange"
    std::set<int> bad_weather_codes;          // WEATHER codes counted as adverse
    std::set<int> crash_factor_codes;         // CF1-CF3 codes meaning "factor present"
    int mvit_fhe = 12;                        // FHE code for Motor Vehicle in Transport

    static CodeTables defaults();
    static CodeTables from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    std::string jun_int_label(int code) const {
        if (code == kJunIntIntersectionUnspecified) return "Intersection (type unspecified)";
        if (code >= kJunIntIntersectionBase) return typ_int.label(code - kJunIntIntersectionBase);
        return reljct2.label(code);
    }
};

// Merges the intersection-type variable into the relation-to-junction
// variable: for "Intersection or related" junction codes the result is the
// specific intersection type (offset into its own code range); everything
// else echoes the junction code. Total and pure.
inline std::optional<int> derive_jun_int(std::optional<int> reljct2, std::optional<int> typ_int,
                                         const CodeTables& t) {
    if (!reljct2) return std::nullopt;
    if (!t.intersection_reljct2.count(*reljct2)) return reljct2;
    if (typ_int && t.specific_intersection_typ.count(*typ_int)) {
        return kJunIntIntersectionBase + *typ_int;
    }
    return kJunIntIntersectionUnspecified;
}

inline CodeTables CodeTables::defaults() {
    CodeTables t;

    t.func_sys.labels = {{1, "Interstate"},
                         {2, "Principal Arterial - Other Freeways and Expressways"},
                         {3, "Principal Arterial - Other"},
                         {4, "Minor Arterial"},
                         {5, "Major Collector"},
                         {6, "Minor Collector"},
                         {7, "Local"}};
    t.func_sys.unknown = {96, 98, 99};

    t.rel_road.labels = {{1, "On Roadway"},
                         {2, "On Shoulder"},
                         {3, "On Median"},
                         {4, "On Roadside"},
                         {5, "Outside Trafficway"},
                         {6, "Off Roadway - Location Unknown"},
                         {7, "In Parking Lane/Zone"},
                         {8, "Gore"},
                         {10, "Separator"},
                         {11, "Continuous Left-Turn Lane"}};
    t.rel_road.unknown = {98, 99};

    t.reljct2.labels = {{1, "Non-Junction"},
                        {2, "Intersection"},
                        {3, "Intersection-Related"},
                        {4, "Driveway Access"},
                        {5, "Entrance/Exit Ramp Related"},
                        {6, "Railway Grade Crossing"},
                        {7, "Crossover Related"},
                        {8, "Driveway Access Related"},
                        {16, "Shared-Use Path Crossing"},
                        {17, "Acceleration/Deceleration Lane"},
                        {18, "Through Roadway"},
                        {19, "Other Location Within Interchange Area"},
                        {20, "Entrance/Exit Ramp"}};
    t.reljct2.unknown = {98, 99};
    t.intersection_reljct2 = {2, 3};

    t.typ_int.labels = {{1, "Not an Intersection"},
                        {2, "Four-Way Intersection"},
                        {3, "T-Intersection"},
                        {4, "Y-Intersection"},
                        {5, "Traffic Circle"},
                        {6, "Roundabout"},
                        {7, "Five-Point, or More"},
                        {10, "L-Intersection"},
                        {11, "Other Intersection Type"}};
    t.typ_int.unknown = {98, 99};
    t.specific_intersection_typ = {2, 3, 4, 5, 6, 7, 10, 11};

    t.light_cond.labels = {{1, "Daylight"},        {2, "Dark - Not Lighted"},
                           {3, "Dark - Lighted"},  {4, "Dawn"},
                           {5, "Dusk"},            {6, "Dark - Unknown Lighting"},
                           {7, "Other"}};
    t.light_cond.unknown = {8, 9, 98, 99};

    t.weather.labels = {{0, "No Additional Atmospheric Conditions"},
                        {1, "Clear"},
                        {2, "Rain"},
                        {3, "Sleet or Hail"},
                        {4, "Snow"},
                        {5, "Fog, Smog, Smoke"},
                        {6, "Severe Crosswinds"},
                        {7, "Blowing Sand, Soil, Dirt"},
                        {8, "Other"},
                        {10, "Cloudy"},
                        {11, "Blowing Snow"},
                        {12, "Freezing Rain or Drizzle"}};
    t.weather.unknown = {98, 99};
    // Adverse-weather flag: precipitation, visibility and wind conditions.
    // Clear, cloudy, "no additional conditions" and "other" do not count.
    t.bad_weather_codes = {2, 3, 4, 5, 6, 7, 11, 12};

    t.fhe.labels = {{1, "Rollover/Overturn"},
                    {2, "Fire/Explosion"},
                    {3, "Immersion"},
                    {4, "Gas Inhalation"},
                    {5, "Fell/Jumped from Vehicle"},
                    {6, "Injured in Vehicle"},
                    {7, "Other Non-Collision"},
                    {8, "Pedestrian"},
                    {9, "Pedalcyclist"},
                    {10, "Railway Vehicle"},
                    {11, "Live Animal"},
                    {12, "Motor Vehicle in Transport"},
                    {14, "Parked Motor Vehicle"},
                    {15, "Non-Motorist on Personal Conveyance"},
                    {16, "Thrown or Falling Object"},
                    {17, "Boulder"},
                    {18, "Other Object (Not Fixed)"},
                    {19, "Building"},
                    {20, "Impact Attenuator/Crash Cushion"},
                    {21, "Bridge Pier or Support"},
                    {23, "Bridge Rail"},
                    {24, "Guardrail Face"},
                    {25, "Concrete Traffic Barrier"},
                    {26, "Other Traffic Barrier"},
                    {30, "Utility Pole/Light Support"},
                    {31, "Post, Pole or Other Supports"},
                    {32, "Culvert"},
                    {33, "Curb"},
                    {34, "Ditch"},
                    {35, "Embankment"},
                    {38, "Fence"},
                    {39, "Wall"},
                    {40, "Fire Hydrant"},
                    {41, "Shrubbery"},
                    {42, "Tree (Standing Only)"},
                    {43, "Other Fixed Object"},
                    {44, "Pavement Surface Irregularity"},
                    {45, "Working Motor Vehicle"},
                    {46, "Traffic Signal Support"},
                    {48, "Snow Bank"},
                    {49, "Ridden Animal or Animal-Drawn Conveyance"},
                    {50, "Bridge Overhead Structure"},
                    {51, "Jackknife"},
                    {52, "Motor Vehicle in Motion Outside Trafficway"},
                    {53, "Object Fell from Motor Vehicle in Transport"},
                    {54, "Guardrail End"},
                    {55, "Mail Box"},
                    {57, "Cable Barrier"},
                    {58, "Ground"},
                    {59, "Traffic Sign Support"},
                    {72, "Cargo/Equipment Loss or Shift"},
                    {73, "Object Fell from Motor Vehicle in Transport"},
                    {74, "Road Vehicle on Rails"},
                    {91, "Unknown Object Not Fixed"},
                    {93, "Unknown Fixed Object"}};
    t.fhe.unknown = {98, 99};
    t.mvit_fhe = 12;

    t.mc.labels = {{1, "Front-to-Rear"},
                   {2, "Front-to-Front"},
                   {6, "Angle"},
                   {7, "Sideswipe - Same Direction"},
                   {8, "Sideswipe - Opposite Direction"},
                   {9, "Rear-to-Side"},
                   {10, "Rear-to-Rear"},
                   {11, "Other"}};
    t.mc.unknown = {0, 98, 99};

    // DAY_WEEK: 1 = Sunday ... 7 = Saturday
    t.day_week = {{1, DayOfWeek::Su}, {2, DayOfWeek::Mo}, {3, DayOfWeek::Tu},
                  {4, DayOfWeek::We}, {5, DayOfWeek::Th}, {6, DayOfWeek::Fr},
                  {7, DayOfWeek::Sa}};

    t.hour_unknown = {99};
    t.work_zone_codes = {1, 2, 3, 4};
    t.sch_bus_codes = {1};
    t.within_interchange_codes = {1};
    // Related factor present: any coded crash-level factor except
    // 0 (none) and 99 (unknown).
    for (int c = 1; c <= 98; ++c) t.crash_factor_codes.insert(c);
    return t;
}

namespace detail {

inline nlohmann::json domain_to_json(const CodeDomain& d) {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [code, label] : d.labels) labels[std::to_string(code)] = label;
    return {{"labels", labels}, {"unknown", d.unknown}};
}

inline CodeDomain domain_from_json(const nlohmann::json& j) {
    CodeDomain d;
    for (auto it = j.at("labels").begin(); it != j.at("labels").end(); ++it) {
        d.labels[std::stoi(it.key())] = it.value().get<std::string>();
    }
    for (int c : j.at("unknown")) d.unknown.insert(c);
    return d;
}

}  // namespace detail

inline nlohmann::json CodeTables::to_json() const {
    nlohmann::json day = nlohmann::json::object();
    for (const auto& [code, d] : day_week) day[std::to_string(code)] = to_string(d);
    return {{"schema", "code_tables"},
            {"version", 1},
            {"func_sys", detail::domain_to_json(func_sys)},
            {"rel_road", detail::domain_to_json(rel_road)},
            {"reljct2", detail::domain_to_json(reljct2)},
            {"typ_int", detail::domain_to_json(typ_int)},
            {"light_cond", detail::domain_to_json(light_cond)},
            {"weather", detail::domain_to_json(weather)},
            {"fhe", detail::domain_to_json(fhe)},
            {"mc", detail::domain_to_json(mc)},
            {"day_week", day},
            {"hour_unknown", hour_unknown},
            {"intersection_reljct2", intersection_reljct2},
            {"specific_intersection_typ", specific_intersection_typ},
            {"work_zone_codes", work_zone_codes},
            {"sch_bus_codes", sch_bus_codes},
            {"within_interchange_codes", within_interchange_codes},
            {"bad_weather_codes", bad_weather_codes},
            {"crash_factor_codes", crash_factor_codes},
            {"mvit_fhe", mvit_fhe}};
}

inline CodeTables CodeTables::from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "code_tables" || j.value("version", 0) != 1) {
        throw DataError("code tables file: unrecognized schema/version");
    }
    CodeTables t;
    t.func_sys = detail::domain_from_json(j.at("func_sys"));
    t.rel_road = detail::domain_from_json(j.at("rel_road"));
    t.reljct2 = detail::domain_from_json(j.at("reljct2"));
    t.typ_int = detail::domain_from_json(j.at("typ_int"));
    t.light_cond = detail::domain_from_json(j.at("light_cond"));
    t.weather = detail::domain_from_json(j.at("weather"));
    t.fhe = detail::domain_from_json(j.at("fhe"));
    t.mc = detail::domain_from_json(j.at("mc"));
    for (auto it = j.at("day_week").begin(); it != j.at("day_week").end(); ++it) {
        auto d = day_of_week_from_string(it.value().get<std::string>());
        if (!d) throw DataError("code tables: bad day_week entry '" + it.value().get<std::string>() + "'");
        t.day_week[std::stoi(it.key())] = *d;
    }
    auto read_set = [&](const char* key, std::set<int>& out) {
        out.clear();
        for (int c : j.at(key)) out.insert(c);
    };
    read_set("hour_unknown", t.hour_unknown);
    read_set("intersection_reljct2", t.intersection_reljct2);
    read_set("specific_intersection_typ", t.specific_intersection_typ);
    read_set("work_zone_codes", t.work_zone_codes);
    read_set("sch_bus_codes", t.sch_bus_codes);
    read_set("within_interchange_codes", t.within_interchange_codes);
    read_set("bad_weather_codes", t.bad_weather_codes);
    read_set("crash_factor_codes", t.crash_factor_codes);
    t.mvit_fhe = j.at("mvit_fhe").get<int>();
    return t;
}

}  // namespace stag
