#pragma once

// Normalized dataset persistence: line-delimited JSON with a schema-version
// header line and a trailing count line so truncation is detectable.

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stag/common.hpp"
#include "stag/record.hpp"

namespace stag {

inline constexpr int kDatasetVersion = 1;

namespace detail {

inline nlohmann::json opt_to_json(const std::optional<int>& v) {
    if (v) return *v;
    return nullptr;
}

inline std::optional<int> opt_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<int>();
}

}  // namespace detail

inline nlohmann::ordered_json record_to_json(const CrashRecord& r) {
    nlohmann::ordered_json j;
    j["case_id"] = r.case_id;
    j["year"] = r.year;
    j["month"] = r.month;
    j["day_of_week"] = to_string(r.day_of_week);
    j["hour"] = detail::opt_to_json(r.hour);
    j["func_sys"] = detail::opt_to_json(r.func_sys);
    j["rel_road"] = detail::opt_to_json(r.rel_road);
    j["reljct2"] = detail::opt_to_json(r.reljct2);
    j["typ_int"] = detail::opt_to_json(r.typ_int);
    j["jun_int"] = detail::opt_to_json(r.jun_int);
    j["light_cond"] = detail::opt_to_json(r.light_cond);
    j["weather"] = detail::opt_to_json(r.weather);
    j["sch_bus"] = r.sch_bus;
    j["work_zone"] = r.work_zone;
    j["within_interchange"] = r.within_interchange;
    j["crash_factor"] = r.crash_factor;
    j["bad_weather"] = r.bad_weather;
    j["fhe"] = detail::opt_to_json(r.fhe);
    j["mc"] = detail::opt_to_json(r.mc);
    return j;
}

inline CrashRecord record_from_json(const nlohmann::json& j) {
    CrashRecord r;
    r.case_id = j.at("case_id").get<std::string>();
    r.year = j.at("year").get<int>();
    r.month = j.at("month").get<int>();
    auto d = day_of_week_from_string(j.at("day_of_week").get<std::string>());
    if (!d) throw DataError("dataset record: bad day_of_week");
    r.day_of_week = *d;
    r.hour = detail::opt_from_json(j.at("hour"));
    r.func_sys = detail::opt_from_json(j.at("func_sys"));
    r.rel_road = detail::opt_from_json(j.at("rel_road"));
    r.reljct2 = detail::opt_from_json(j.at("reljct2"));
    r.typ_int = detail::opt_from_json(j.at("typ_int"));
    r.jun_int = detail::opt_from_json(j.at("jun_int"));
    r.light_cond = detail::opt_from_json(j.at("light_cond"));
    r.weather = detail::opt_from_json(j.at("weather"));
    r.sch_bus = j.at("sch_bus").get<bool>();
    r.work_zone = j.at("work_zone").get<bool>();
    r.within_interchange = j.at("within_interchange").get<bool>();
    r.crash_factor = j.at("crash_factor").get<bool>();
    r.bad_weather = j.at("bad_weather").get<bool>();
    r.fhe = detail::opt_from_json(j.at("fhe"));
    r.mc = detail::opt_from_json(j.at("mc"));
    return r;
}

inline void write_dataset(const std::vector<CrashRecord>& records, std::ostream& out) {
    nlohmann::ordered_json header = {{"schema", "dataset"}, {"version", kDatasetVersion}};
    out << header.dump() << '\n';
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    nlohmann::ordered_json footer = {{"count", records.size()}};
    out << footer.dump() << '\n';
    if (!out) throw IoError("dataset write failed");
}

inline void write_dataset(const std::vector<CrashRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open dataset file for writing: " + path);
    write_dataset(records, out);
}

inline std::vector<CrashRecord> load_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset: empty file (missing header)");
    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("schema", "") != "dataset") {
        throw DataError("dataset: missing or invalid header line");
    }
    if (header.value("version", -1) != kDatasetVersion) {
        throw DataError("dataset: unsupported version " + std::to_string(header.value("version", -1)));
    }
    std::vector<CrashRecord> records;
    bool saw_footer = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError("dataset: malformed JSON line");
        if (j.contains("count")) {
            if (j.at("count").get<size_t>() != records.size()) {
                throw DataError("dataset: record count mismatch (truncated or corrupted file)");
            }
            saw_footer = true;
            break;
        }
        records.push_back(record_from_json(j));
    }
    if (!saw_footer) throw DataError("dataset: missing trailing count line (truncated file)");
    return records;
}

inline std::vector<CrashRecord> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset file: " + path);
    return load_dataset(in);
}

}  // namespace stag
