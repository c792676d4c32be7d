#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stag/codes.hpp"
#include "stag/csv.hpp"
#include "stag/record.hpp"

namespace stag {

// Maps record fields to CSV column names. Defaults follow the FARS
// accident-file naming.
struct ColumnMapping {
    std::string case_id = "ST_CASE";  // optional column
    std::string year = "YEAR";        // optional column
    std::string month = "MONTH";
    std::string day_week = "DAY_WEEK";
    std::string hour = "HOUR";
    std::string func_sys = "FUNC_SYS";
    std::string rel_road = "REL_ROAD";
    std::string reljct2 = "RELJCT2";
    std::string typ_int = "TYP_INT";
    std::string light_cond = "LGT_COND";
    std::string weather = "WEATHER";
    std::string work_zone = "WRK_ZONE";
    std::string sch_bus = "SCH_BUS";
    std::string within_interchange = "RELJCT1";
    std::string fhe = "HARM_EV";
    std::string mc = "MAN_COLL";
    std::vector<std::string> crash_factors = {"CF1", "CF2", "CF3"};  // optional columns
};

struct IngestReport {
    int64_t rows_read = 0;
    int64_t records_retained = 0;
    int64_t rows_dropped = 0;
    std::map<std::string, int64_t> drop_reasons;

    void drop(const std::string& reason) {
        ++rows_dropped;
        ++drop_reasons[reason];
    }
};

struct IngestResult {
    std::vector<CrashRecord> records;
    IngestReport report;
};

namespace detail {

// Column indices resolved against the header row; -1 = column absent.
struct ColumnIndex {
    int case_id = -1, year = -1, month = -1, day_week = -1, hour = -1;
    int func_sys = -1, rel_road = -1, reljct2 = -1, typ_int = -1;
    int light_cond = -1, weather = -1, work_zone = -1, sch_bus = -1;
    int within_interchange = -1, fhe = -1, mc = -1;
    std::vector<int> crash_factors;
};

inline std::optional<int64_t> parse_int(const std::string& s) {
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = (s[0] == '-');
        i = 1;
        if (i == s.size()) return std::nullopt;
    }
    int64_t v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
        v = v * 10 + (s[i] - '0');
        if (v > 100000000) return std::nullopt;
    }
    return neg ? -v : v;
}

inline ColumnIndex resolve_columns(const std::vector<std::string>& header, const ColumnMapping& m) {
    auto find = [&](const std::string& name) -> int {
        for (size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return int(i);
        }
        return -1;
    };
    auto require = [&](const std::string& name) -> int {
        int idx = find(name);
        if (idx < 0) throw DataError("missing mandatory column: " + name);
        return idx;
    };
    ColumnIndex ix;
    ix.case_id = find(m.case_id);
    ix.year = find(m.year);
    ix.month = require(m.month);
    ix.day_week = require(m.day_week);
    ix.hour = require(m.hour);
    ix.func_sys = require(m.func_sys);
    ix.rel_road = require(m.rel_road);
    ix.reljct2 = require(m.reljct2);
    ix.typ_int = require(m.typ_int);
    ix.light_cond = require(m.light_cond);
    ix.weather = require(m.weather);
    ix.work_zone = require(m.work_zone);
    ix.sch_bus = require(m.sch_bus);
    ix.within_interchange = require(m.within_interchange);
    ix.fhe = require(m.fhe);
    ix.mc = require(m.mc);
    for (const auto& cf : m.crash_factors) {
        int idx = find(cf);
        if (idx >= 0) ix.crash_factors.push_back(idx);
    }
    return ix;
}

}  // namespace detail

// Parses one accident CSV. Malformed rows are dropped and counted in the
// report; a missing mandatory column aborts the whole file. Retained-row
// order follows input order.
inline IngestResult parse_crash_csv(std::istream& in, const CodeTables& tables,
                                    const ColumnMapping& mapping = {}) {
    IngestResult result;
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) throw DataError("input CSV has no header row");
    const detail::ColumnIndex ix = detail::resolve_columns(row, mapping);
    IngestReport& rep = result.report;

    int64_t row_no = 1;
    while (reader.next(row)) {
        ++row_no;
        // CSV writers commonly end the file with a bare newline.
        if (row.size() == 1 && row[0].empty()) continue;
        ++rep.rows_read;

        auto cell = [&](int idx) -> const std::string& {
            static const std::string empty;
            return (idx >= 0 && size_t(idx) < row.size()) ? row[idx] : empty;
        };
        auto int_cell = [&](int idx) { return detail::parse_int(cell(idx)); };

        CrashRecord r;
        auto month = int_cell(ix.month);
        if (!month || *month < 1 || *month > 12) {
            rep.drop("invalid month");
            continue;
        }
        r.month = int(*month);

        auto dw = int_cell(ix.day_week);
        auto day_it = dw ? tables.day_week.find(int(*dw)) : tables.day_week.end();
        if (day_it == tables.day_week.end()) {
            rep.drop("unknown day of week");
            continue;
        }
        r.day_of_week = day_it->second;

        auto hour = int_cell(ix.hour);
        if (!hour) {
            rep.drop("malformed hour");
            continue;
        }
        if (tables.hour_unknown.count(int(*hour))) {
            r.hour = std::nullopt;
        } else if (*hour >= 0 && *hour <= 23) {
            r.hour = int(*hour);
        } else {
            rep.drop("hour out of range");
            continue;
        }

        // Coded variables: declared unknown codes and codes absent from the
        // table both normalize to Unknown; non-numeric cells drop the row.
        bool bad_row = false;
        auto code_field = [&](int idx, const CodeDomain& dom,
                              const char* what) -> std::optional<int> {
            auto raw = int_cell(idx);
            if (!raw) {
                rep.drop(std::string("malformed ") + what);
                bad_row = true;
                return std::nullopt;
            }
            int code = int(*raw);
            if (dom.is_unknown(code) || !dom.labels.count(code)) return std::nullopt;
            return code;
        };

        r.func_sys = code_field(ix.func_sys, tables.func_sys, "func_sys");
        if (bad_row) continue;
        r.rel_road = code_field(ix.rel_road, tables.rel_road, "rel_road");
        if (bad_row) continue;
        r.reljct2 = code_field(ix.reljct2, tables.reljct2, "reljct2");
        if (bad_row) continue;
        r.typ_int = code_field(ix.typ_int, tables.typ_int, "typ_int");
        if (bad_row) continue;
        r.light_cond = code_field(ix.light_cond, tables.light_cond, "light_cond");
        if (bad_row) continue;

        auto weather = int_cell(ix.weather);
        if (!weather) {
            rep.drop("malformed weather");
            continue;
        }
        r.weather = tables.weather.is_unknown(int(*weather)) || !tables.weather.labels.count(int(*weather))
                        ? std::nullopt
                        : std::optional<int>(int(*weather));
        r.bad_weather = tables.bad_weather_codes.count(int(*weather)) > 0;

        r.jun_int = derive_jun_int(r.reljct2, r.typ_int, tables);

        auto flag_field = [&](int idx, const std::set<int>& truthy, const char* what) {
            auto raw = int_cell(idx);
            if (!raw) {
                rep.drop(std::string("malformed ") + what);
                bad_row = true;
                return false;
            }
            return truthy.count(int(*raw)) > 0;
        };
        r.work_zone = flag_field(ix.work_zone, tables.work_zone_codes, "work_zone");
        if (bad_row) continue;
        r.sch_bus = flag_field(ix.sch_bus, tables.sch_bus_codes, "sch_bus");
        if (bad_row) continue;
        r.within_interchange =
            flag_field(ix.within_interchange, tables.within_interchange_codes, "within_interchange");
        if (bad_row) continue;

        r.crash_factor = false;
        for (int cf_idx : ix.crash_factors) {
            auto raw = int_cell(cf_idx);
            if (raw && tables.crash_factor_codes.count(int(*raw))) {
                r.crash_factor = true;
                break;
            }
        }

        auto fhe = int_cell(ix.fhe);
        if (!fhe) {
            rep.drop("malformed fhe");
            continue;
        }
        r.fhe = tables.fhe.is_unknown(int(*fhe)) ? std::nullopt : std::optional<int>(int(*fhe));

        // Manner of collision is defined only for motor-vehicle-in-transport
        // crashes; elsewhere it is structurally not applicable.
        if (r.fhe && *r.fhe == tables.mvit_fhe) {
            auto mc = int_cell(ix.mc);
            if (!mc) {
                rep.drop("malformed mc");
                continue;
            }
            r.mc = int(*mc);
        } else {
            r.mc = std::nullopt;
        }

        r.case_id = ix.case_id >= 0 ? cell(ix.case_id) : std::string();
        if (r.case_id.empty()) r.case_id = "row-" + std::to_string(row_no);
        if (auto y = int_cell(ix.year)) r.year = int(*y);

        result.records.push_back(std::move(r));
        ++rep.records_retained;
    }
    return result;
}

}  // namespace stag
