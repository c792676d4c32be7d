#pragma once

// Minimal TOML-subset reader for pipeline configuration files.
// Supported: comments, [table] and [[array-of-tables]] headers, bare or
// quoted keys, string/integer/float/boolean values, and single-line arrays.
// Dates, multi-line strings, dotted keys and inline tables are not.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "stag/common.hpp"

namespace stag::toml {

class Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

class Value {
public:
    Value() : v_(std::string{}) {}
    explicit Value(std::string s) : v_(std::move(s)) {}
    explicit Value(int64_t i) : v_(i) {}
    explicit Value(double d) : v_(d) {}
    explicit Value(bool b) : v_(b) {}
    explicit Value(Array a) : v_(std::move(a)) {}
    explicit Value(Table t) : v_(std::move(t)) {}

    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_int() const { return std::holds_alternative<int64_t>(v_); }
    bool is_double() const { return std::holds_alternative<double>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }
    bool is_table() const { return std::holds_alternative<Table>(v_); }

    const std::string& as_string() const { return expect<std::string>("string"); }
    int64_t as_int() const { return expect<int64_t>("integer"); }
    bool as_bool() const { return expect<bool>("boolean"); }
    const Array& as_array() const { return expect<Array>("array"); }
    const Table& as_table() const { return expect<Table>("table"); }
    Array& as_array() { return std::get<Array>(v_); }
    Table& as_table() { return std::get<Table>(v_); }

    // Integers widen to double; anything else is a type error.
    double as_double() const {
        if (is_int()) return double(std::get<int64_t>(v_));
        return expect<double>("float");
    }

private:
    template <typename T>
    const T& expect(const char* name) const {
        if (!std::holds_alternative<T>(v_)) {
            throw DataError(std::string("config value is not a ") + name);
        }
        return std::get<T>(v_);
    }

    std::variant<std::string, int64_t, double, bool, Array, Table> v_;
};

namespace detail {

inline void skip_ws(const std::string& s, size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

inline std::string parse_basic_string(const std::string& s, size_t& i, int line) {
    std::string out;
    ++i;  // opening quote
    while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\') {
            ++i;
            if (i >= s.size()) break;
            switch (s[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default:
                    throw DataError("config line " + std::to_string(line) +
                                    ": unsupported escape \\" + s[i]);
            }
            ++i;
        } else {
            out.push_back(s[i++]);
        }
    }
    if (i >= s.size()) throw DataError("config line " + std::to_string(line) + ": unterminated string");
    ++i;  // closing quote
    return out;
}

inline Value parse_value(const std::string& s, size_t& i, int line);

inline Value parse_array(const std::string& s, size_t& i, int line) {
    Array arr;
    ++i;  // '['
    skip_ws(s, i);
    while (i < s.size() && s[i] != ']') {
        arr.push_back(parse_value(s, i, line));
        skip_ws(s, i);
        if (i < s.size() && s[i] == ',') {
            ++i;
            skip_ws(s, i);
        }
    }
    if (i >= s.size()) throw DataError("config line " + std::to_string(line) + ": unterminated array");
    ++i;  // ']'
    return Value(std::move(arr));
}

inline Value parse_value(const std::string& s, size_t& i, int line) {
    skip_ws(s, i);
    if (i >= s.size()) throw DataError("config line " + std::to_string(line) + ": missing value");
    char c = s[i];
    if (c == '"') return Value(parse_basic_string(s, i, line));
    if (c == '[') return parse_array(s, i, line);
    size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != '#' && s[i] != ' ' && s[i] != '\t') ++i;
    std::string tok = s.substr(start, i - start);
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);
    bool is_float = tok.find_first_of(".eE") != std::string::npos &&
                    tok.find_first_not_of("+-0123456789.eE") == std::string::npos;
    try {
        if (is_float) {
            size_t used = 0;
            double d = std::stod(tok, &used);
            if (used == tok.size()) return Value(d);
        } else {
            size_t used = 0;
            int64_t v = std::stoll(tok, &used, 10);
            if (used == tok.size()) return Value(v);
        }
    } catch (const std::exception&) {
    }
    throw DataError("config line " + std::to_string(line) + ": cannot parse value '" + tok + "'");
}

inline std::vector<std::string> split_path(const std::string& s, int line) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '.') {
            if (cur.empty())
                throw DataError("config line " + std::to_string(line) + ": empty table-name part");
            parts.push_back(cur);
            cur.clear();
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
            cur.push_back(c);
        } else if (c != ' ' && c != '\t') {
            throw DataError("config line " + std::to_string(line) + ": bad table name character");
        }
    }
    if (cur.empty()) throw DataError("config line " + std::to_string(line) + ": empty table name");
    parts.push_back(cur);
    return parts;
}

}  // namespace detail

inline Table parse(const std::string& text) {
    Table root;
    Table* current = &root;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        size_t i = 0;
        detail::skip_ws(raw, i);
        if (i >= raw.size() || raw[i] == '#') continue;

        if (raw[i] == '[') {
            bool array_table = (i + 1 < raw.size() && raw[i + 1] == '[');
            size_t open = i + (array_table ? 2 : 1);
            size_t close = raw.find(array_table ? "]]" : "]", open);
            if (close == std::string::npos)
                throw DataError("config line " + std::to_string(line_no) + ": unterminated table header");
            auto path = detail::split_path(raw.substr(open, close - open), line_no);

            Table* t = &root;
            for (size_t p = 0; p < path.size(); ++p) {
                const std::string& part = path[p];
                bool last = (p + 1 == path.size());
                if (last && array_table) {
                    auto it = t->find(part);
                    if (it == t->end()) {
                        it = t->emplace(part, Value(Array{})).first;
                    }
                    if (!it->second.is_array())
                        throw DataError("config line " + std::to_string(line_no) + ": '" + part +
                                        "' is not an array of tables");
                    Array& stored = it->second.as_array();
                    stored.push_back(Value(Table{}));
                    t = &stored.back().as_table();
                } else {
                    auto it = t->find(part);
                    if (it == t->end()) it = t->emplace(part, Value(Table{})).first;
                    if (it->second.is_array()) {
                        Array& stored = it->second.as_array();
                        if (stored.empty() || !stored.back().is_table())
                            throw DataError("config line " + std::to_string(line_no) +
                                            ": cannot extend array '" + part + "'");
                        t = &stored.back().as_table();
                    } else if (it->second.is_table()) {
                        t = &it->second.as_table();
                    } else {
                        throw DataError("config line " + std::to_string(line_no) + ": '" + part +
                                        "' is not a table");
                    }
                }
            }
            current = t;
            continue;
        }

        // key = value
        std::string key;
        if (raw[i] == '"') {
            key = detail::parse_basic_string(raw, i, line_no);
        } else {
            size_t start = i;
            while (i < raw.size() &&
                   (std::isalnum(static_cast<unsigned char>(raw[i])) || raw[i] == '_' || raw[i] == '-'))
                ++i;
            key = raw.substr(start, i - start);
        }
        if (key.empty()) throw DataError("config line " + std::to_string(line_no) + ": expected key");
        detail::skip_ws(raw, i);
        if (i >= raw.size() || raw[i] != '=')
            throw DataError("config line " + std::to_string(line_no) + ": expected '=' after key");
        ++i;
        Value v = detail::parse_value(raw, i, line_no);
        detail::skip_ws(raw, i);
        if (i < raw.size() && raw[i] != '#')
            throw DataError("config line " + std::to_string(line_no) + ": trailing characters");
        if (current->count(key))
            throw DataError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        current->emplace(key, std::move(v));
    }
    return root;
}

inline Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// Lookup helpers. `find` walks dotted paths through nested tables and
// returns nullptr when any component is missing.
inline const Value* find(const Table& t, const std::string& dotted) {
    const Table* cur = &t;
    size_t pos = 0;
    while (true) {
        size_t dot = dotted.find('.', pos);
        std::string part = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        auto it = cur->find(part);
        if (it == cur->end()) return nullptr;
        if (dot == std::string::npos) return &it->second;
        if (!it->second.is_table()) return nullptr;
        cur = &it->second.as_table();
        pos = dot + 1;
    }
}

inline int64_t get_int(const Table& t, const std::string& path, int64_t fallback) {
    const Value* v = find(t, path);
    return v ? v->as_int() : fallback;
}

inline double get_double(const Table& t, const std::string& path, double fallback) {
    const Value* v = find(t, path);
    return v ? v->as_double() : fallback;
}

inline bool get_bool(const Table& t, const std::string& path, bool fallback) {
    const Value* v = find(t, path);
    return v ? v->as_bool() : fallback;
}

inline std::string get_string(const Table& t, const std::string& path, const std::string& fallback) {
    const Value* v = find(t, path);
    return v ? v->as_string() : fallback;
}

}  // namespace stag::toml
