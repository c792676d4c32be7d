#pragma once

// Streaming CSV reader: quoted fields, escaped quotes, embedded commas and
// newlines, CRLF line endings. Enough for government data exports.

#include <istream>
#include <string>
#include <vector>

namespace stag {

class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record into `fields`; returns false at end of input.
    bool next(std::vector<std::string>& fields) {
        fields.clear();
        int c = in_.get();
        if (c == std::char_traits<char>::eof()) return false;
        std::string field;
        bool quoted = false;
        while (true) {
            if (c == std::char_traits<char>::eof()) {
                fields.push_back(std::move(field));
                return true;
            }
            char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    int peek = in_.peek();
                    if (peek == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(ch);
                }
            } else if (ch == '"' && field.empty()) {
                quoted = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\n') {
                fields.push_back(std::move(field));
                return true;
            } else if (ch == '\r') {
                if (in_.peek() == '\n') in_.get();
                fields.push_back(std::move(field));
                return true;
            } else {
                field.push_back(ch);
            }
            c = in_.get();
        }
    }

private:
    std::istream& in_;
};

}  // namespace stag
