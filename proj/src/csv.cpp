#include "hlem/csv.hpp"

#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>

namespace hlem::csv {

std::vector<std::vector<std::string>> read(std::istream& in, char delimiter) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        bool blank = row.size() == 1 && row.front().empty() && !field_started;
        if (!blank) rows.push_back(std::move(row));
        row.clear();
        field_started = false;
    };

    for (; pos < text.size(); ++pos) {
        char ch = text[pos];
        if (in_quotes) {
            if (ch == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"') {
            in_quotes = true;
            field_started = true;
        } else if (ch == delimiter) {
            row.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (ch == '\r') {
            if (pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            end_row();
        } else if (ch == '\n') {
            end_row();
        } else {
            field.push_back(ch);
            field_started = true;
        }
    }
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string escape(std::string_view field, char delimiter) {
    bool needs_quotes = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << delimiter;
        out << escape(fields[i], delimiter);
    }
    out << '\n';
}

std::string format_number(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace hlem::csv
