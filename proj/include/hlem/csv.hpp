#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hlem::csv {

/// RFC 4180 reader: quoted fields, doubled quotes, embedded delimiters and
/// newlines, CRLF line endings. A UTF-8 BOM on the first field is dropped.
/// Completely blank lines are skipped.
std::vector<std::vector<std::string>> read(std::istream& in, char delimiter = ',');

/// Quotes the field only when it contains the delimiter, a quote, or a newline.
std::string escape(std::string_view field, char delimiter = ',');

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

}  // namespace hlem::csv
