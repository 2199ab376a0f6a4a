#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace netsynth::csv {

using Row = std::vector<std::string>;

// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
Row split_line(std::string_view line);

// Reads every non-empty line of a stream. A UTF-8 BOM on the first line is
// dropped.
std::vector<Row> read_all(std::istream& in);

// Quotes a field if it contains a separator, quote or whitespace edge.
std::string escape(std::string_view field);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

// Strict full-string parse; throws DataError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

}  // namespace netsynth::csv
