#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bbt::csv {

using Row = std::vector<std::string>;

/// Parses RFC-4180-ish CSV text: quoted fields, doubled quotes, CRLF, a leading
/// UTF-8 BOM. Unquoted fields are trimmed. Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

/// Reads and parses a file; throws IoError with the path on failure.
std::vector<Row> read_file(const std::filesystem::path& path);

/// Plain decimal with optional thousands separators (',' or '_') and
/// surrounding whitespace. Returns nullopt for empty, non-numeric or
/// non-finite text.
std::optional<double> parse_number(std::string_view text);

/// Quotes a field if it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

/// Shortest round-trip-safe text for a double (17 significant digits).
std::string format_double(double v);

}  // namespace bbt::csv
