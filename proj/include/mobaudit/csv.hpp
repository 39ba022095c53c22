#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// Minimal RFC-4180-style CSV reading/writing plus the numeric formatting
// rules used by every machine-readable output (shortest round-trip doubles).

namespace mobaudit {

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line_no = 0;  // 1-based line of the first character of the row
};

class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Returns rows until EOF. Handles quoted fields with embedded commas,
  // doubled quotes, and CRLF line endings.
  std::optional<CsvRow> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::string csv_quote(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

// Shortest representation that round-trips through a double.
std::string format_double(double v);
// Fixed precision, for human-facing tables.
std::string format_double(double v, int decimals);

// Strict integer / double parsing; the whole token must be consumed.
std::optional<std::int64_t> parse_int(const std::string& token);
std::optional<double> parse_real(const std::string& token);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit content hash, hex encoded. Used for manifest checksums.
std::string fnv1a_hex(const std::string& content);

}  // namespace mobaudit
