#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace natural {

/// Shortest round-trip representation ("nan", "inf" and "-inf" for non-finite values).
std::string format_double(double x);

/// RFC 4180 writer: CRLF record separator, fields quoted only when needed.
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& names);
    CsvWriter& field(std::string_view text);
    CsvWriter& field(double value);
    CsvWriter& field(long long value);
    CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
    void end_row();

  private:
    std::ostream& out_;
    bool first_ = true;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace natural
