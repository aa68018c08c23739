#include "natural/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace natural {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (const auto& n : names) field(n);
    end_row();
}

CsvWriter& CsvWriter::field(std::string_view text) {
    if (!first_) out_ << ',';
    first_ = false;
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
        out_ << text;
        return *this;
    }
    out_ << '"';
    for (char c : text) {
        if (c == '"') out_ << '"';
        out_ << c;
    }
    out_ << '"';
    return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(std::string_view(format_double(value))); }

CsvWriter& CsvWriter::field(long long value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return field(std::string_view(buf, res.ptr - buf));
}

void CsvWriter::end_row() {
    out_ << "\r\n";
    first_ = true;
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace natural
