#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

// Error taxonomy maps onto the CLI exit-code contract:
// UsageError -> 1, DataError (incl. ParseError) -> 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : DataError {
    ParseError(const std::string& msg, int line_no)
        : DataError("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
    int line;
};

// Bit-exact real serialization for model artifacts ("%a" hex-float form).
std::string hex_double(double v);
double parse_hex_double(const std::string& s);

// Fixed-point decimal rendering for reports (no locale surprises).
std::string format_double(double v, int decimals);

std::string to_lower(std::string s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

// Minimal CSV with RFC-style quoting for fields containing , " or newline.
std::string csv_escape(const std::string& field);
std::vector<std::string> csv_split_line(const std::string& line, int line_no);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace sentinel
