#pragma once

#include <string>
#include <vector>

namespace survbench {

// Deterministic float formatting for CSV/SVG output ("%.10g" / fixed).
std::string fmt_g(double v);
std::string fmt_fixed(double v, int precision);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Strict "key value" / "key: value" / "key=value" line format with '#'
// comments. Used for run configs and scenario files.
struct KeyValueLine {
  std::string key;
  std::string value;
  int line_no = 0;
};
std::vector<KeyValueLine> parse_key_value_text(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

bool parse_bool(const std::string& s);    // true/false/1/0/yes/no
double parse_double(const std::string& s);
long parse_long(const std::string& s);

}  // namespace survbench
