#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stretchlab::io {

// Round-trip decimal representation; identical bits give identical text.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

// Plain comma-separated text, no quoting.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace stretchlab::io
