#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fedlog {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 subset: comma separator, double-quote quoting, "" escapes,
/// LF or CRLF line ends. Throws std::runtime_error on ragged rows.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string format_csv(const CsvTable& table);

}  // namespace fedlog
