#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace wordfun::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

// A parsed CSV file with one header line. Quoted fields ("a,b", "say ""hi""") are supported;
// embedded newlines are not.
struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<Row> rows;

  // Case-insensitive header lookup.
  std::optional<std::size_t> find_column(std::string_view name) const;
  // As find_column, but throws InputError("<source>: missing required column '<name>'").
  std::size_t require_column(std::string_view name) const;
};

std::vector<std::string> split_line(std::string_view line);

Table parse(std::string_view text, std::string source = "<memory>");

// Throws InputError("<label>: file not found") when the path does not exist.
Table read_file(const std::filesystem::path& path, std::string_view label);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace wordfun::csv

namespace wordfun {

// Reads a whole file, throwing InputError("<label>: file not found") if absent.
std::string read_text_file(const std::filesystem::path& path, std::string_view label);

}  // namespace wordfun
