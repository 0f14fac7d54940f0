#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shapedist/response.hpp"

namespace shapedist::io {

// Formats with 17 significant digits so that load(write(x)) is bit-identical.
std::string format_double(double v);

// CSV ingestion: optional header line, then M rows of N decimal fields.
// Ragged rows and non-finite values are rejected with their line number.
ResponseMatrix load_response_csv(const std::filesystem::path& path);

void write_response_csv(const std::filesystem::path& path, const Matrix& m);

// Long-format results table.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const Table& t);
std::string to_json(const Table& t);

// Writes via a temporary file and rename; no partial outputs on error.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace shapedist::io
