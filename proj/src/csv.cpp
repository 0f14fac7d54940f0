#include "shapedist/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "shapedist/error.hpp"

#include "json.hpp"

namespace shapedist::io {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ' || field.back() == '\t'))
      field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && (field[start] == ' ' || field[start] == '\t')) ++start;
    out.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_field(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + s.size();
}

}  // namespace

ResponseMatrix load_response_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open response file: " + path.string());

  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  bool saw_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!parse_field(fields[j], values[j])) {
        numeric = false;
        if (saw_data)
          throw DataError(path.string() + ":" + std::to_string(line_no) + ": field " +
                          std::to_string(j + 1) + " is not a number");
        break;
      }
    }
    if (!numeric) {
      // Non-numeric first line: header, skipped.
      continue;
    }
    for (std::size_t j = 0; j < values.size(); ++j)
      if (!std::isfinite(values[j]))
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": field " +
                        std::to_string(j + 1) + " is not finite");
    if (!saw_data) {
      width = values.size();
      saw_data = true;
    } else if (values.size() != width) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": ragged row (" +
                      std::to_string(values.size()) + " fields, expected " +
                      std::to_string(width) + ")");
    }
    rows.push_back(std::move(values));
  }
  if (!saw_data) throw DataError(path.string() + ": no data rows");
  Matrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
  return make_response(std::move(m));
}

void write_response_csv(const std::filesystem::path& path, const Matrix& m) {
  std::string out;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (j) out += ',';
    out += "unit_" + std::to_string(j + 1);
  }
  out += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) out += ',';
    out += t.columns[j];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size())
      throw DataError("table row width does not match the column schema");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += row[j];
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size())
      throw DataError("table row width does not match the column schema");
    nlohmann::json obj;
    for (std::size_t j = 0; j < row.size(); ++j) obj[t.columns[j]] = row[j];
    rows.push_back(obj);
  }
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["rows"] = rows;
  return doc.dump(2) + "\n";
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open output file: " + tmp.string());
    out << content;
    if (!out) throw DataError("failed writing output file: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot move output into place: " + path.string());
  }
}

}  // namespace shapedist::io
