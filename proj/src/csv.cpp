#include "scfcq/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace scfcq {

long CsvTable::column(const std::string& name) const {
  for (size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<long>(j);
  return -1;
}

std::vector<double> CsvTable::col(const std::string& name) const {
  long j = column(name);
  if (j < 0) throw CsvError("column '" + name + "' not found");
  std::vector<double> out;
  out.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::string& c = rows[i][static_cast<size_t>(j)];
    long line_no = static_cast<long>(i) + 2;  // 1-based, after the header
    size_t pos = 0;
    double v;
    try {
      v = std::stod(c, &pos);
    } catch (const std::exception&) {
      throw CsvError("non-numeric value '" + c + "'", line_no);
    }
    if (pos != c.size()) throw CsvError("non-numeric value '" + c + "'", line_no);
    out.push_back(v);
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.eof()) break;
    std::vector<std::string> cells;
    size_t start = 0;
    for (;;) {
      size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (line_no == 1) {
      table.header = cells;
      continue;
    }
    if (cells.size() != table.header.size())
      throw CsvError("expected " + std::to_string(table.header.size()) +
                         " fields, got " + std::to_string(cells.size()),
                     line_no);
    for (const auto& c : cells)
      if (c.empty()) throw CsvError("missing value", line_no);
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw CsvError("empty input: header row required");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace scfcq
