#pragma once

#include <string>
#include <vector>

#include "scfcq/errors.hpp"

namespace scfcq {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  long column(const std::string& name) const;  // -1 when missing
  // Numeric view of one column; non-numeric cells are a hard error naming
  // the offending line.
  std::vector<double> col(const std::string& name) const;
};

// Comma-separated, header row required, '.' decimal, no quoting. Missing
// cells are a hard error at parse time; numeric validation happens when a
// column is accessed through col(), so text columns round-trip.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

std::string format_double(double v);

}  // namespace scfcq
