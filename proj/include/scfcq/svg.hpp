#pragma once

#include <string>
#include <vector>

namespace scfcq {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  // optional CI band, same length as x when present
  std::vector<double> band_lo;
  std::vector<double> band_hi;
};

// Static line chart (x = quantile level, y = coefficient value).
std::string render_line_chart(const std::vector<SvgSeries>& series,
                              const std::string& title);

}  // namespace scfcq
