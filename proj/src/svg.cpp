#include "scfcq/svg.hpp"

#include <algorithm>
#include <cmath>

#include "scfcq/csv.hpp"

namespace scfcq {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_line_chart(const std::vector<SvgSeries>& series,
                              const std::string& title) {
  const double width = 720, height = 480;
  const double ml = 60, mr = 150, mt = 40, mb = 45;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    for (double v : s.band_lo) ymin = std::min(ymin, v);
    for (double v : s.band_hi) ymax = std::max(ymax, v);
  }
  if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double v) {
    return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto py = [&](double v) {
    return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_double(width) + "\" height=\"" + format_double(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + format_double(width / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + title + "</text>\n";

  // axes with a few ticks
  out += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(height - mb) +
         "\" x2=\"" + format_double(width - mr) + "\" y2=\"" +
         format_double(height - mb) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt) +
         "\" x2=\"" + format_double(ml) + "\" y2=\"" + format_double(height - mb) +
         "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double xv = xmin + (xmax - xmin) * k / 4.0;
    double yv = ymin + (ymax - ymin) * k / 4.0;
    out += "<text x=\"" + format_double(px(xv)) + "\" y=\"" +
           format_double(height - mb + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           format_double(std::round(xv * 1000) / 1000) + "</text>\n";
    out += "<text x=\"" + format_double(ml - 8) + "\" y=\"" +
           format_double(py(yv) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           format_double(std::round(yv * 1000) / 1000) + "</text>\n";
  }

  size_t ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci % 6];
    if (s.band_lo.size() == s.x.size() && !s.band_lo.empty()) {
      std::string pts;
      for (size_t i = 0; i < s.x.size(); ++i)
        pts += format_double(px(s.x[i])) + "," + format_double(py(s.band_lo[i])) + " ";
      for (size_t i = s.x.size(); i-- > 0;)
        pts += format_double(px(s.x[i])) + "," + format_double(py(s.band_hi[i])) + " ";
      out += "<polygon points=\"" + pts + "\" fill=\"" + color +
             "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (size_t i = 0; i < s.x.size(); ++i)
      pts += format_double(px(s.x[i])) + "," + format_double(py(s.y[i])) + " ";
    out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    double ly = mt + 16.0 * static_cast<double>(ci + 1);
    out += "<line x1=\"" + format_double(width - mr + 10) + "\" y1=\"" +
           format_double(ly) + "\" x2=\"" + format_double(width - mr + 34) +
           "\" y2=\"" + format_double(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + format_double(width - mr + 40) + "\" y=\"" +
           format_double(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label +
           "</text>\n";
    ++ci;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace scfcq
