#include "survbench/svg.hpp"

#include <algorithm>
#include <cmath>

#include "survbench/textio.hpp"

namespace survbench {

namespace {

const char* kColorTarget = "#3a6ea5";
const char* kColorOver = "#2e8b57";
const char* kColorUnder = "#c0392b";

double nice_step(double range, int target_ticks) {
  const double raw = range / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step;
  if (norm < 1.5)
    step = 1.0;
  else if (norm < 3.0)
    step = 2.0;
  else if (norm < 7.0)
    step = 5.0;
  else
    step = 10.0;
  return step * mag;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string funnel_chart_svg(const FunnelChart& chart) {
  const double width = 880, height = 560;
  const double ml = 78, mr = 24, mt = 28, mb = 64;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 2.0;
  if (!chart.curve_x.empty()) {
    x_hi = chart.curve_x.back() * 1.04;
    x_lo = std::max(0.0, chart.curve_x.front() * 0.6);
  }
  for (const auto& pt : chart.points) {
    x_hi = std::max(x_hi, pt.eff_n * 1.04);
    y_hi = std::max(y_hi, pt.oe_ratio * 1.12);
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;

  auto sx = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) {
    const double c = std::min(y_hi, std::max(y_lo, y));
    return mt + (y_hi - c) / (y_hi - y_lo) * ph;
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt_fixed(width, 0) + "\" height=\"" + fmt_fixed(height, 0) +
         "\" viewBox=\"0 0 " + fmt_fixed(width, 0) + " " +
         fmt_fixed(height, 0) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes
  svg += "<line x1=\"" + fmt_fixed(ml, 2) + "\" y1=\"" + fmt_fixed(mt + ph, 2) +
         "\" x2=\"" + fmt_fixed(ml + pw, 2) + "\" y2=\"" +
         fmt_fixed(mt + ph, 2) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + fmt_fixed(ml, 2) + "\" y1=\"" + fmt_fixed(mt, 2) +
         "\" x2=\"" + fmt_fixed(ml, 2) + "\" y2=\"" + fmt_fixed(mt + ph, 2) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  // ticks
  const double x_step = nice_step(x_hi - x_lo, 6);
  for (double t = std::ceil(x_lo / x_step) * x_step; t <= x_hi + 1e-9;
       t += x_step) {
    const double px = sx(t);
    svg += "<line x1=\"" + fmt_fixed(px, 2) + "\" y1=\"" +
           fmt_fixed(mt + ph, 2) + "\" x2=\"" + fmt_fixed(px, 2) + "\" y2=\"" +
           fmt_fixed(mt + ph + 5, 2) + "\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + fmt_fixed(px, 2) + "\" y=\"" +
           fmt_fixed(mt + ph + 20, 2) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           fmt_g(t) + "</text>\n";
  }
  const double y_step = nice_step(y_hi - y_lo, 6);
  for (double t = std::ceil(y_lo / y_step) * y_step; t <= y_hi + 1e-9;
       t += y_step) {
    const double py = sy(t);
    svg += "<line x1=\"" + fmt_fixed(ml - 5, 2) + "\" y1=\"" +
           fmt_fixed(py, 2) + "\" x2=\"" + fmt_fixed(ml, 2) + "\" y2=\"" +
           fmt_fixed(py, 2) + "\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + fmt_fixed(ml - 9, 2) + "\" y=\"" +
           fmt_fixed(py + 4, 2) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
           fmt_g(t) + "</text>\n";
  }

  // axis labels
  svg += "<text x=\"" + fmt_fixed(ml + pw / 2, 2) + "\" y=\"" +
         fmt_fixed(height - 14, 2) +
         "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" +
         xml_escape(chart.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt_fixed(mt + ph / 2, 2) +
         "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 " +
         fmt_fixed(mt + ph / 2, 2) + ")\">" + xml_escape(chart.y_label) +
         "</text>\n";

  // target line at 1
  svg += "<line class=\"target-line\" x1=\"" + fmt_fixed(ml, 2) + "\" y1=\"" +
         fmt_fixed(sy(1.0), 2) + "\" x2=\"" + fmt_fixed(ml + pw, 2) +
         "\" y2=\"" + fmt_fixed(sy(1.0), 2) +
         "\" stroke=\"#777777\" stroke-width=\"1\"/>\n";

  // limit curves
  auto curve = [&](const std::vector<double>& ys, const char* cls,
                   const char* dash) {
    std::string d;
    for (std::size_t i = 0; i < chart.curve_x.size(); ++i) {
      d += i == 0 ? "M" : " L";
      d += fmt_fixed(sx(chart.curve_x[i]), 2) + " " + fmt_fixed(sy(ys[i]), 2);
    }
    std::string attrs = std::string(" fill=\"none\" stroke=\"#555555\"") +
                        (dash[0] ? " stroke-dasharray=\"" + std::string(dash) + "\""
                                 : std::string());
    return "<path class=\"" + std::string(cls) + "\" d=\"" + d + "\"" + attrs +
           "/>\n";
  };
  svg += curve(chart.inner_lower, "limit-inner", "");
  svg += curve(chart.inner_upper, "limit-inner", "");
  svg += curve(chart.outer_lower, "limit-outer", "6 4");
  svg += curve(chart.outer_upper, "limit-outer", "6 4");

  // center points
  for (const auto& pt : chart.points) {
    const char* color = kColorTarget;
    if (pt.classification == Classification::over) color = kColorOver;
    if (pt.classification == Classification::under) color = kColorUnder;
    svg += "<circle class=\"center-point\" cx=\"" + fmt_fixed(sx(pt.eff_n), 2) +
           "\" cy=\"" + fmt_fixed(sy(pt.oe_ratio), 2) +
           "\" r=\"3\" fill=\"" + color + "\" fill-opacity=\"0.75\"><title>" +
           xml_escape(pt.center_id) + "</title></circle>\n";
  }

  // legend incl. empty buckets
  struct LegendEntry {
    const char* label;
    const char* color;
    std::size_t count;
  };
  const LegendEntry legend[] = {
      {"Over", kColorOver, chart.count_over},
      {"Target", kColorTarget, chart.count_target},
      {"Under", kColorUnder, chart.count_under},
  };
  double ly = mt + 10;
  for (const auto& e : legend) {
    svg += "<circle cx=\"" + fmt_fixed(ml + pw - 120, 2) + "\" cy=\"" +
           fmt_fixed(ly - 4, 2) + "\" r=\"4\" fill=\"" + e.color + "\"/>\n";
    svg += "<text class=\"legend\" x=\"" + fmt_fixed(ml + pw - 110, 2) +
           "\" y=\"" + fmt_fixed(ly, 2) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           std::string(e.label) + " (" + std::to_string(e.count) + ")</text>\n";
    ly += 18;
  }

  svg += "</svg>\n";
  return svg;
}

void render_funnel_svg(const FunnelChart& chart, const std::string& path) {
  write_text_file(path, funnel_chart_svg(chart));
}

}  // namespace survbench
