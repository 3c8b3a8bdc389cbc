#pragma once

#include <string>

#include "survbench/funnel.hpp"

namespace survbench {

// Standalone SVG funnel plot: centers colored by classification, solid inner
// and dashed outer limits, target line at 1 and a legend with bucket counts.
// Byte-deterministic for a fixed chart.
std::string funnel_chart_svg(const FunnelChart& chart);

void render_funnel_svg(const FunnelChart& chart, const std::string& path);

}  // namespace survbench
