#pragma once

// Minimal SVG line charts for exported curves. Axes are fixed to [0,1].

#include <string>
#include <utility>
#include <vector>

#include "rednet/metrics.hpp"

namespace rednet::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

// Writes roc.svg, pr.svg and reliability.svg into `dir` (created if needed).
void write_eval_figures(const metrics::EvalReport& report, const std::string& dir);

}  // namespace rednet::svg
