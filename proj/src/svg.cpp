#include "rednet/svg.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rednet::svg {

namespace {

constexpr double kWidth = 480, kHeight = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

double px(double x) { return kLeft + x * (kWidth - kLeft - kRight); }
double py(double y) { return kHeight - kBottom - y * (kHeight - kTop - kBottom); }

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
  out << "<rect x=\"" << px(0) << "\" y=\"" << py(1) << "\" width=\"" << px(1) - px(0) << "\" height=\""
      << py(0) - py(1) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    out << "<text x=\"" << fmt(px(v)) << "\" y=\"" << fmt(py(0) + 16) << "\" text-anchor=\"middle\">" << fmt(v)
        << "</text>\n";
    out << "<text x=\"" << fmt(px(0) - 6) << "\" y=\"" << fmt(py(v) + 4) << "\" text-anchor=\"end\">" << fmt(v)
        << "</text>\n";
  }
  out << "<text x=\"" << fmt((px(0) + px(1)) / 2) << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  out << "<text transform=\"translate(16," << fmt((py(0) + py(1)) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    out << "<polyline fill=\"none\" stroke=\"" << kColors[s % 4] << "\" stroke-width=\"1.5\""
        << (ser.dashed ? " stroke-dasharray=\"4 3\"" : "") << " points=\"";
    for (const auto& [x, y] : ser.points) out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << fmt(px(0) + 8) << "\" y=\"" << fmt(py(1) + 16 + 14 * static_cast<double>(s))
        << "\" fill=\"" << kColors[s % 4] << "\">" << escape(ser.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_eval_figures(const metrics::EvalReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) throw std::runtime_error("cannot write " + name + " in " + dir);
    f << body;
  };

  Series roc{"ROC (AUROC " + fmt(report.auroc) + ")", {}, false};
  for (const auto& p : report.roc_points) roc.points.emplace_back(p.fpr, p.tpr);
  write("roc.svg", line_chart("ROC curve", "False positive rate", "True positive rate",
                              {roc, Series{"chance", {{0, 0}, {1, 1}}, true}}));

  Series pr{"PR (AUPRC " + fmt(report.auprc) + ")", {}, false};
  for (const auto& p : report.pr_points) pr.points.emplace_back(p.recall, p.precision);
  write("pr.svg", line_chart("Precision-recall curve", "Recall", "Precision",
                             {pr, Series{"no skill", {{0, report.prevalence}, {1, report.prevalence}}, true}}));

  Series rel{"observed", {}, false};
  for (const auto& b : report.reliability_bins) {
    if (b.n > 0) rel.points.emplace_back(*b.mean_pred, *b.frac_pos);
  }
  write("reliability.svg", line_chart("Reliability curve", "Mean predicted", "Fraction positive",
                                      {rel, Series{"ideal", {{0, 0}, {1, 1}}, true}}));
}

}  // namespace rednet::svg
