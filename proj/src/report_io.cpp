#include "cct/report_io.hpp"

#include "cct/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace cct {

namespace {

using nlohmann::json;

std::ofstream open_for_write(const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // fixed \n line endings
  if (!os) {
    throw std::runtime_error("report: cannot open for writing: " + path);
  }
  return os;
}

double parse_back(const std::string& text) { return std::strtod(text.c_str(), nullptr); }

// SVG scaffolding: a fixed 800x500 viewbox with a margin for axis labels.
constexpr double kSvgWidth = 800.0;
constexpr double kSvgHeight = 500.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 60.0;

struct SvgAxes {
  int max_iteration = 1;

  double x(double iteration) const {
    const double span = std::max(1, max_iteration - 1);
    return kMarginLeft +
           (iteration - 1.0) / span * (kSvgWidth - kMarginLeft - kMarginRight);
  }
  double y(double accuracy) const {
    return kSvgHeight - kMarginBottom -
           accuracy * (kSvgHeight - kMarginTop - kMarginBottom);
  }
};

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void svg_header(std::ofstream& os) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
  os << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
}

void svg_axes(std::ofstream& os, const SvgAxes& axes) {
  os << "<line x1=\"" << coord(kMarginLeft) << "\" y1=\"" << coord(kSvgHeight - kMarginBottom)
     << "\" x2=\"" << coord(kSvgWidth - kMarginRight) << "\" y2=\""
     << coord(kSvgHeight - kMarginBottom) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << coord(kMarginLeft) << "\" y1=\"" << coord(kMarginTop)
     << "\" x2=\"" << coord(kMarginLeft) << "\" y2=\"" << coord(kSvgHeight - kMarginBottom)
     << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 10; tick += 2) {
    const double accuracy = tick / 10.0;
    os << "<text x=\"" << coord(kMarginLeft - 10.0) << "\" y=\""
       << coord(axes.y(accuracy) + 4.0)
       << "\" font-size=\"12\" text-anchor=\"end\">" << format_sig(accuracy, 2)
       << "</text>\n";
  }
  for (int it = 1; it <= axes.max_iteration; ++it) {
    os << "<text x=\"" << coord(axes.x(it)) << "\" y=\""
       << coord(kSvgHeight - kMarginBottom + 18.0)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << it << "</text>\n";
  }
  os << "<text x=\"" << coord((kMarginLeft + kSvgWidth - kMarginRight) / 2.0)
     << "\" y=\"" << coord(kSvgHeight - 15.0)
     << "\" font-size=\"14\" text-anchor=\"middle\">iteration</text>\n";
  os << "<text x=\"20\" y=\"" << coord((kMarginTop + kSvgHeight - kMarginBottom) / 2.0)
     << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << coord((kMarginTop + kSvgHeight - kMarginBottom) / 2.0)
     << ")\">accuracy</text>\n";
}

void svg_polyline(std::ofstream& os, const SvgAxes& axes,
                  const std::vector<IterationReport>& reports, const char* color) {
  if (reports.empty()) {
    return;
  }
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i > 0) os << " ";
    os << coord(axes.x(reports[i].iteration)) << "," << coord(axes.y(reports[i].post_accuracy));
  }
  os << "\"/>\n";
  for (const IterationReport& report : reports) {
    os << "<circle cx=\"" << coord(axes.x(report.iteration)) << "\" cy=\""
       << coord(axes.y(report.post_accuracy)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }
}

json iteration_json(const IterationReport& report) {
  return json{{"iteration", report.iteration},
              {"ct_value", parse_back(format_sig(report.ct_value))},
              {"tested", report.tested_count},
              {"flagged_unknown", report.flagged_unknown_count},
              {"false_unknown", report.false_unknown_count},
              {"caught_per_cluster", report.caught_per_cluster},
              {"thin_clusters", report.thin_clusters},
              {"retrain_samples", report.retrain_sample_count},
              {"post_accuracy", parse_back(format_sig(report.post_accuracy))}};
}

}  // namespace

std::string format_sig(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

void write_iterations_csv(const std::string& path,
                          const std::vector<IterationReport>& reports) {
  std::ofstream os = open_for_write(path);
  os << "iteration,ct_value,tested,flagged_unknown,false_unknown,retrain_samples,"
        "post_accuracy\n";
  for (const IterationReport& report : reports) {
    os << report.iteration << "," << format_sig(report.ct_value) << ","
       << report.tested_count << "," << report.flagged_unknown_count << ","
       << report.false_unknown_count << "," << report.retrain_sample_count << ","
       << format_sig(report.post_accuracy) << "\n";
  }
}

void write_summary_json(const std::string& path, const RunLog& log,
                        const nlohmann::json& config_snapshot) {
  json summary;
  summary["config"] = config_snapshot;
  json iterations = json::array();
  double total = 0.0;
  for (const IterationReport& report : log.iterations) {
    json row = iteration_json(report);
    total += row.at("post_accuracy").get<double>();
    iterations.push_back(std::move(row));
  }
  summary["iterations"] = std::move(iterations);
  if (log.iterations.empty()) {
    summary["ila"] = nullptr;
  } else {
    // Mean of the 6-digit accuracies that appear in the artifacts, kept at
    // higher precision so recomputing from the rows reproduces it.
    summary["ila"] =
        parse_back(format_sig(total / static_cast<double>(log.iterations.size()), 12));
  }

  std::ofstream os = open_for_write(path);
  os << summary.dump(2) << "\n";
}

void write_accuracy_svg(const std::string& path,
                        const std::vector<IterationReport>& reports) {
  SvgAxes axes;
  for (const IterationReport& report : reports) {
    axes.max_iteration = std::max(axes.max_iteration, report.iteration);
  }
  std::ofstream os = open_for_write(path);
  svg_header(os);
  svg_axes(os, axes);
  svg_polyline(os, axes, reports, "#1f77b4");
  os << "</svg>\n";
}

void write_compare_csv(const std::string& path, const RunLog& cct_log,
                       const RunLog& baseline_log) {
  if (cct_log.iterations.size() != baseline_log.iterations.size()) {
    throw std::invalid_argument("compare: runs have different iteration counts");
  }
  std::ofstream os = open_for_write(path);
  os << "iteration,cct_post_accuracy,cct_retrain_samples,baseline_post_accuracy,"
        "baseline_retrain_samples\n";
  for (std::size_t i = 0; i < cct_log.iterations.size(); ++i) {
    const IterationReport& lhs = cct_log.iterations[i];
    const IterationReport& rhs = baseline_log.iterations[i];
    os << lhs.iteration << "," << format_sig(lhs.post_accuracy) << ","
       << lhs.retrain_sample_count << "," << format_sig(rhs.post_accuracy) << ","
       << rhs.retrain_sample_count << "\n";
  }
}

void write_compare_svg(const std::string& path, const RunLog& cct_log,
                       const RunLog& baseline_log) {
  SvgAxes axes;
  for (const IterationReport& report : cct_log.iterations) {
    axes.max_iteration = std::max(axes.max_iteration, report.iteration);
  }
  std::ofstream os = open_for_write(path);
  svg_header(os);
  svg_axes(os, axes);
  svg_polyline(os, axes, cct_log.iterations, "#1f77b4");
  svg_polyline(os, axes, baseline_log.iterations, "#d62728");
  os << "<text x=\"" << coord(kSvgWidth - kMarginRight - 10.0) << "\" y=\""
     << coord(kMarginTop + 14.0)
     << "\" font-size=\"13\" text-anchor=\"end\" fill=\"#1f77b4\">confidence threshold</text>\n";
  os << "<text x=\"" << coord(kSvgWidth - kMarginRight - 10.0) << "\" y=\""
     << coord(kMarginTop + 32.0)
     << "\" font-size=\"13\" text-anchor=\"end\" fill=\"#d62728\">full retrain</text>\n";
  os << "</svg>\n";
}

}  // namespace cct
