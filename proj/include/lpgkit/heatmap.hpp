#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "lpgkit/error.hpp"
#include "lpgkit/tasks.hpp"
#include "lpgkit/textfmt.hpp"

namespace lpgkit {

namespace detail {

// white → green for gains, white → red for losses, grey inside the
// indifference band
inline std::string delta_color(double delta, double tolerance, double saturation_at) {
  if (std::abs(delta) < tolerance) return "#e8e8e8";
  const double t = std::min(1.0, std::abs(delta) / saturation_at);
  const auto mix = [t](int from, int to) { return static_cast<int>(std::lround(from + (to - from) * t)); };
  int r, g, b;
  if (delta > 0.0) {
    r = mix(255, 46);
    g = mix(255, 139);
    b = mix(255, 87);
  } else {
    r = mix(255, 178);
    g = mix(255, 34);
    b = mix(255, 34);
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string round3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

}  // namespace detail

/// Pair-matrix heatmap: property keys on both axes, the diagonal holding
/// single-key results, a strip above for the baseline and the labels group.
/// Cell color encodes the delta against the structure-only baseline.
inline void render_heatmap(const AblationReport& report, const std::string& path, double tolerance = 0.005,
                           double saturation_at = 0.3) {
  const size_t k = report.pair_keys.size();
  const double cell = 92.0, margin_left = 130.0, margin_top = 96.0, strip_h = 60.0;
  const double width = margin_left + std::max<size_t>(k, 3) * cell + 20.0;
  const double height = margin_top + strip_h + 30.0 + k * cell + 20.0;

  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width) << "\" height=\""
      << format_double(height) << "\" viewBox=\"0 0 " << format_double(width) << ' ' << format_double(height)
      << "\" font-family=\"monospace\" font-size=\"12\">\n";
  out << "<text x=\"10\" y=\"20\">model=" << detail::xml_escape(report.model)
      << " target=" << detail::xml_escape(report.target) << " metric="
      << (report.maximize ? "accuracy" : "mae") << "</text>\n";
  out << "<text x=\"10\" y=\"38\">baseline (structure only) = " << detail::round3(report.baseline.mean)
      << " &#177; " << detail::round3(report.baseline.stddev) << "</text>\n";

  // strip: baseline cell plus the grouped-labels cell
  double sx = margin_left;
  const double sy = margin_top - 40.0;
  auto strip_cell = [&](const std::string& name, const CellStats& stats, double delta) {
    out << "<rect x=\"" << format_double(sx) << "\" y=\"" << format_double(sy) << "\" width=\""
        << format_double(cell) << "\" height=\"" << format_double(strip_h) << "\" fill=\""
        << detail::delta_color(delta, tolerance, saturation_at) << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << format_double(sx + 6) << "\" y=\"" << format_double(sy + 18) << "\">"
        << detail::xml_escape(name) << "</text>\n";
    out << "<text x=\"" << format_double(sx + 6) << "\" y=\"" << format_double(sy + 36) << "\">"
        << detail::round3(stats.mean) << "</text>\n";
    out << "<text x=\"" << format_double(sx + 6) << "\" y=\"" << format_double(sy + 52) << "\">&#916;"
        << detail::round3(delta) << "</text>\n";
    sx += cell + 8.0;
  };
  strip_cell("baseline", report.baseline, 0.0);
  for (size_t i = 0; i < report.single_names.size(); ++i) {
    if (report.single_names[i] == "labels") {
      strip_cell("labels", report.single_stats[i], report.improvement(report.single_stats[i]));
    }
  }

  const double grid_top = margin_top + strip_h + 10.0;
  auto grid_cell = [&](size_t row, size_t col, const CellStats& stats) {
    const double delta = report.improvement(stats);
    const double x = margin_left + col * cell;
    const double y = grid_top + row * cell;
    out << "<rect x=\"" << format_double(x) << "\" y=\"" << format_double(y) << "\" width=\""
        << format_double(cell) << "\" height=\"" << format_double(cell) << "\" fill=\""
        << detail::delta_color(delta, tolerance, saturation_at) << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << format_double(x + 6) << "\" y=\"" << format_double(y + cell / 2 - 4) << "\">"
        << detail::round3(stats.mean) << "</text>\n";
    out << "<text x=\"" << format_double(x + 6) << "\" y=\"" << format_double(y + cell / 2 + 14) << "\">&#916;"
        << detail::round3(delta) << "</text>\n";
  };

  for (size_t j = 0; j < k; ++j) {
    out << "<text x=\"" << format_double(margin_left + j * cell + 4) << "\" y=\""
        << format_double(grid_top - 6) << "\">" << detail::xml_escape(report.pair_keys[j]) << "</text>\n";
  }
  if (!report.pair_stats.empty()) {
    for (size_t i = 0; i < k; ++i) {
      out << "<text x=\"10\" y=\"" << format_double(grid_top + i * cell + cell / 2) << "\">"
          << detail::xml_escape(report.pair_keys[i]) << "</text>\n";
      for (size_t j = 0; j < k; ++j) grid_cell(i, j, report.pair_stats[i * k + j]);
    }
  } else {
    // single-feature sweep only: one row of per-key cells
    for (size_t i = 0; i < report.single_names.size(); ++i) {
      for (size_t j = 0; j < k; ++j) {
        if (report.single_names[i] == report.pair_keys[j]) grid_cell(0, j, report.single_stats[i]);
      }
    }
  }
  out << "</svg>\n";
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace lpgkit
