#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "duoglass/electro_optics.hpp"
#include "duoglass/errors.hpp"
#include "duoglass/study.hpp"
#include "duoglass/text.hpp"

// Self-contained SVG charts. Output is a pure function of the input data:
// fixed palette, fixed layout, shortest round-trip number formatting, no
// timestamps, so renders are byte-identical across runs and platforms.

namespace duoglass {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
  int width = 640;
  int height = 400;
};

struct DualAxisChartSpec {
  std::string title;
  std::string left_label;   // bars
  std::string right_label;  // markers
  std::vector<std::string> categories;
  std::vector<std::optional<double>> left_values;
  std::vector<std::optional<double>> right_values;
  int width = 640;
  int height = 400;
};

namespace detail {

inline constexpr const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#9467bd", "#ff7f0e", "#17becf"};

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
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

// Pixel coordinates rounded to 1/100 so the markup stays tidy; rounding is
// deterministic and far below visual resolution.
inline std::string px(double v) {
  return text::fmt(std::round(v * 100.0) / 100.0);
}

struct AxisScale {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.2;
};

// Expands [lo, hi] to tick-aligned bounds with a 1/2/5 decade step chosen to
// land near five intervals.
inline AxisScale nice_scale(double lo, double hi) {
  if (!(hi > lo)) {
    hi = lo + (lo == 0.0 ? 1.0 : std::abs(lo) * 0.5);
    lo = lo - (lo == 0.0 ? 0.0 : std::abs(lo) * 0.5);
    if (!(hi > lo)) hi = lo + 1.0;
  }
  double raw = (hi - lo) / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double mult : {1.0, 2.0, 5.0})
    if (raw <= mult * mag) {
      step = mult * mag;
      break;
    }
  AxisScale s;
  s.step = step;
  s.lo = std::floor(lo / step) * step;
  s.hi = std::ceil(hi / step) * step;
  if (s.hi == s.lo) s.hi = s.lo + step;
  return s;
}

struct Frame {
  double x0, y0, x1, y1;  // plot rectangle in pixels, y grows downward
};

inline void open_svg(std::string& out, int width, int height,
                     const std::string& title) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         text::fmt(width) + "\" height=\"" + text::fmt(height) +
         "\" viewBox=\"0 0 " + text::fmt(width) + " " + text::fmt(height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + text::fmt(width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         xml_escape(title) + "</text>\n";
}

inline void axis_text(std::string& out, double x, double y,
                      const std::string& anchor, const std::string& body,
                      const std::string& extra = "") {
  out += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" +
         anchor + "\"" + extra + ">" + xml_escape(body) + "</text>\n";
}

inline int tick_count(const AxisScale& s) {
  return static_cast<int>(std::round((s.hi - s.lo) / s.step));
}

// Tick values snapped to 1e-9 so labels never show accumulation dust.
inline std::string tick_label(double v) {
  return text::fmt(std::round(v * 1e9) / 1e9);
}

}  // namespace detail

inline std::string render_line_chart(const LineChartSpec& spec) {
  if (spec.series.empty())
    throw validation_error("a line chart needs at least one series");
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  bool first = true;
  for (const ChartSeries& s : spec.series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw validation_error("series '" + s.label +
                             "' must pair x and y samples");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw validation_error("series '" + s.label +
                               "' holds a non-finite sample");
      if (first) {
        x_lo = x_hi = s.x[i];
        y_lo = y_hi = s.y[i];
        first = false;
      }
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  detail::AxisScale xs = detail::nice_scale(x_lo, x_hi);
  detail::AxisScale ys = detail::nice_scale(std::min(0.0, y_lo), y_hi);
  detail::Frame f{56.0, 36.0, spec.width - 24.0, spec.height - 44.0};
  auto map_x = [&](double v) {
    return f.x0 + (v - xs.lo) / (xs.hi - xs.lo) * (f.x1 - f.x0);
  };
  auto map_y = [&](double v) {
    return f.y1 - (v - ys.lo) / (ys.hi - ys.lo) * (f.y1 - f.y0);
  };

  std::string out;
  detail::open_svg(out, spec.width, spec.height, spec.title);
  for (int k = 0; k <= detail::tick_count(ys); ++k) {
    double v = ys.lo + ys.step * k;
    out += "<line x1=\"" + detail::px(f.x0) + "\" y1=\"" + detail::px(map_y(v)) +
           "\" x2=\"" + detail::px(f.x1) + "\" y2=\"" + detail::px(map_y(v)) +
           "\" stroke=\"#dddddd\"/>\n";
    detail::axis_text(out, f.x0 - 6, map_y(v) + 4, "end",
                      detail::tick_label(v));
  }
  for (int k = 0; k <= detail::tick_count(xs); ++k) {
    double v = xs.lo + xs.step * k;
    out += "<line x1=\"" + detail::px(map_x(v)) + "\" y1=\"" + detail::px(f.y1) +
           "\" x2=\"" + detail::px(map_x(v)) + "\" y2=\"" +
           detail::px(f.y1 + 4) + "\" stroke=\"#444444\"/>\n";
    detail::axis_text(out, map_x(v), f.y1 + 18, "middle",
                      detail::tick_label(v));
  }
  out += "<rect x=\"" + detail::px(f.x0) + "\" y=\"" + detail::px(f.y0) +
         "\" width=\"" + detail::px(f.x1 - f.x0) + "\" height=\"" +
         detail::px(f.y1 - f.y0) + "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const ChartSeries& s = spec.series[si];
    const char* color = detail::kPalette[si % 6];
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i > 0) out += ' ';
      out += detail::px(map_x(s.x[i])) + "," + detail::px(map_y(s.y[i]));
    }
    out += "\"/>\n";
    if (!s.label.empty()) {
      double ly = f.y0 + 14 + 16.0 * static_cast<double>(si);
      out += "<line x1=\"" + detail::px(f.x1 - 110) + "\" y1=\"" +
             detail::px(ly - 4) + "\" x2=\"" + detail::px(f.x1 - 90) +
             "\" y2=\"" + detail::px(ly - 4) + "\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
      detail::axis_text(out, f.x1 - 84, ly, "start", s.label);
    }
  }
  detail::axis_text(out, (f.x0 + f.x1) / 2, spec.height - 8.0, "middle",
                    spec.x_label);
  detail::axis_text(out, 16, (f.y0 + f.y1) / 2, "middle", spec.y_label,
                    " transform=\"rotate(-90 16 " +
                        detail::px((f.y0 + f.y1) / 2) + ")\"");
  out += "</svg>\n";
  return out;
}

inline std::string render_dual_axis_chart(const DualAxisChartSpec& spec) {
  std::size_t n = spec.categories.size();
  if (n == 0) throw validation_error("a bar chart needs categories");
  if (spec.left_values.size() != n || spec.right_values.size() != n)
    throw validation_error("value lists must match the category count");
  double left_hi = 0.0, right_lo = 0.0, right_hi = 0.0;
  bool any_right = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.left_values[i]) left_hi = std::max(left_hi, *spec.left_values[i]);
    if (spec.right_values[i]) {
      double v = *spec.right_values[i];
      if (!any_right) {
        right_lo = right_hi = v;
        any_right = true;
      }
      right_lo = std::min(right_lo, v);
      right_hi = std::max(right_hi, v);
    }
  }
  detail::AxisScale ls = detail::nice_scale(0.0, left_hi > 0 ? left_hi : 1.0);
  detail::AxisScale rs = any_right ? detail::nice_scale(right_lo, right_hi)
                                   : detail::AxisScale{0.0, 1.0, 0.2};
  detail::Frame f{56.0, 36.0, spec.width - 56.0, spec.height - 44.0};
  auto map_left = [&](double v) {
    return f.y1 - (v - ls.lo) / (ls.hi - ls.lo) * (f.y1 - f.y0);
  };
  auto map_right = [&](double v) {
    return f.y1 - (v - rs.lo) / (rs.hi - rs.lo) * (f.y1 - f.y0);
  };
  double slot = (f.x1 - f.x0) / static_cast<double>(n);

  std::string out;
  detail::open_svg(out, spec.width, spec.height, spec.title);
  for (int k = 0; k <= detail::tick_count(ls); ++k) {
    double v = ls.lo + ls.step * k;
    out += "<line x1=\"" + detail::px(f.x0) + "\" y1=\"" +
           detail::px(map_left(v)) + "\" x2=\"" + detail::px(f.x1) +
           "\" y2=\"" + detail::px(map_left(v)) + "\" stroke=\"#dddddd\"/>\n";
    detail::axis_text(out, f.x0 - 6, map_left(v) + 4, "end",
                      detail::tick_label(v));
  }
  if (any_right)
    for (int k = 0; k <= detail::tick_count(rs); ++k) {
      double v = rs.lo + rs.step * k;
      detail::axis_text(out, f.x1 + 6, map_right(v) + 4, "start",
                        detail::tick_label(v));
    }
  for (std::size_t i = 0; i < n; ++i) {
    double cx = f.x0 + slot * (static_cast<double>(i) + 0.5);
    if (spec.left_values[i]) {
      double top = map_left(*spec.left_values[i]);
      out += "<rect x=\"" + detail::px(cx - slot * 0.3) + "\" y=\"" +
             detail::px(top) + "\" width=\"" + detail::px(slot * 0.6) +
             "\" height=\"" + detail::px(f.y1 - top) +
             "\" fill=\"#1f77b4\"/>\n";
    } else {
      detail::axis_text(out, cx, f.y1 - 6, "middle", "n/a",
                        " fill=\"#888888\"");
    }
    detail::axis_text(out, cx, f.y1 + 18, "middle", spec.categories[i]);
  }
  bool started = false;
  std::string points;
  for (std::size_t i = 0; i < n; ++i) {
    if (!spec.right_values[i]) continue;
    double cx = f.x0 + slot * (static_cast<double>(i) + 0.5);
    double cy = map_right(*spec.right_values[i]);
    if (started) points += ' ';
    points += detail::px(cx) + "," + detail::px(cy);
    started = true;
    out += "<circle cx=\"" + detail::px(cx) + "\" cy=\"" + detail::px(cy) +
           "\" r=\"3.5\" fill=\"#d62728\"/>\n";
  }
  if (started)
    out += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" "
           "points=\"" +
           points + "\"/>\n";
  out += "<rect x=\"" + detail::px(f.x0) + "\" y=\"" + detail::px(f.y0) +
         "\" width=\"" + detail::px(f.x1 - f.x0) + "\" height=\"" +
         detail::px(f.y1 - f.y0) + "\" fill=\"none\" stroke=\"#444444\"/>\n";
  detail::axis_text(out, 16, (f.y0 + f.y1) / 2, "middle", spec.left_label,
                    " transform=\"rotate(-90 16 " +
                        detail::px((f.y0 + f.y1) / 2) + ")\" fill=\"#1f77b4\"");
  detail::axis_text(out, spec.width - 16.0, (f.y0 + f.y1) / 2, "middle",
                    spec.right_label,
                    " transform=\"rotate(90 " +
                        detail::px(spec.width - 16.0) + " " +
                        detail::px((f.y0 + f.y1) / 2) + ")\" fill=\"#d62728\"");
  out += "</svg>\n";
  return out;
}

// Chart of one or more steady-state curves.
inline std::string curve_chart(const std::vector<ChartSeries>& series,
                               const std::string& title) {
  LineChartSpec spec;
  spec.title = title;
  spec.x_label = "drive voltage (V)";
  spec.y_label = "scattered intensity (a.u.)";
  spec.series = series;
  return render_line_chart(spec);
}

// Chart of a sweep: contrast ratio as bars, saturation voltage as markers.
inline std::string sweep_chart(const SweepResult& r) {
  DualAxisChartSpec spec;
  spec.title = std::string("sweep: ") + to_string(r.variable) +
               (r.units.empty() ? "" : " (" + r.units + ")");
  spec.left_label = "contrast ratio";
  spec.right_label = "saturation voltage (V)";
  for (const SweepRow& row : r.rows) {
    spec.categories.push_back(row.value);
    spec.left_values.push_back(row.cr);
    spec.right_values.push_back(row.v_sat_v);
  }
  return render_dual_axis_chart(spec);
}

}  // namespace duoglass
