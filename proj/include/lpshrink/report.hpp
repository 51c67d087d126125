#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "lpshrink/format.hpp"

namespace lpshrink {

/// One cell of a risk sweep. Column set and order are fixed; optional cells
/// are emitted empty when not applicable.
struct ReportRow {
  int d = 0;
  std::string p;
  double alpha = 0.0;
  std::string phi;  // resolved spec string, e.g. "constant:6"
  std::string scale_mode;
  std::optional<int> n;
  double theta_norm = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  double risk_mean = 0.0;
  double risk_stderr = 0.0;
  std::optional<double> sure_mean;
  std::optional<double> zeroed_fraction;
};

inline std::string report_csv_header() {
  return "d,p,alpha,phi,scale_mode,n,theta_norm,reps,seed,risk_mean,risk_stderr,sure_mean,"
         "zeroed_fraction";
}

inline std::string to_csv(const ReportRow& r) {
  std::string out;
  out += std::to_string(r.d);
  out += ',';
  out += r.p;
  out += ',';
  out += format_double(r.alpha);
  out += ',';
  out += r.phi;
  out += ',';
  out += r.scale_mode;
  out += ',';
  if (r.n) out += std::to_string(*r.n);
  out += ',';
  out += format_double(r.theta_norm);
  out += ',';
  out += format_u64(r.reps);
  out += ',';
  out += format_u64(r.seed);
  out += ',';
  out += format_double(r.risk_mean);
  out += ',';
  out += format_double(r.risk_stderr);
  out += ',';
  if (r.sure_mean) out += format_double(*r.sure_mean);
  out += ',';
  if (r.zeroed_fraction) out += format_double(*r.zeroed_fraction);
  return out;
}

namespace detail {

inline std::string svg_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

/// Round tick spacing to 1/2/5 times a power of ten.
inline double nice_step(double span, int target_ticks) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  double step = 10.0;
  if (frac <= 1.0) step = 1.0;
  else if (frac <= 2.0) step = 2.0;
  else if (frac <= 5.0) step = 5.0;
  return step * mag;
}

}  // namespace detail

/// Static 800x600 line chart of risk_mean against theta_norm with a dashed
/// horizontal reference line (the benchmark risk d). No interactivity, no
/// external assets.
inline std::string render_risk_curve_svg(const std::vector<ReportRow>& rows,
                                         double reference_level,
                                         const std::string& title = "risk curve") {
  const double width = 800.0, height = 600.0;
  const double ml = 70.0, mr = 30.0, mt = 50.0, mb = 60.0;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = reference_level * 1.2 + 1e-12;
  if (!rows.empty()) {
    xmin = rows.front().theta_norm;
    xmax = rows.front().theta_norm;
    ymin = rows.front().risk_mean;
    ymax = rows.front().risk_mean;
    for (const auto& r : rows) {
      xmin = std::min(xmin, r.theta_norm);
      xmax = std::max(xmax, r.theta_norm);
      ymin = std::min(ymin, r.risk_mean);
      ymax = std::max(ymax, r.risk_mean);
    }
    ymin = std::min(ymin, reference_level);
    ymax = std::max(ymax, reference_level);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  const double ypad = 0.08 * (ymax - ymin + 1e-12);
  ymin -= ypad;
  ymax += ypad;

  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  svg += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"18\">" + title + "</text>\n";

  // axes
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt + ph) +
         "\" x2=\"" + detail::svg_num(ml + pw) + "\" y2=\"" + detail::svg_num(mt + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
         detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(mt + ph) + "\" stroke=\"black\"/>\n";

  const double xstep = detail::nice_step(xmax - xmin, 6);
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep) {
    svg += "<line x1=\"" + detail::svg_num(sx(x)) + "\" y1=\"" + detail::svg_num(mt + ph) +
           "\" x2=\"" + detail::svg_num(sx(x)) + "\" y2=\"" + detail::svg_num(mt + ph + 6) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::svg_num(sx(x)) + "\" y=\"" + detail::svg_num(mt + ph + 22) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           format_double(x) + "</text>\n";
  }
  const double ystep = detail::nice_step(ymax - ymin, 6);
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep; y += ystep) {
    svg += "<line x1=\"" + detail::svg_num(ml - 6) + "\" y1=\"" + detail::svg_num(sy(y)) +
           "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(sy(y)) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::svg_num(ml - 10) + "\" y=\"" + detail::svg_num(sy(y) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
           format_double(y) + "</text>\n";
  }

  svg += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" + detail::svg_num(height - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">theta_norm"
         "</text>\n";
  svg += "<text x=\"18\" y=\"" + detail::svg_num(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" transform=\""
         "rotate(-90 18 " + detail::svg_num(mt + ph / 2) + ")\">risk_mean</text>\n";

  // reference line at the benchmark risk
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(sy(reference_level)) +
         "\" x2=\"" + detail::svg_num(ml + pw) + "\" y2=\"" +
         detail::svg_num(sy(reference_level)) +
         "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  svg += "<text x=\"" + detail::svg_num(ml + pw - 4) + "\" y=\"" +
         detail::svg_num(sy(reference_level) - 6) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"gray\">d = " +
         format_double(reference_level) + "</text>\n";

  if (!rows.empty()) {
    std::string points;
    for (const auto& r : rows) {
      if (!points.empty()) points += ' ';
      points += detail::svg_num(sx(r.theta_norm)) + "," + detail::svg_num(sy(r.risk_mean));
    }
    svg += "<polyline fill=\"none\" stroke=\"#1f4e96\" stroke-width=\"2\" points=\"" + points +
           "\"/>\n";
    for (const auto& r : rows) {
      svg += "<circle cx=\"" + detail::svg_num(sx(r.theta_norm)) + "\" cy=\"" +
             detail::svg_num(sy(r.risk_mean)) + "\" r=\"3.5\" fill=\"#1f4e96\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace lpshrink
