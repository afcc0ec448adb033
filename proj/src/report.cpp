#include "tblockgs/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tblockgs {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void write_trace_csv(const ConvergenceTrace& trace, const std::string& path,
                     bool zero_wall) {
  if (trace.rows.empty())
    throw std::invalid_argument("write_trace_csv: empty trace");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iter,rel_err,res_err,raw_residual,wall_ns\n";
  for (const TraceRow& row : trace.rows) {
    out << row.k << ',';
    if (trace.has_oracle && std::isfinite(row.rel_err)) out << fmt_double(row.rel_err);
    out << ',';
    if (trace.has_oracle && std::isfinite(row.res_err)) out << fmt_double(row.res_err);
    out << ',' << fmt_double(row.raw_residual) << ','
        << (zero_wall ? 0LL : row.wall_ns) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ConvergenceTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("iter,", 0) != 0)
    throw std::runtime_error("bad trace header in " + path);

  ConvergenceTrace trace;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    TraceRow row;
    auto next = [&]() -> std::string {
      if (!std::getline(ss, field, ',')) throw std::runtime_error("short row in " + path);
      return field;
    };
    row.k = std::stol(next());
    const std::string rel = next();
    const std::string res = next();
    row.rel_err = rel.empty() ? nan : std::stod(rel);
    row.res_err = res.empty() ? nan : std::stod(res);
    row.raw_residual = std::stod(next());
    row.wall_ns = std::stoll(next());
    if (!rel.empty()) trace.has_oracle = true;
    trace.rows.push_back(row);
  }
  return trace;
}

PlotSeries trace_series(const ConvergenceTrace& trace, TraceField field,
                        const std::string& label) {
  PlotSeries s;
  s.label = label;
  for (const TraceRow& row : trace.rows) {
    double v = 0.0;
    switch (field) {
      case TraceField::rel_err: v = row.rel_err; break;
      case TraceField::res_err: v = row.res_err; break;
      case TraceField::raw_residual: v = row.raw_residual; break;
    }
    if (std::isfinite(v)) s.points.emplace_back(row.k, v);
  }
  return s;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string exp_label(int e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "1e%d", e);
  return buf;
}

}  // namespace

void write_plot_svg(const std::vector<PlotSeries>& series, const std::string& path,
                    const std::string& title, const std::string& y_label) {
  const double width = 820.0, height = 480.0;
  const double left = 70.0, right = width - 190.0, top = 48.0, bottom = height - 52.0;

  long kmin = 0, kmax = 1;
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = 0.0;
  bool any = false;
  for (const PlotSeries& s : series)
    for (const auto& [k, v] : s.points) {
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      if (!any) {
        kmin = kmax = k;
        any = true;
      } else {
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
      }
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  if (!any) {
    kmin = 0;
    kmax = 1;
    vmin = 0.1;
    vmax = 10.0;
  }
  if (kmax == kmin) kmax = kmin + 1;
  int emin = static_cast<int>(std::floor(std::log10(vmin)));
  int emax = static_cast<int>(std::ceil(std::log10(vmax)));
  if (emax <= emin) emax = emin + 1;

  auto xpos = [&](double k) {
    return left + (k - static_cast<double>(kmin)) /
                      (static_cast<double>(kmax) - static_cast<double>(kmin)) *
                      (right - left);
  };
  auto ypos = [&](double v) {
    const double lg = std::log10(v);
    return bottom - (lg - emin) / (emax - emin) * (bottom - top);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (left + right) / 2.0
      << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">"
      << title << "</text>\n";

  // horizontal grid and y tick labels at integer exponents
  const int estep = std::max(1, (emax - emin + 7) / 8);
  for (int e = emin; e <= emax; e += estep) {
    const double y = ypos(std::pow(10.0, e));
    out << "<line x1=\"" << fmt_coord(left) << "\" y1=\"" << fmt_coord(y) << "\" x2=\""
        << fmt_coord(right) << "\" y2=\"" << fmt_coord(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt_coord(left - 8) << "\" y=\"" << fmt_coord(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
        << exp_label(e) << "</text>\n";
  }
  // x ticks
  for (int t = 0; t <= 5; ++t) {
    const double k = kmin + (kmax - kmin) * (t / 5.0);
    const double x = xpos(k);
    out << "<line x1=\"" << fmt_coord(x) << "\" y1=\"" << fmt_coord(bottom)
        << "\" x2=\"" << fmt_coord(x) << "\" y2=\"" << fmt_coord(bottom + 5)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt_coord(x) << "\" y=\"" << fmt_coord(bottom + 19)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << static_cast<long>(std::lround(k)) << "</text>\n";
  }
  // axes
  out << "<line x1=\"" << fmt_coord(left) << "\" y1=\"" << fmt_coord(top) << "\" x2=\""
      << fmt_coord(left) << "\" y2=\"" << fmt_coord(bottom)
      << "\" stroke=\"black\" stroke-width=\"1.2\"/>\n";
  out << "<line x1=\"" << fmt_coord(left) << "\" y1=\"" << fmt_coord(bottom)
      << "\" x2=\"" << fmt_coord(right) << "\" y2=\"" << fmt_coord(bottom)
      << "\" stroke=\"black\" stroke-width=\"1.2\"/>\n";
  out << "<text x=\"" << (left + right) / 2.0 << "\" y=\"" << height - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">iteration"
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (top + bottom) / 2.0
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << (top + bottom) / 2.0 << ")\">" << y_label << " (log10)</text>\n";

  // series
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.6\" points=\"";
    bool first = true;
    for (const auto& [k, v] : series[i].points) {
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      if (!first) out << ' ';
      out << fmt_coord(xpos(static_cast<double>(k))) << ',' << fmt_coord(ypos(v));
      first = false;
    }
    out << "\"/>\n";
  }

  // legend
  const double lx = right + 14.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double ly = top + 8.0 + 20.0 * static_cast<double>(i);
    out << "<rect x=\"" << fmt_coord(lx) << "\" y=\"" << fmt_coord(ly)
        << "\" width=\"14\" height=\"4\" fill=\"" << kPalette[i % kPaletteSize]
        << "\"/>\n";
    out << "<text x=\"" << fmt_coord(lx + 20) << "\" y=\"" << fmt_coord(ly + 6)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[i].label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tblockgs
