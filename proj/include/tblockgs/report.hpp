#pragma once

#include "tblockgs/solvers.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tblockgs {

/**
 * Write a trace as CSV with header iter,rel_err,res_err,raw_residual,wall_ns.
 * Floating values carry 12 significant digits; rel_err / res_err are left
 * blank when the trace has no reference solution.  zero_wall replaces the
 * timing column with zeros so identical runs serialise to identical bytes.
 * Throws std::invalid_argument for an empty trace (no file is created) and
 * std::runtime_error naming the path on I/O failure.
 */
void write_trace_csv(const ConvergenceTrace& trace, const std::string& path,
                     bool zero_wall = false);

/// Parse a CSV produced by write_trace_csv.
ConvergenceTrace read_trace_csv(const std::string& path);

/// One plot series: a label and (iteration, value) points.
struct PlotSeries {
  std::string label;
  std::vector<std::pair<long, double>> points;
};

/// Pull one column of a trace into plottable points, skipping absent values.
enum class TraceField { rel_err, res_err, raw_residual };
PlotSeries trace_series(const ConvergenceTrace& trace, TraceField field,
                        const std::string& label);

/**
 * Self-contained SVG line plot: iteration on a linear x axis, values on a
 * log10 y axis, one polyline per series, legend in the top right.  Points
 * with non-positive or non-finite values are skipped.
 */
void write_plot_svg(const std::vector<PlotSeries>& series, const std::string& path,
                    const std::string& title, const std::string& y_label = "error");

}  // namespace tblockgs
