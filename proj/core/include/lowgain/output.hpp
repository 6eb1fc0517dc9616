#pragma once

#include <string>
#include <vector>

#include "lowgain/sim.hpp"

namespace lowgain::cli {

/// Columns: t, x1..xn, u1..um, [xi1..xin, e_norm], gamma, norm_x, V0, V.
/// Values use 17 significant digits; NaN is written as an empty field.
[[nodiscard]] std::vector<std::string> csv_header(const sim::Trajectory& traj);
void write_trajectory_csv(const sim::Trajectory& traj, const std::string& path);
[[nodiscard]] std::string trajectory_csv(const sim::Trajectory& traj);
/// Inverse of trajectory_csv; the observer layout is detected from the header.
[[nodiscard]] sim::Trajectory parse_trajectory_csv(const std::string& text);
[[nodiscard]] sim::Trajectory read_trajectory_csv(const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<double> times;
  std::vector<double> values;
};

/// Log-scale line chart. Nonpositive and non-finite values are skipped.
[[nodiscard]] std::string norm_plot_svg(const std::vector<PlotSeries>& series,
                                        const std::string& title);
void write_norm_plot_svg(const std::vector<PlotSeries>& series, const std::string& title,
                         const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
[[nodiscard]] std::string read_text_file(const std::string& path);

}  // namespace lowgain::cli
