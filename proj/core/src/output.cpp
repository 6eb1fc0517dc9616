#include "lowgain/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace lowgain::cli {

namespace {

void append_number(std::string& out, double v) {
  if (std::isnan(v)) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw Error(ErrorKind::ConfigParse, "bad CSV number '" + cell + "'");
  }
  return v;
}

int count_prefixed(const std::vector<std::string>& header, const std::string& prefix) {
  int count = 0;
  while (std::find(header.begin(), header.end(), prefix + std::to_string(count + 1)) !=
         header.end()) {
    ++count;
  }
  return count;
}

}  // namespace

std::vector<std::string> csv_header(const sim::Trajectory& traj) {
  std::vector<std::string> cols{"t"};
  const Eigen::Index n = traj.x.empty() ? 0 : traj.x.front().size();
  const Eigen::Index m = traj.u.empty() ? 0 : traj.u.front().size();
  for (Eigen::Index i = 1; i <= n; ++i) cols.push_back("x" + std::to_string(i));
  for (Eigen::Index i = 1; i <= m; ++i) cols.push_back("u" + std::to_string(i));
  if (traj.observer) {
    for (Eigen::Index i = 1; i <= n; ++i) cols.push_back("xi" + std::to_string(i));
    cols.emplace_back("e_norm");
  }
  for (const char* c : {"gamma", "norm_x", "V0", "V"}) cols.emplace_back(c);
  return cols;
}

std::string trajectory_csv(const sim::Trajectory& traj) {
  std::string out;
  const auto header = csv_header(traj);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    append_number(out, traj.times[k]);
    auto put = [&](double v) {
      out += ',';
      append_number(out, v);
    };
    for (Eigen::Index i = 0; i < traj.x[k].size(); ++i) put(traj.x[k](i));
    for (Eigen::Index i = 0; i < traj.u[k].size(); ++i) put(traj.u[k](i));
    if (traj.observer) {
      for (Eigen::Index i = 0; i < traj.xi[k].size(); ++i) put(traj.xi[k](i));
      put(traj.normE[k]);
    }
    put(traj.gammas[k]);
    put(traj.normX[k]);
    put(traj.V0[k]);
    put(traj.V[k]);
    out += '\n';
  }
  return out;
}

void write_trajectory_csv(const sim::Trajectory& traj, const std::string& path) {
  write_text_file(path, trajectory_csv(traj));
}

sim::Trajectory parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ConfigParse, "empty CSV");
  const auto header = split(line, ',');
  const int n = count_prefixed(header, "x");
  const int m = count_prefixed(header, "u");
  sim::Trajectory traj;
  traj.observer = count_prefixed(header, "xi") > 0;
  const std::size_t width = 1 + n + m + (traj.observer ? n + 1 : 0) + 4;
  if (n == 0 || header.size() != width || header.front() != "t") {
    throw Error(ErrorKind::ConfigParse, "unexpected CSV header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != width) throw Error(ErrorKind::ConfigParse, "ragged CSV row");
    std::size_t c = 0;
    auto next = [&]() { return parse_cell(cells[c++]); };
    traj.times.push_back(next());
    sim::Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = next();
    sim::Vector u(m);
    for (int i = 0; i < m; ++i) u(i) = next();
    traj.x.push_back(x);
    traj.u.push_back(u);
    if (traj.observer) {
      sim::Vector xi(n);
      for (int i = 0; i < n; ++i) xi(i) = next();
      traj.xi.push_back(xi);
      traj.e.push_back(xi - x);
      traj.normE.push_back(next());
    }
    traj.gammas.push_back(next());
    traj.normX.push_back(next());
    traj.V0.push_back(next());
    traj.V.push_back(next());
  }
  return traj;
}

sim::Trajectory read_trajectory_csv(const std::string& path) {
  return parse_trajectory_csv(read_text_file(path));
}

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

}  // namespace

std::string norm_plot_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  constexpr double width = 720.0;
  constexpr double height = 420.0;
  constexpr double left = 70.0;
  constexpr double right = 20.0;
  constexpr double top = 40.0;
  constexpr double bottom = 50.0;
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;
  double lmin = tmin;
  double lmax = -tmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.times.size() && i < s.values.size(); ++i) {
      const double v = s.values[i];
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      tmin = std::min(tmin, s.times[i]);
      tmax = std::max(tmax, s.times[i]);
      lmin = std::min(lmin, std::log10(v));
      lmax = std::max(lmax, std::log10(v));
    }
  }
  if (!std::isfinite(tmin)) {
    tmin = 0.0;
    tmax = 1.0;
    lmin = -1.0;
    lmax = 1.0;
  }
  lmin = std::floor(lmin);
  lmax = std::max(std::ceil(lmax), lmin + 1.0);
  if (tmax <= tmin) tmax = tmin + 1.0;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double t) { return left + (t - tmin) / (tmax - tmin) * pw; };
  auto py = [&](double l) { return top + (lmax - l) / (lmax - lmin) * ph; };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double l = lmin; l <= lmax + 1e-9; l += 1.0) {
    svg << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(l) << "\" y2=\""
        << py(l) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << left - 6 << "\" y=\"" << py(l) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">1e" << static_cast<int>(l) << "</text>\n";
  }
  svg << "<text x=\"" << left << "\" y=\"" << height - 15 << "\" font-size=\"11\">t = " << tmin
      << "</text>\n"
      << "<text x=\"" << left + pw << "\" y=\"" << height - 15
      << "\" text-anchor=\"end\" font-size=\"11\">t = " << tmax << "</text>\n";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::size_t count = std::min(s.times.size(), s.values.size());
    const std::size_t stride = std::max<std::size_t>(1, count / 2000);
    svg << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" points=\"";
    for (std::size_t i = 0; i < count; i += stride) {
      const double v = s.values[i];
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      svg << px(s.times[i]) << ',' << py(std::log10(v)) << ' ';
    }
    svg << "\"/>\n"
        << "<text x=\"" << left + pw - 10 << "\" y=\"" << top + 16 + 14 * static_cast<double>(k)
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << colors[k % 6] << "\">" << xml_escape(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_norm_plot_svg(const std::vector<PlotSeries>& series, const std::string& title,
                         const std::string& path) {
  write_text_file(path, norm_plot_svg(series, title));
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lowgain::cli
