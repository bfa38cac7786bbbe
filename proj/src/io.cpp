#include "grad2/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace grad2 {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  // avoid "-0.000"
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

std::string fmt_tick(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
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

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw InputError("malformed number '" + s + "' in CSV row " + std::to_string(row));
  return v;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const SystemConfig& s) {
  const std::size_t n = s.dimension();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",y" << i;
  out << ",E,V\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const State& z = traj.states[k];
    out << fmt17(traj.times[k]);
    for (double v : z.x) out << ',' << fmt17(v);
    for (double v : z.y) out << ',' << fmt17(v);
    out << ',' << fmt17(energy(s, z)) << ',' << fmt17(lyapunov(s, z)) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const SystemConfig& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  write_trajectory_csv(out, traj, s);
}

CsvTrajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV");
  const auto header = split(line, ',');
  if (header.size() < 5 || (header.size() - 3) % 2 != 0)
    throw InputError("malformed CSV header: " + line);
  CsvTrajectory out;
  out.dimension = (header.size() - 3) / 2;
  const std::size_t n = out.dimension;
  std::vector<std::string> expected{"t"};
  for (std::size_t i = 1; i <= n; ++i) expected.push_back("x" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) expected.push_back("y" + std::to_string(i));
  expected.push_back("E");
  expected.push_back("V");
  if (header != expected) throw InputError("malformed CSV header: " + line);

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw InputError("CSV row " + std::to_string(row) + " has the wrong number of columns");
    State z{Vec(n), Vec(n)};
    out.times.push_back(parse_double(cells[0], row));
    for (std::size_t i = 0; i < n; ++i) {
      z.x[i] = parse_double(cells[1 + i], row);
      z.y[i] = parse_double(cells[1 + n + i], row);
    }
    out.states.push_back(std::move(z));
    out.energy.push_back(parse_double(cells[1 + 2 * n], row));
    out.lyapunov.push_back(parse_double(cells[2 + 2 * n], row));
  }
  return out;
}

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_trajectory_csv(in);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kLeft = 70.0;
constexpr double kRight = 640.0;  // legend lives to the right
constexpr double kTop = 40.0;
constexpr double kBottom = 540.0;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double half = std::max(0.5, 0.05 * std::abs(lo));
    return {lo - half, hi + half};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string render_phase_svg(const std::vector<LabeledTrajectory>& trajectories,
                             const PhaseSvgOptions& options) {
  if (trajectories.empty()) throw InputError("phase portrait needs at least one trajectory");
  const std::size_t c = options.coordinate;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& lt : trajectories) {
    if (lt.trajectory == nullptr || lt.trajectory->size() == 0)
      throw InputError("phase portrait: empty trajectory '" + lt.label + "'");
    for (const auto& z : lt.trajectory->states) {
      if (c >= z.x.size()) throw InputError("phase portrait: coordinate out of range");
      xlo = std::min(xlo, z.x[c]);
      xhi = std::max(xhi, z.x[c]);
      ylo = std::min(ylo, z.y[c]);
      yhi = std::max(yhi, z.y[c]);
    }
  }
  const Range xr = padded(xlo, xhi);
  const Range yr = padded(ylo, yhi);
  const auto px = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft); };
  const auto py = [&](double v) { return kBottom - (v - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  if (!options.title.empty())
    svg << "<text x=\"" << fmt3((kLeft + kRight) / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-size=\"15\">" << xml_escape(options.title) << "</text>\n";
  svg << "<rect x=\"" << fmt3(kLeft) << "\" y=\"" << fmt3(kTop) << "\" width=\""
      << fmt3(kRight - kLeft) << "\" height=\"" << fmt3(kBottom - kTop)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // zero axes when in view
  if (xr.lo < 0.0 && xr.hi > 0.0)
    svg << "<line x1=\"" << fmt3(px(0.0)) << "\" y1=\"" << fmt3(kTop) << "\" x2=\"" << fmt3(px(0.0))
        << "\" y2=\"" << fmt3(kBottom) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  if (yr.lo < 0.0 && yr.hi > 0.0)
    svg << "<line x1=\"" << fmt3(kLeft) << "\" y1=\"" << fmt3(py(0.0)) << "\" x2=\"" << fmt3(kRight)
        << "\" y2=\"" << fmt3(py(0.0)) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    svg << "<text x=\"" << fmt3(px(fx)) << "\" y=\"" << fmt3(kBottom + 16)
        << "\" text-anchor=\"middle\">" << fmt_tick(fx) << "</text>\n";
    svg << "<text x=\"" << fmt3(kLeft - 6) << "\" y=\"" << fmt3(py(fy) + 4)
        << "\" text-anchor=\"end\">" << fmt_tick(fy) << "</text>\n";
  }
  svg << "<text x=\"" << fmt3((kLeft + kRight) / 2) << "\" y=\"" << fmt3(kBottom + 40)
      << "\" text-anchor=\"middle\" font-size=\"14\">u</text>\n";
  svg << "<text x=\"20\" y=\"" << fmt3((kTop + kBottom) / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\">u&#775;</text>\n";

  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    const auto& states = trajectories[i].trajectory->states;
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < states.size(); ++k) {
      if (k > 0) svg << ' ';
      svg << fmt3(px(states[k].x[c])) << ',' << fmt3(py(states[k].y[c]));
    }
    svg << "\"/>\n";
    svg << "<circle cx=\"" << fmt3(px(states.front().x[c])) << "\" cy=\""
        << fmt3(py(states.front().y[c])) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
  }

  const double lx = kRight + 20.0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    const double ly = kTop + 10.0 + 20.0 * static_cast<double>(i);
    svg << "<line x1=\"" << fmt3(lx) << "\" y1=\"" << fmt3(ly) << "\" x2=\"" << fmt3(lx + 24)
        << "\" y2=\"" << fmt3(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt3(lx + 30) << "\" y=\"" << fmt3(ly + 4) << "\">"
        << xml_escape(trajectories[i].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_phase_svg(const std::vector<LabeledTrajectory>& trajectories,
                      const std::filesystem::path& out_path, const PhaseSvgOptions& options) {
  const std::string svg = render_phase_svg(trajectories, options);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot open " + out_path.string() + " for writing");
  out << svg;
}

}  // namespace grad2
