#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "grad2/integrators.hpp"

namespace grad2 {

/// Header `t,x1..xN,y1..yN,E,V`; one row per sample, 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const SystemConfig& s);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const SystemConfig& s);

/// Parsed CSV rows. The E and V columns are kept as written.
struct CsvTrajectory {
  std::size_t dimension = 0;
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> energy;
  std::vector<double> lyapunov;
};

/// Reads a file produced by write_trajectory_csv. InputError on a malformed
/// header or row.
CsvTrajectory read_trajectory_csv(std::istream& in);
CsvTrajectory read_trajectory_csv(const std::filesystem::path& path);

struct LabeledTrajectory {
  std::string label;
  const Trajectory* trajectory = nullptr;
};

struct PhaseSvgOptions {
  std::string title;
  std::size_t coordinate = 0;  // which position/velocity pair to draw when N > 1
};

/// Standalone 800x600 SVG phase portrait (y against x): one polyline per
/// trajectory from a fixed colour cycle, a filled circle at each initial
/// point and a legend. Output bytes depend only on the inputs.
std::string render_phase_svg(const std::vector<LabeledTrajectory>& trajectories,
                             const PhaseSvgOptions& options = {});
void render_phase_svg(const std::vector<LabeledTrajectory>& trajectories,
                      const std::filesystem::path& out_path, const PhaseSvgOptions& options = {});

}  // namespace grad2
