#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "flightlab/trajectory.hpp"

namespace flightlab {

struct PlotSpec {
  int width = 800;
  int height = 600;
  int margin = 20;
  double stroke_width = 1.5;
  std::size_t decimation = 5000;  // max polyline vertices

  void check() const;  // throws InvalidArgument
};

/// Indices of at most max_points samples out of n, first and last kept.
std::vector<std::size_t> decimate_indices(std::size_t n, std::size_t max_points);

/// Ground track (x_east, y_north) as an SVG document, aspect ratio preserved.
std::string render_topdown(const Trajectory& traj, const PlotSpec& spec = {});

/// Altitude profile (t, z_up) as an SVG document.
std::string render_altitude(const Trajectory& traj, const PlotSpec& spec = {});

/// {"sortie_id", "columns": [...], "rows": [[...], ...]}
nlohmann::json export_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& doc);

}  // namespace flightlab
