#include "flightlab/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "flightlab/error.hpp"
#include "flightlab/tsv.hpp"

namespace flightlab {

namespace {

const std::vector<std::string> kJsonColumns = {"time",  "xEast", "yNorth", "zUp",   "vx",
                                               "vy",    "vz",    "head",   "pitch", "roll"};

struct Point {
  double x, y;
};

std::string escape_xml(std::string_view s) {
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

std::string svg_document(const PlotSpec& spec, const std::string& title,
                         const std::vector<Point>& pts) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                spec.width, spec.height, spec.width, spec.height);
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += buf;
  out += "<title>" + escape_xml(title) + "</title>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"%.3f\" points=\"",
                spec.stroke_width);
  out += buf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", pts[i].x, pts[i].y);
    out += buf;
  }
  out += "\"/>\n</svg>\n";
  return out;
}

// Maps the selected samples into the drawable box. With keep_aspect both
// axes share one scale and the plot is centred.
std::vector<Point> layout(const Trajectory& traj, const PlotSpec& spec, bool keep_aspect,
                          const std::function<Point(const TrajectorySample&)>& coord) {
  const auto idx = decimate_indices(traj.size(), spec.decimation);
  std::vector<Point> raw;
  raw.reserve(idx.size());
  for (auto i : idx) raw.push_back(coord(traj[i]));

  double x0 = raw[0].x, x1 = raw[0].x, y0 = raw[0].y, y1 = raw[0].y;
  for (const auto& p : raw) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double w = spec.width - 2.0 * spec.margin;
  const double h = spec.height - 2.0 * spec.margin;
  const double dx = x1 - x0, dy = y1 - y0;
  double sx = dx > 0 ? w / dx : 0;
  double sy = dy > 0 ? h / dy : 0;
  if (keep_aspect) {
    double s = 0;
    if (dx > 0 && dy > 0) s = std::min(sx, sy);
    else if (dx > 0) s = sx;
    else if (dy > 0) s = sy;
    sx = sy = s;
  }
  const double ox = spec.margin + (w - dx * sx) / 2;
  const double oy = spec.margin + (h - dy * sy) / 2;
  std::vector<Point> out;
  out.reserve(raw.size());
  for (const auto& p : raw) {
    const double px = ox + (p.x - x0) * sx;
    const double py = spec.height - (oy + (p.y - y0) * sy);
    out.push_back({std::clamp(px, double(spec.margin), double(spec.width - spec.margin)),
                   std::clamp(py, double(spec.margin), double(spec.height - spec.margin))});
  }
  return out;
}

}  // namespace

void PlotSpec::check() const {
  if (width < 64 || height < 64) throw Error(Errc::InvalidArgument, "plot width and height must be >= 64");
  if (margin < 0 || 2 * margin >= std::min(width, height)) {
    throw Error(Errc::InvalidArgument, "margin leaves no drawable area");
  }
  if (!(stroke_width > 0)) throw Error(Errc::InvalidArgument, "stroke width must be > 0");
  if (decimation < 2) throw Error(Errc::InvalidArgument, "decimation must keep >= 2 points");
}

std::vector<std::size_t> decimate_indices(std::size_t n, std::size_t max_points) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  if (n <= max_points || max_points < 2) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  out.reserve(max_points);
  for (std::size_t k = 0; k < max_points; ++k) {
    const auto i = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * static_cast<double>(n - 1) /
                     static_cast<double>(max_points - 1)));
    if (out.empty() || out.back() != i) out.push_back(i);
  }
  return out;
}

std::string render_topdown(const Trajectory& traj, const PlotSpec& spec) {
  spec.check();
  const auto pts = layout(traj, spec, true,
                          [](const TrajectorySample& s) { return Point{s.x_east, s.y_north}; });
  return svg_document(spec, traj.sortie_id() + " ground track", pts);
}

std::string render_altitude(const Trajectory& traj, const PlotSpec& spec) {
  spec.check();
  const auto pts =
      layout(traj, spec, false, [](const TrajectorySample& s) { return Point{s.t, s.z_up}; });
  return svg_document(spec, traj.sortie_id() + " altitude", pts);
}

nlohmann::json export_json(const Trajectory& traj) {
  auto rows = nlohmann::json::array();
  for (const auto& s : traj.samples()) {
    const auto f = s.fields();
    rows.push_back(nlohmann::json(std::vector<double>(f.begin(), f.end())));
  }
  return {{"sortie_id", traj.sortie_id()}, {"columns", kJsonColumns}, {"rows", std::move(rows)}};
}

Trajectory trajectory_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("columns").get<std::vector<std::string>>() != kJsonColumns) {
      throw Error(Errc::MalformedHeader, "unexpected trajectory columns");
    }
    std::vector<TrajectorySample> samples;
    std::size_t row_index = 0;
    for (const auto& row : doc.at("rows")) {
      ++row_index;
      if (!row.is_array() || row.size() != TrajectorySample::kFieldCount) {
        throw Error(Errc::MalformedRow, "row " + std::to_string(row_index) + " has wrong arity");
      }
      std::array<double, TrajectorySample::kFieldCount> f{};
      for (std::size_t c = 0; c < f.size(); ++c) f[c] = row[c].get<double>();
      samples.push_back(TrajectorySample::from_fields(f));
    }
    if (samples.empty()) throw Error(Errc::EmptyFile, "no rows");
    return Trajectory(doc.at("sortie_id").get<std::string>(), std::move(samples));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedRow, std::string("bad trajectory JSON: ") + e.what());
  }
}

}  // namespace flightlab
