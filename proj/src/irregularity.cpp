#include "flightlab/irregularity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>

#include "flightlab/error.hpp"
#include "flightlab/tsv.hpp"

namespace flightlab {

void DetectorConfig::check() const {
  const std::pair<const char*, double> fields[] = {
      {"ground_altitude_max", ground_altitude_max},
      {"slow_speed_max", slow_speed_max},
      {"persistence_min", persistence_min},
      {"impossible_speed_min", impossible_speed_min},
      {"teleport_distance_min", teleport_distance_min}};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value) || !(value > 0)) {
      throw Error(Errc::InvalidArgument, std::string(name) + " must be > 0");
    }
  }
}

void DetectorConfig::apply(const std::map<std::string, std::string>& kv) {
  const std::pair<const char*, double*> fields[] = {
      {"ground_altitude_max", &ground_altitude_max},
      {"slow_speed_max", &slow_speed_max},
      {"persistence_min", &persistence_min},
      {"impossible_speed_min", &impossible_speed_min},
      {"teleport_distance_min", &teleport_distance_min}};
  for (const auto& [name, target] : fields) {
    auto it = kv.find(name);
    if (it == kv.end()) continue;
    try {
      std::size_t used = 0;
      *target = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(it->second);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidArgument, "bad value for " + it->first + ": " + it->second);
    }
  }
  check();
}

std::map<std::string, std::string> parse_key_value(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  std::map<std::string, std::string> kv;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty() && line.front() != '[') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(Errc::InvalidArgument, "expected key=value: " + std::string(line));
      }
      kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    start = end + 1;
  }
  return kv;
}

DetectorConfig load_detector_config(const std::filesystem::path& path) {
  DetectorConfig cfg;
  cfg.apply(parse_key_value(read_text_file(path)));
  return cfg;
}

std::string_view behavior_label(Behavior b) noexcept {
  switch (b) {
    case Behavior::taxiing_or_stopped: return "Taxiing or Stopped on Ground";
    case Behavior::irregular_stopping: return "Irregular Stopping";
    case Behavior::teleportation_or_impossible_speed: return "Teleportation or Impossible Speeds";
  }
  return "";
}

std::string_view behavior_name(Behavior b) noexcept {
  switch (b) {
    case Behavior::taxiing_or_stopped: return "taxiing_or_stopped";
    case Behavior::irregular_stopping: return "irregular_stopping";
    case Behavior::teleportation_or_impossible_speed: return "teleportation_or_impossible_speed";
  }
  return "";
}

namespace {

// Coalesces runs of qualifying inter-sample intervals [t_i, t_{i+1}].
std::vector<FlaggedInterval> runs(const Trajectory& traj, Behavior kind, double min_duration,
                                  const std::function<bool(std::size_t)>& qualifies) {
  std::vector<FlaggedInterval> out;
  const auto s = traj.samples();
  std::size_t i = 0;
  while (i + 1 < s.size()) {
    if (!qualifies(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < s.size() && qualifies(j)) ++j;
    const double t0 = s[i].t;
    const double t1 = s[j].t;
    if (t1 - t0 + 1e-9 >= min_duration) out.push_back({kind, t0, t1});
    i = j;
  }
  return out;
}

}  // namespace

std::vector<FlaggedInterval> detect_taxiing(const Trajectory& traj, const DetectorConfig& cfg) {
  const auto speed = derived_speed(traj);
  const auto s = traj.samples();
  return runs(traj, Behavior::taxiing_or_stopped, cfg.persistence_min, [&](std::size_t i) {
    return s[i].z_up < cfg.ground_altitude_max && speed.ground[i] < cfg.slow_speed_max;
  });
}

std::vector<FlaggedInterval> detect_irregular_stop(const Trajectory& traj,
                                                   const DetectorConfig& cfg) {
  const auto speed = derived_speed(traj);
  const auto s = traj.samples();
  return runs(traj, Behavior::irregular_stopping, cfg.persistence_min, [&](std::size_t i) {
    return s[i].z_up >= cfg.ground_altitude_max && speed.total[i] < cfg.slow_speed_max;
  });
}

std::vector<FlaggedInterval> detect_teleport(const Trajectory& traj, const DetectorConfig& cfg) {
  std::vector<FlaggedInterval> out;
  const auto s = traj.samples();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double dx = s[i + 1].x_east - s[i].x_east;
    const double dy = s[i + 1].y_north - s[i].y_north;
    const double dz = s[i + 1].z_up - s[i].z_up;
    const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double dt = s[i + 1].t - s[i].t;
    if (dist > cfg.teleport_distance_min && dist / dt > cfg.impossible_speed_min) {
      out.push_back({Behavior::teleportation_or_impossible_speed, s[i].t, s[i + 1].t});
    }
  }
  return out;
}

std::vector<FlaggedInterval> detect_impossible_speed(const Trajectory& traj,
                                                     const DetectorConfig& cfg) {
  const auto speed = derived_speed(traj);
  return runs(traj, Behavior::teleportation_or_impossible_speed, 0.0,
              [&](std::size_t i) { return speed.total[i] > cfg.impossible_speed_min; });
}

IrregularityReport label_sortie(const Trajectory& traj, const DetectorConfig& cfg) {
  cfg.check();
  IrregularityReport report;
  report.sortie_id = traj.sortie_id();
  auto taxi = detect_taxiing(traj, cfg);
  auto stop = detect_irregular_stop(traj, cfg);
  report.flags.insert(report.flags.end(), taxi.begin(), taxi.end());
  report.flags.insert(report.flags.end(), stop.begin(), stop.end());

  // Jumps and fast runs share one category; touching findings merge.
  auto jumps = detect_teleport(traj, cfg);
  auto fast = detect_impossible_speed(traj, cfg);
  jumps.insert(jumps.end(), fast.begin(), fast.end());
  std::sort(jumps.begin(), jumps.end(),
            [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
  std::vector<FlaggedInterval> merged;
  for (const auto& f : jumps) {
    if (!merged.empty() && f.t_start <= merged.back().t_end) {
      merged.back().t_end = std::max(merged.back().t_end, f.t_end);
    } else {
      merged.push_back(f);
    }
  }
  report.flags.insert(report.flags.end(), merged.begin(), merged.end());

  std::sort(report.flags.begin(), report.flags.end(), [](const auto& a, const auto& b) {
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    return a.kind < b.kind;
  });
  report.clean = report.flags.empty();
  return report;
}

std::string write_report(std::vector<IrregularityReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const auto& a, const auto& b) { return a.sortie_id < b.sortie_id; });
  std::string out = "Sortie Num,Behavior,t_start,t_end\n";
  char buf[64];
  for (const auto& r : reports) {
    auto flags = r.flags;
    std::stable_sort(flags.begin(), flags.end(),
                     [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
    for (const auto& f : flags) {
      out += r.sortie_id;
      out += ',';
      out += behavior_label(f.kind);
      std::snprintf(buf, sizeof buf, ",%.3f,%.3f\n", f.t_start, f.t_end);
      out += buf;
    }
  }
  return out;
}

}  // namespace flightlab
