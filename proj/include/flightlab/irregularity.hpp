#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "flightlab/trajectory.hpp"

namespace flightlab {

/// Detector thresholds. Comparisons on speed and altitude are strict.
struct DetectorConfig {
  double ground_altitude_max = 0.9144;  // 3 ft
  double slow_speed_max = 2.0;          // m/s
  double persistence_min = 5.0;         // s
  double impossible_speed_min = 180.0;  // m/s
  double teleport_distance_min = 500.0; // m

  /// Throws InvalidArgument unless every threshold is finite and > 0.
  void check() const;

  /// Overrides fields from flat key=value pairs (keys as the member names).
  void apply(const std::map<std::string, std::string>& kv);
};

DetectorConfig load_detector_config(const std::filesystem::path& path);

/// Parses "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_value(std::string_view text);

enum class Behavior { taxiing_or_stopped, irregular_stopping, teleportation_or_impossible_speed };

/// Spreadsheet label, e.g. "Taxiing or Stopped on Ground".
std::string_view behavior_label(Behavior b) noexcept;
std::string_view behavior_name(Behavior b) noexcept;

struct FlaggedInterval {
  Behavior kind;
  double t_start;
  double t_end;

  bool operator==(const FlaggedInterval&) const = default;
};

struct IrregularityReport {
  std::string sortie_id;
  std::vector<FlaggedInterval> flags;  // sorted by t_start
  bool clean = true;
};

/// Low (z below ground_altitude_max) and slow (ground speed below
/// slow_speed_max) for at least persistence_min.
std::vector<FlaggedInterval> detect_taxiing(const Trajectory& traj, const DetectorConfig& cfg);

/// Nearly stationary (total speed) at or above ground_altitude_max.
std::vector<FlaggedInterval> detect_irregular_stop(const Trajectory& traj,
                                                   const DetectorConfig& cfg);

/// One event per sample pair with a jump longer than teleport_distance_min
/// that also implies a speed above impossible_speed_min.
std::vector<FlaggedInterval> detect_teleport(const Trajectory& traj, const DetectorConfig& cfg);

std::vector<FlaggedInterval> detect_impossible_speed(const Trajectory& traj,
                                                     const DetectorConfig& cfg);

IrregularityReport label_sortie(const Trajectory& traj, const DetectorConfig& cfg = {});

/// CSV: "Sortie Num,Behavior,t_start,t_end"; clean sorties are omitted.
std::string write_report(std::vector<IrregularityReport> reports);

}  // namespace flightlab
