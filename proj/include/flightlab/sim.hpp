#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "flightlab/matcher.hpp"
#include "flightlab/trajectory.hpp"

namespace flightlab {

enum class SegmentKind { level_cruise, constant_rate_turn, climb, descent, s_turn };

std::string_view segment_kind_name(SegmentKind k) noexcept;

/// One flight segment. Speed is horizontal ground speed; turn_rate is signed
/// (positive = right, heading increasing) and, for s_turn, the peak rate of
/// a single sine period; climb_rate is vertical speed (negative for descent).
struct SegmentSpec {
  SegmentKind kind = SegmentKind::level_cruise;
  double duration = 10;     // s
  double speed = 100;       // m/s, (30, 160)
  double turn_rate = 0;     // deg/s
  double climb_rate = 0;    // m/s
};

struct SortieStart {
  double heading = 0;   // deg
  double altitude = 0;  // m
  std::string sortie_id;
};

/// Forward-Euler integration of the segment list from the origin. Recorded
/// velocities are the integrator's; roll follows the coordinated-turn bank
/// and pitch the flight-path angle. The seed drives a smooth position
/// perturbation of at most 0.5 m. Throws InvalidSegment.
Trajectory gen_good_sortie(std::uint64_t seed, const std::vector<SegmentSpec>& segments,
                           double dt = 0.2, const SortieStart& start = {});

enum class DefectKind { teleport, impossible_speed, frozen_midair, ground_idle, straight_line_only };

inline constexpr std::array<DefectKind, 5> kAllDefects = {
    DefectKind::teleport, DefectKind::impossible_speed, DefectKind::frozen_midair,
    DefectKind::ground_idle, DefectKind::straight_line_only};

std::string_view defect_kind_name(DefectKind k) noexcept;

/// magnitude: teleport = jump length (m); impossible_speed = length of the
/// compressed stretch (s); frozen_midair and ground_idle = hold time (s);
/// straight_line_only = line speed (m/s).
struct DefectSpec {
  DefectKind kind;
  double at = 0;
  double magnitude = 0;
};

/// Throws DefectOutOfRange when `at` lies outside the trajectory.
Trajectory inject_defect(const Trajectory& traj, const DefectSpec& defect);

/// Splices the template into the base from t_start, offsetting template
/// positions to the base and the remainder of the base to the template end.
/// The embedding is recorded as an annotation. Throws DoesNotFit.
Trajectory embed_template(const Trajectory& base, const ManeuverTemplate& tmpl, double t_start);

struct CorpusEntry {
  std::string sortie_id;
  std::string file;  // relative to the corpus directory
  bool truth_good = true;
  std::vector<DefectSpec> defects;
  std::vector<Annotation> embedded_templates;
};

struct CorpusManifest {
  std::uint64_t seed = 0;
  double dt = 0.2;
  std::vector<CorpusEntry> entries;  // sorted by sortie_id
};

nlohmann::json manifest_to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const nlohmann::json& j);
CorpusManifest load_manifest(const std::filesystem::path& path);

/// A generated sortie held in memory together with its manifest entry.
struct GeneratedSortie {
  CorpusEntry entry;
  Trajectory trajectory;
};

/// Random multi-segment good sortie: a climb out of the origin, then a mix of
/// segments that always includes a turn of at least 90 degrees.
Trajectory random_good_sortie(std::uint64_t seed, double dt = 0.2, std::string sortie_id = "");

/// Good sorties followed by bad ones (defect kinds round-robin), in memory.
std::vector<GeneratedSortie> generate_sorties(std::size_t n_good, std::size_t n_bad,
                                              std::uint64_t seed, double dt = 0.2);

/// Writes out_dir/good/*.tsv, out_dir/bad/*.tsv and out_dir/manifest.json.
CorpusManifest gen_corpus(std::size_t n_good, std::size_t n_bad, std::uint64_t seed,
                          const std::filesystem::path& out_dir, double dt = 0.2);

/// Bad-file count giving roughly an 88:12 good-to-bad ratio.
std::size_t imbalanced_bad_count(std::size_t n_good);

/// Five distinct maneuvers (left/right turn, climb, descent, S-turn), each
/// padded with one second of level flight, matched on roll, pitch and vz.
std::vector<ManeuverTemplate> standard_templates(double dt = 0.2);

}  // namespace flightlab
