#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flightlab {

/// One recorded row: time, local ENU position, velocity and attitude.
struct TrajectorySample {
  double t = 0;        // s
  double x_east = 0;   // m
  double y_north = 0;  // m
  double z_up = 0;     // m
  double vx = 0;       // m/s
  double vy = 0;       // m/s
  double vz = 0;       // m/s
  double heading = 0;  // deg, [0, 360)
  double pitch = 0;    // deg, [-90, 90]
  double roll = 0;     // deg, [-180, 180]

  static constexpr std::size_t kFieldCount = 10;

  std::array<double, kFieldCount> fields() const {
    return {t, x_east, y_north, z_up, vx, vy, vz, heading, pitch, roll};
  }
  static TrajectorySample from_fields(const std::array<double, kFieldCount>& f) {
    return {f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9]};
  }

  bool operator==(const TrajectorySample&) const = default;
};

struct ValidationIssue {
  enum class Kind { non_monotonic_time, non_finite_value, short_record, column_mismatch };

  Kind kind;
  std::size_t row_index;  // 1-based data row
  std::string detail;
};

std::string_view issue_kind_name(ValidationIssue::Kind kind) noexcept;

/// Checks the sample-level invariants; an empty result means the samples form
/// a valid Trajectory (after angle normalization).
std::vector<ValidationIssue> validate_samples(std::span<const TrajectorySample> samples);

double normalize_heading(double deg);
double normalize_roll(double deg);

/// A named time interval attached to a trajectory, e.g. an embedded template.
struct Annotation {
  std::string name;
  double t_start = 0;
  double t_end = 0;

  bool operator==(const Annotation&) const = default;
};

/// One sortie. Immutable once constructed; the constructor enforces
/// strictly increasing time, at least two samples and finite values.
class Trajectory {
 public:
  Trajectory(std::string sortie_id, std::vector<TrajectorySample> samples,
             std::optional<std::string> source = std::nullopt);

  const std::string& sortie_id() const noexcept { return sortie_id_; }
  std::span<const TrajectorySample> samples() const noexcept { return samples_; }
  const TrajectorySample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const noexcept { return samples_.size(); }
  const std::optional<std::string>& source() const noexcept { return source_; }

  double t_first() const noexcept { return samples_.front().t; }
  double t_last() const noexcept { return samples_.back().t; }
  double duration() const noexcept { return t_last() - t_first(); }

  const std::vector<Annotation>& annotations() const noexcept { return annotations_; }
  Trajectory with_annotation(Annotation a) const;
  Trajectory with_id(std::string sortie_id) const;

  /// Contiguous slice [begin, end) as a new trajectory (needs >= 2 samples).
  Trajectory slice(std::size_t begin, std::size_t end) const;

 private:
  std::string sortie_id_;
  std::vector<TrajectorySample> samples_;
  std::optional<std::string> source_;
  std::vector<Annotation> annotations_;
};

enum class Channel {
  x_east,
  y_north,
  z_up,
  vx,
  vy,
  vz,
  heading,
  pitch,
  roll,
  ground_speed,
  total_speed,
  derived_vx,
  derived_vy,
  derived_vz,
};

inline constexpr std::array<Channel, 14> kAllChannels = {
    Channel::x_east,      Channel::y_north,     Channel::z_up,         Channel::vx,
    Channel::vy,          Channel::vz,          Channel::heading,      Channel::pitch,
    Channel::roll,        Channel::ground_speed, Channel::total_speed, Channel::derived_vx,
    Channel::derived_vy,  Channel::derived_vz};

std::string_view channel_name(Channel ch) noexcept;
std::optional<Channel> channel_from_name(std::string_view name) noexcept;
bool is_derived(Channel ch) noexcept;

/// Finite differences of position, attributed to the start of each interval.
struct DerivedSpeeds {
  std::vector<double> vx, vy, vz;
  std::vector<double> ground;
  std::vector<double> total;
};

DerivedSpeeds derived_speed(const Trajectory& traj);

/// Raw channels have one value per sample; derived channels have size() - 1.
std::vector<double> channel_extract(const Trajectory& traj, Channel ch);

std::vector<double> first_difference(std::span<const double> series);

/// Uniform grid t_first + k*dt; linear for positions/velocities, shortest
/// arc for heading and roll.
Trajectory resample(const Trajectory& traj, double dt);

/// Median spacing between consecutive samples.
double native_period(const Trajectory& traj);

}  // namespace flightlab
