#include "flightlab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "flightlab/error.hpp"

namespace flightlab {

std::string_view issue_kind_name(ValidationIssue::Kind kind) noexcept {
  switch (kind) {
    case ValidationIssue::Kind::non_monotonic_time: return "non_monotonic_time";
    case ValidationIssue::Kind::non_finite_value: return "non_finite_value";
    case ValidationIssue::Kind::short_record: return "short_record";
    case ValidationIssue::Kind::column_mismatch: return "column_mismatch";
  }
  return "unknown";
}

namespace {

constexpr std::array<std::string_view, TrajectorySample::kFieldCount> kFieldNames = {
    "time", "xEast", "yNorth", "zUp", "vx", "vy", "vz", "head", "pitch", "roll"};

}  // namespace

std::vector<ValidationIssue> validate_samples(std::span<const TrajectorySample> samples) {
  std::vector<ValidationIssue> issues;
  std::optional<double> prev_t;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto f = samples[i].fields();
    bool finite = true;
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (!std::isfinite(f[c])) {
        issues.push_back({ValidationIssue::Kind::non_finite_value, i + 1,
                          std::string(kFieldNames[c]) + " is not finite"});
        finite = false;
        break;
      }
    }
    if (!finite) continue;
    if (samples[i].pitch < -90.0 || samples[i].pitch > 90.0) {
      issues.push_back({ValidationIssue::Kind::non_finite_value, i + 1,
                        "pitch outside [-90, 90]"});
    }
    if (prev_t && !(samples[i].t > *prev_t)) {
      issues.push_back({ValidationIssue::Kind::non_monotonic_time, i + 1,
                        "time does not increase"});
    }
    prev_t = samples[i].t;
  }
  if (samples.size() < 2) {
    issues.push_back({ValidationIssue::Kind::short_record, samples.size(),
                      "fewer than two samples"});
  }
  return issues;
}

double normalize_heading(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

double normalize_roll(double deg) {
  if (deg >= -180.0 && deg <= 180.0) return deg;
  double r = std::fmod(deg, 360.0);
  if (r > 180.0) r -= 360.0;
  if (r < -180.0) r += 360.0;
  return r;
}

Trajectory::Trajectory(std::string sortie_id, std::vector<TrajectorySample> samples,
                       std::optional<std::string> source)
    : sortie_id_(std::move(sortie_id)), samples_(std::move(samples)), source_(std::move(source)) {
  auto issues = validate_samples(samples_);
  if (!issues.empty()) {
    const auto& first = issues.front();
    throw Error(Errc::InvalidTrajectory, "row " + std::to_string(first.row_index) + ": " +
                                             std::string(issue_kind_name(first.kind)) + " (" +
                                             first.detail + ")");
  }
  for (auto& s : samples_) {
    s.heading = normalize_heading(s.heading);
    s.roll = normalize_roll(s.roll);
  }
}

Trajectory Trajectory::with_annotation(Annotation a) const {
  Trajectory copy = *this;
  copy.annotations_.push_back(std::move(a));
  return copy;
}

Trajectory Trajectory::with_id(std::string sortie_id) const {
  Trajectory copy = *this;
  copy.sortie_id_ = std::move(sortie_id);
  return copy;
}

Trajectory Trajectory::slice(std::size_t begin, std::size_t end) const {
  if (end > samples_.size() || begin >= end) {
    throw Error(Errc::InvalidArgument, "slice out of range");
  }
  return Trajectory(sortie_id_, {samples_.begin() + begin, samples_.begin() + end}, source_);
}

std::string_view channel_name(Channel ch) noexcept {
  switch (ch) {
    case Channel::x_east: return "x_east";
    case Channel::y_north: return "y_north";
    case Channel::z_up: return "z_up";
    case Channel::vx: return "vx";
    case Channel::vy: return "vy";
    case Channel::vz: return "vz";
    case Channel::heading: return "heading";
    case Channel::pitch: return "pitch";
    case Channel::roll: return "roll";
    case Channel::ground_speed: return "ground_speed";
    case Channel::total_speed: return "total_speed";
    case Channel::derived_vx: return "derived_vx";
    case Channel::derived_vy: return "derived_vy";
    case Channel::derived_vz: return "derived_vz";
  }
  return "unknown";
}

std::optional<Channel> channel_from_name(std::string_view name) noexcept {
  for (Channel ch : kAllChannels) {
    if (channel_name(ch) == name) return ch;
  }
  return std::nullopt;
}

bool is_derived(Channel ch) noexcept {
  switch (ch) {
    case Channel::ground_speed:
    case Channel::total_speed:
    case Channel::derived_vx:
    case Channel::derived_vy:
    case Channel::derived_vz:
      return true;
    default:
      return false;
  }
}

DerivedSpeeds derived_speed(const Trajectory& traj) {
  const auto s = traj.samples();
  const std::size_t n = s.size() - 1;
  DerivedSpeeds out;
  out.vx.resize(n);
  out.vy.resize(n);
  out.vz.resize(n);
  out.ground.resize(n);
  out.total.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = s[i + 1].t - s[i].t;
    const double dvx = (s[i + 1].x_east - s[i].x_east) / dt;
    const double dvy = (s[i + 1].y_north - s[i].y_north) / dt;
    const double dvz = (s[i + 1].z_up - s[i].z_up) / dt;
    out.vx[i] = dvx;
    out.vy[i] = dvy;
    out.vz[i] = dvz;
    out.ground[i] = std::sqrt(dvx * dvx + dvy * dvy);
    out.total[i] = std::sqrt(dvx * dvx + dvy * dvy + dvz * dvz);
  }
  return out;
}

std::vector<double> channel_extract(const Trajectory& traj, Channel ch) {
  if (is_derived(ch)) {
    auto d = derived_speed(traj);
    switch (ch) {
      case Channel::ground_speed: return std::move(d.ground);
      case Channel::total_speed: return std::move(d.total);
      case Channel::derived_vx: return std::move(d.vx);
      case Channel::derived_vy: return std::move(d.vy);
      default: return std::move(d.vz);
    }
  }
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& s : traj.samples()) {
    switch (ch) {
      case Channel::x_east: out.push_back(s.x_east); break;
      case Channel::y_north: out.push_back(s.y_north); break;
      case Channel::z_up: out.push_back(s.z_up); break;
      case Channel::vx: out.push_back(s.vx); break;
      case Channel::vy: out.push_back(s.vy); break;
      case Channel::vz: out.push_back(s.vz); break;
      case Channel::heading: out.push_back(s.heading); break;
      case Channel::pitch: out.push_back(s.pitch); break;
      default: out.push_back(s.roll); break;
    }
  }
  return out;
}

std::vector<double> first_difference(std::span<const double> series) {
  if (series.size() < 2) throw Error(Errc::TooShort, "first difference needs two values");
  std::vector<double> out(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) out[i] = series[i + 1] - series[i];
  return out;
}

namespace {

double lerp(double a, double b, double f) { return a + (b - a) * f; }

double lerp_arc(double a, double b, double f) {
  double delta = std::fmod(b - a + 540.0, 360.0);
  if (delta < 0) delta += 360.0;
  delta -= 180.0;
  return a + delta * f;
}

}  // namespace

Trajectory resample(const Trajectory& traj, double dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw Error(Errc::InvalidArgument, "dt must be > 0");
  const double span = traj.duration();
  if (span < dt) throw Error(Errc::DegenerateSpan, "duration shorter than dt");

  const auto src = traj.samples();
  const std::size_t count = static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;
  std::vector<TrajectorySample> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = traj.t_first() + static_cast<double>(k) * dt;
    while (seg + 2 < src.size() && src[seg + 1].t < t) ++seg;
    const auto& a = src[seg];
    const auto& b = src[seg + 1];
    const double f = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    TrajectorySample s;
    s.t = t;
    s.x_east = lerp(a.x_east, b.x_east, f);
    s.y_north = lerp(a.y_north, b.y_north, f);
    s.z_up = lerp(a.z_up, b.z_up, f);
    s.vx = lerp(a.vx, b.vx, f);
    s.vy = lerp(a.vy, b.vy, f);
    s.vz = lerp(a.vz, b.vz, f);
    s.heading = lerp_arc(a.heading, b.heading, f);
    s.pitch = lerp(a.pitch, b.pitch, f);
    s.roll = lerp_arc(a.roll, b.roll, f);
    out.push_back(s);
  }
  Trajectory result(traj.sortie_id(), std::move(out), traj.source());
  for (const auto& a : traj.annotations()) result = result.with_annotation(a);
  return result;
}

double native_period(const Trajectory& traj) {
  const auto s = traj.samples();
  std::vector<double> gaps(s.size() - 1);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) gaps[i] = s[i + 1].t - s[i].t;
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

}  // namespace flightlab
