#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flightlab/trajectory.hpp"

namespace flightlab {

enum class Statistic { mean, std, min, max, range };

inline constexpr std::array<Statistic, 5> kAllStatistics = {
    Statistic::mean, Statistic::std, Statistic::min, Statistic::max, Statistic::range};

/// Channels summarized, in feature order.
inline constexpr std::array<Channel, 11> kSummaryChannels = {
    Channel::x_east, Channel::y_north, Channel::z_up,    Channel::vx,
    Channel::vy,     Channel::vz,      Channel::heading, Channel::pitch,
    Channel::roll,   Channel::ground_speed, Channel::total_speed};

std::string_view statistic_name(Statistic s) noexcept;
std::optional<Statistic> statistic_from_name(std::string_view name) noexcept;
std::optional<std::size_t> summary_channel_index(Channel ch) noexcept;

/// Per-channel mean, population std, min, max and range, channel-major.
struct SummaryFeatures {
  static constexpr std::size_t kStatCount = kSummaryChannels.size() * kAllStatistics.size();
  /// Length of as_vector(), which holds the statistics only.
  static constexpr std::size_t kVectorSize = kStatCount;

  std::array<double, kStatCount> stats{};
  double duration = 0;
  std::size_t sample_count = 0;

  /// Throws InvalidArgument for channels outside kSummaryChannels.
  double get(Channel ch, Statistic st) const;

  std::vector<double> as_vector() const;
  static const std::vector<std::string>& names();
};

SummaryFeatures compute_summary(const Trajectory& traj);

}  // namespace flightlab
