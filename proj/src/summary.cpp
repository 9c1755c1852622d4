#include "flightlab/summary.hpp"

#include <algorithm>
#include <cmath>

#include "flightlab/error.hpp"

namespace flightlab {

std::string_view statistic_name(Statistic s) noexcept {
  switch (s) {
    case Statistic::mean: return "mean";
    case Statistic::std: return "std";
    case Statistic::min: return "min";
    case Statistic::max: return "max";
    case Statistic::range: return "range";
  }
  return "unknown";
}

std::optional<Statistic> statistic_from_name(std::string_view name) noexcept {
  for (Statistic s : kAllStatistics) {
    if (statistic_name(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<std::size_t> summary_channel_index(Channel ch) noexcept {
  for (std::size_t i = 0; i < kSummaryChannels.size(); ++i) {
    if (kSummaryChannels[i] == ch) return i;
  }
  return std::nullopt;
}

double SummaryFeatures::get(Channel ch, Statistic st) const {
  const auto idx = summary_channel_index(ch);
  if (!idx) {
    throw Error(Errc::InvalidArgument,
                "channel " + std::string(channel_name(ch)) + " is not summarized");
  }
  return stats[*idx * kAllStatistics.size() + static_cast<std::size_t>(st)];
}

std::vector<double> SummaryFeatures::as_vector() const {
  return {stats.begin(), stats.end()};
}

const std::vector<std::string>& SummaryFeatures::names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (Channel ch : kSummaryChannels) {
      for (Statistic st : kAllStatistics) {
        n.push_back(std::string(statistic_name(st)) + "(" + std::string(channel_name(ch)) + ")");
      }
    }
    return n;
  }();
  return names;
}

SummaryFeatures compute_summary(const Trajectory& traj) {
  SummaryFeatures out;
  const auto speeds = derived_speed(traj);
  for (std::size_t c = 0; c < kSummaryChannels.size(); ++c) {
    const Channel ch = kSummaryChannels[c];
    std::vector<double> series;
    if (ch == Channel::ground_speed) {
      series = speeds.ground;
    } else if (ch == Channel::total_speed) {
      series = speeds.total;
    } else {
      series = channel_extract(traj, ch);
    }
    const double n = static_cast<double>(series.size());
    double sum = 0;
    for (double v : series) sum += v;
    const double mean = sum / n;
    double ss = 0;
    for (double v : series) ss += (v - mean) * (v - mean);
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    // Rounding can push the mean a hair outside [min, max] on constant series.
    const double m = std::clamp(mean, *lo, *hi);
    double* slot = &out.stats[c * kAllStatistics.size()];
    slot[0] = m;
    slot[1] = std::sqrt(ss / n);
    slot[2] = *lo;
    slot[3] = *hi;
    slot[4] = *hi - *lo;
  }
  out.duration = traj.duration();
  out.sample_count = traj.size();
  return out;
}

}  // namespace flightlab
