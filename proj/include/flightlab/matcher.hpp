#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "flightlab/trajectory.hpp"

namespace flightlab {

struct DtwResult {
  double cost = 0;              // minimal cumulative |a_i - b_j|
  std::size_t path_length = 0;  // cells on the chosen optimal path
};

/// Classic DTW: L1 local cost, steps (i-1,j), (i,j-1), (i-1,j-1), both ends
/// aligned. Among equal-cost paths the shortest is reported. Throws
/// EmptySequence.
DtwResult dtw(std::span<const double> a, std::span<const double> b);

inline double dtw_distance(std::span<const double> a, std::span<const double> b) {
  return dtw(a, b).cost;
}

/// Square Pearson correlation matrix over the chosen channels. Zero-variance
/// channels correlate 0 with the others and 1 with themselves.
class CorrelationMatrix {
 public:
  CorrelationMatrix(std::size_t dim, std::vector<double> values);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t dim_;
  std::vector<double> values_;
};

CorrelationMatrix correlation_matrix(std::span<const std::vector<double>> series);
CorrelationMatrix correlation_matrix(const Trajectory& traj, std::span<const Channel> channels);

/// 1 - <A,B>_F / (|A|_F |B|_F). Throws DimensionMismatch.
double cmd(const CorrelationMatrix& a, const CorrelationMatrix& b);

struct ManeuverTemplate {
  std::string name;
  Trajectory trajectory;
  std::vector<Channel> channels;

  ManeuverTemplate(std::string name, Trajectory trajectory, std::vector<Channel> channels);
};

struct MatchConfig {
  double temperature = 1.0;
  double combination_weight = 0.5;  // exponent on the univariate probability
  double resample_dt = 0.5;
  bool z_normalize = false;
};

struct UnivariateBreakdown {
  double dtw_raw = 0;   // sum over channels of path-normalized raw DTW
  double dtw_diff = 0;  // same, on first differences
  double total() const { return dtw_raw + dtw_diff; }
};

/// Both inputs must already share a sampling grid (see prepare()).
UnivariateBreakdown univariate_breakdown(const ManeuverTemplate& tmpl, const Trajectory& sortie,
                                         bool z_normalize = false);
double univariate_score(const ManeuverTemplate& tmpl, const Trajectory& sortie,
                        bool z_normalize = false);
double multivariate_score(const ManeuverTemplate& tmpl, const Trajectory& sortie);

/// softmax(-d / temperature), stabilized.
std::vector<double> match_probabilities(std::span<const double> distances, double temperature);

struct MatchResult {
  std::string name;
  double dtw_raw = 0;
  double dtw_diff = 0;
  double cmd = 0;
  double univariate_prob = 0;
  double multivariate_prob = 0;
  double combined_prob = 0;

  double univariate() const { return dtw_raw + dtw_diff; }
};

/// Scores every template against the whole sortie; ranked by combined_prob
/// (descending), ties by name.
std::vector<MatchResult> match_sortie(std::span<const ManeuverTemplate> templates,
                                      const Trajectory& sortie, const MatchConfig& cfg = {});

struct RollingMatch {
  std::vector<double> window_start;
  std::vector<double> score;  // w * univariate + (1 - w) * multivariate
  std::size_t best = 0;
  double best_start() const { return window_start[best]; }
};

/// Slides a window over the sortie and scores the template in each. Throws
/// WindowTooLong if the window exceeds the sortie or is shorter than half
/// the template.
RollingMatch rolling_match(const ManeuverTemplate& tmpl, const Trajectory& sortie, double window,
                           double stride, const MatchConfig& cfg = {});

nlohmann::json match_results_to_json(std::span<const MatchResult> results);

/// Manifest JSON: [{"name", "file", "channels": [...]}], files relative to
/// the manifest's directory.
std::vector<ManeuverTemplate> load_template_library(const std::filesystem::path& manifest);
void save_template_library(std::span<const ManeuverTemplate> templates,
                           const std::filesystem::path& dir);

}  // namespace flightlab
