#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "flightlab/summary.hpp"

namespace flightlab {

enum class Comparator { lt, le, gt, ge };

std::string_view comparator_name(Comparator c) noexcept;

struct ThresholdRule {
  Channel channel;
  Statistic statistic;
  Comparator comparator;
  double bound;

  bool holds(const SummaryFeatures& f) const;
  bool operator==(const ThresholdRule&) const = default;
};

/// Conjunction of threshold rules; never empty.
class RuleSet {
 public:
  explicit RuleSet(std::vector<ThresholdRule> rules);

  const std::vector<ThresholdRule>& rules() const noexcept { return rules_; }
  bool operator==(const RuleSet&) const = default;

 private:
  std::vector<ThresholdRule> rules_;
};

/// The starter rules: mean xEast < 500, mean yNorth < 500, mean roll < 0,
/// std xEast < 100, std yNorth < 100.
RuleSet table1_rules();

/// True (good) iff every rule holds.
bool evaluate_rules(const SummaryFeatures& features, const RuleSet& rules);

struct ConfusionStats {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double true_positive_rate = 0;
  double true_negative_rate = 0;

  double balanced_accuracy() const { return (true_positive_rate + true_negative_rate) / 2; }
};

struct ScoredSortie {
  SummaryFeatures features;
  bool truth_good;
};

/// Throws NoPositives / NoNegatives when a truth class is missing.
ConfusionStats score_corpus(std::span<const ScoredSortie> corpus, const RuleSet& rules);

struct TuneResult {
  RuleSet rules;
  ConfusionStats stats;
};

/// Exhaustive search over the Cartesian product of candidate bounds, one list
/// per rule of `shape` (whose own bounds are ignored). Maximizes balanced
/// accuracy; ties go to the lexicographically smallest bound vector.
TuneResult tune_rules(std::span<const ScoredSortie> corpus, const RuleSet& shape,
                      const std::vector<std::vector<double>>& grid);

nlohmann::json rules_to_json(const RuleSet& rules);
RuleSet rules_from_json(const nlohmann::json& j);

/// "table1" or a path to a JSON rules file.
RuleSet load_rules(const std::string& name_or_path);

}  // namespace flightlab
