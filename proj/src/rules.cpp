#include "flightlab/rules.hpp"

#include <cmath>

#include "flightlab/error.hpp"
#include "flightlab/tsv.hpp"

namespace flightlab {

std::string_view comparator_name(Comparator c) noexcept {
  switch (c) {
    case Comparator::lt: return "lt";
    case Comparator::le: return "le";
    case Comparator::gt: return "gt";
    case Comparator::ge: return "ge";
  }
  return "unknown";
}

bool ThresholdRule::holds(const SummaryFeatures& f) const {
  const double v = f.get(channel, statistic);
  switch (comparator) {
    case Comparator::lt: return v < bound;
    case Comparator::le: return v <= bound;
    case Comparator::gt: return v > bound;
    case Comparator::ge: return v >= bound;
  }
  return false;
}

RuleSet::RuleSet(std::vector<ThresholdRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw Error(Errc::InvalidArgument, "rule set is empty");
  for (const auto& r : rules_) {
    if (!std::isfinite(r.bound)) throw Error(Errc::InvalidArgument, "rule bound is not finite");
    if (!summary_channel_index(r.channel)) {
      throw Error(Errc::InvalidArgument,
                  "channel " + std::string(channel_name(r.channel)) + " is not summarized");
    }
  }
}

RuleSet table1_rules() {
  return RuleSet({
      {Channel::x_east, Statistic::mean, Comparator::lt, 500.0},
      {Channel::y_north, Statistic::mean, Comparator::lt, 500.0},
      {Channel::roll, Statistic::mean, Comparator::lt, 0.0},
      {Channel::x_east, Statistic::std, Comparator::lt, 100.0},
      {Channel::y_north, Statistic::std, Comparator::lt, 100.0},
  });
}

bool evaluate_rules(const SummaryFeatures& features, const RuleSet& rules) {
  for (const auto& r : rules.rules()) {
    if (!r.holds(features)) return false;
  }
  return true;
}

ConfusionStats score_corpus(std::span<const ScoredSortie> corpus, const RuleSet& rules) {
  ConfusionStats s;
  for (const auto& item : corpus) {
    const bool good = evaluate_rules(item.features, rules);
    if (item.truth_good) {
      good ? ++s.tp : ++s.fn;
    } else {
      good ? ++s.fp : ++s.tn;
    }
  }
  if (s.tp + s.fn == 0) throw Error(Errc::NoPositives, "no truth-good sorties");
  if (s.tn + s.fp == 0) throw Error(Errc::NoNegatives, "no truth-bad sorties");
  s.true_positive_rate = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  s.true_negative_rate = static_cast<double>(s.tn) / static_cast<double>(s.tn + s.fp);
  return s;
}

TuneResult tune_rules(std::span<const ScoredSortie> corpus, const RuleSet& shape,
                      const std::vector<std::vector<double>>& grid) {
  const auto& base = shape.rules();
  if (grid.size() != base.size()) {
    throw Error(Errc::EmptyGrid, "grid needs one candidate list per rule");
  }
  for (const auto& g : grid) {
    if (g.empty()) throw Error(Errc::EmptyGrid, "empty candidate list");
  }

  std::vector<std::size_t> odometer(grid.size(), 0);
  std::vector<ThresholdRule> rules = base;
  std::optional<TuneResult> best;
  std::vector<double> best_bounds;
  while (true) {
    std::vector<double> bounds(grid.size());
    for (std::size_t r = 0; r < grid.size(); ++r) {
      bounds[r] = grid[r][odometer[r]];
      rules[r].bound = bounds[r];
    }
    RuleSet candidate(rules);
    const auto stats = score_corpus(corpus, candidate);
    const double score = stats.balanced_accuracy();
    if (!best || score > best->stats.balanced_accuracy() ||
        (score == best->stats.balanced_accuracy() && bounds < best_bounds)) {
      best = TuneResult{candidate, stats};
      best_bounds = bounds;
    }

    std::size_t r = 0;
    while (r < odometer.size() && ++odometer[r] == grid[r].size()) {
      odometer[r] = 0;
      ++r;
    }
    if (r == odometer.size()) break;
  }
  return *best;
}

nlohmann::json rules_to_json(const RuleSet& rules) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rules.rules()) {
    arr.push_back({{"channel", channel_name(r.channel)},
                   {"statistic", statistic_name(r.statistic)},
                   {"comparator", comparator_name(r.comparator)},
                   {"bound", r.bound}});
  }
  return arr;
}

RuleSet rules_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(Errc::InvalidArgument, "rules must be a JSON array");
  std::vector<ThresholdRule> rules;
  for (const auto& item : j) {
    try {
      const auto ch = channel_from_name(item.at("channel").get<std::string>());
      const auto st = statistic_from_name(item.at("statistic").get<std::string>());
      const auto cmp_name = item.at("comparator").get<std::string>();
      std::optional<Comparator> cmp;
      for (Comparator c : {Comparator::lt, Comparator::le, Comparator::gt, Comparator::ge}) {
        if (comparator_name(c) == cmp_name) cmp = c;
      }
      if (!ch || !st || !cmp) throw Error(Errc::InvalidArgument, "unknown rule field value");
      rules.push_back({*ch, *st, *cmp, item.at("bound").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidArgument, std::string("malformed rule: ") + e.what());
    }
  }
  return RuleSet(std::move(rules));
}

RuleSet load_rules(const std::string& name_or_path) {
  if (name_or_path == "table1") return table1_rules();
  try {
    return rules_from_json(nlohmann::json::parse(read_text_file(name_or_path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("rules file is not JSON: ") + e.what());
  }
}

}  // namespace flightlab
