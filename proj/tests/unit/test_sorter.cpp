#include <cmath>
#include <random>

#include "doctest.h"

#include "flightlab/error.hpp"
#include "flightlab/rules.hpp"
#include "flightlab/summary.hpp"
#include "flightlab/sim.hpp"

using namespace flightlab;

namespace {

Trajectory with_x(std::vector<double> xs) {
  std::vector<TrajectorySample> s(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s[i].t = static_cast<double>(i);
    s[i].x_east = xs[i];
  }
  return Trajectory("x", std::move(s));
}

SummaryFeatures features_with(Channel ch, Statistic st, double v) {
  SummaryFeatures f;
  f.stats[*summary_channel_index(ch) * kAllStatistics.size() + static_cast<std::size_t>(st)] = v;
  return f;
}

}  // namespace

TEST_CASE("summary statistics") {
  const auto c = compute_summary(with_x({4, 4, 4}));
  CHECK(c.get(Channel::x_east, Statistic::mean) == 4);
  CHECK(c.get(Channel::x_east, Statistic::std) == 0);
  CHECK(c.get(Channel::x_east, Statistic::range) == 0);

  const auto s = compute_summary(with_x({0, 10}));
  CHECK(s.get(Channel::x_east, Statistic::mean) == 5);
  CHECK(s.get(Channel::x_east, Statistic::std) == 5);
  CHECK(s.get(Channel::x_east, Statistic::min) == 0);
  CHECK(s.get(Channel::x_east, Statistic::max) == 10);
  CHECK(s.get(Channel::ground_speed, Statistic::mean) == 10);
  CHECK(s.duration == 1);
  CHECK(s.sample_count == 2);
  CHECK(s.as_vector().size() == 55);
  CHECK(SummaryFeatures::names().size() == 55);
  CHECK_THROWS_AS(s.get(Channel::derived_vx, Statistic::mean), Error);

  const auto g = random_good_sortie(2);
  const auto a = compute_summary(g).as_vector(), b = compute_summary(resample(g, 0.2)).as_vector();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));

  for (Channel ch : kSummaryChannels) {
    const auto f = compute_summary(g);
    CHECK(f.get(ch, Statistic::std) >= 0);
    CHECK(f.get(ch, Statistic::min) <= f.get(ch, Statistic::mean));
    CHECK(f.get(ch, Statistic::mean) <= f.get(ch, Statistic::max));
    CHECK(f.get(ch, Statistic::range) == f.get(ch, Statistic::max) - f.get(ch, Statistic::min));
  }
}

TEST_CASE("default ruleset") {
  const RuleSet t1 = load_rules("table1");
  CHECK(t1 == table1_rules());
  REQUIRE(t1.rules().size() == 5);
  CHECK(t1.rules()[0] == ThresholdRule{Channel::x_east, Statistic::mean, Comparator::lt, 500});
  CHECK_FALSE(evaluate_rules(features_with(Channel::x_east, Statistic::mean, 600), t1));
  auto inside = features_with(Channel::roll, Statistic::mean, -1);
  CHECK(evaluate_rules(inside, t1));
  CHECK_FALSE(evaluate_rules(features_with(Channel::x_east, Statistic::mean, 500), t1));
  CHECK(rules_from_json(rules_to_json(t1)) == t1);
}

TEST_CASE("ruleset invariants") {
  CHECK_THROWS_AS(RuleSet({}), Error);
  CHECK_THROWS_AS(RuleSet({{Channel::x_east, Statistic::mean, Comparator::lt, NAN}}), Error);
}

TEST_CASE("score_corpus") {
  const RuleSet r({{Channel::x_east, Statistic::mean, Comparator::lt, 1}});
  std::vector<ScoredSortie> corpus;
  for (int i = 0; i < 45; ++i) corpus.push_back({features_with(Channel::x_east, Statistic::mean, i == 0 ? 5 : 0), true});
  for (int i = 0; i < 10; ++i) corpus.push_back({features_with(Channel::x_east, Statistic::mean, 5), false});
  const auto s = score_corpus(corpus, r);
  CHECK(s.true_positive_rate == doctest::Approx(0.9778).epsilon(1e-4));
  CHECK(s.true_negative_rate == 1.0);
  CHECK(s.tp + s.fn == 45);
  CHECK(s.tp + s.fn + s.tn + s.fp == corpus.size());

  std::vector<ScoredSortie> only_good(corpus.begin(), corpus.begin() + 3);
  CHECK_THROWS_AS(score_corpus(only_good, r), Error);
  std::vector<ScoredSortie> only_bad(corpus.end() - 3, corpus.end());
  CHECK_THROWS_AS(score_corpus(only_bad, r), Error);
}

TEST_CASE("score_corpus agrees with a per-file loop") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100, 100);
  std::vector<ScoredSortie> corpus;
  for (int i = 0; i < 60; ++i) {
    SummaryFeatures f;
    for (auto& v : f.stats) v = u(rng);
    corpus.push_back({f, i % 3 != 0});
  }
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ThresholdRule> rules;
    for (int k = 0; k < 3; ++k) {
      rules.push_back({kSummaryChannels[static_cast<std::size_t>(trial + k) % kSummaryChannels.size()],
                       kAllStatistics[static_cast<std::size_t>(k + trial) % kAllStatistics.size()],
                       static_cast<Comparator>((trial + k) % 4), u(rng) / 2});
    }
    const RuleSet rs(rules);
    std::size_t tp = 0, tn = 0;
    for (const auto& c : corpus) {
      bool ok = true;
      for (const auto& r : rules) ok = ok && r.holds(c.features);
      if (ok && c.truth_good) ++tp;
      if (!ok && !c.truth_good) ++tn;
    }
    const auto s = score_corpus(corpus, rs);
    CHECK(s.tp == tp);
    CHECK(s.tn == tn);
  }
}

TEST_CASE("tune_rules") {
  std::vector<ScoredSortie> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back({features_with(Channel::x_east, Statistic::max, i), i < 10});
  const RuleSet shape({{Channel::x_east, Statistic::max, Comparator::lt, 0}});

  const auto best = tune_rules(corpus, shape, {{3, 10, 15, 9.5}});
  CHECK(best.rules.rules()[0].bound == 9.5);
  CHECK(best.stats.true_positive_rate == 1.0);
  CHECK(best.stats.true_negative_rate == 1.0);
  const auto again = score_corpus(corpus, best.rules);
  CHECK(again.tp == best.stats.tp);
  CHECK(again.tn == best.stats.tn);

  const auto single = tune_rules(corpus, shape, {{7}});
  CHECK(single.rules.rules()[0].bound == 7);

  const auto tie = tune_rules(corpus, shape, {{10.5, 10, 9.5}});
  CHECK(tie.rules.rules()[0].bound == 9.5);

  CHECK_THROWS_AS(tune_rules(corpus, shape, {{}}), Error);
  CHECK_THROWS_AS(tune_rules(corpus, shape, {}), Error);
}

TEST_CASE("relaxing an lt bound never flips good to bad") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 50; ++trial) {
    SummaryFeatures f;
    for (auto& v : f.stats) v = u(rng);
    const double b = u(rng);
    const RuleSet tight({{Channel::roll, Statistic::mean, Comparator::lt, b}});
    const RuleSet loose({{Channel::roll, Statistic::mean, Comparator::lt, b + 1}});
    if (evaluate_rules(f, tight)) CHECK(evaluate_rules(f, loose));
  }
}
