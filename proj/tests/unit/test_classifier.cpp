#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"

#include "flightlab/classifier.hpp"
#include "flightlab/error.hpp"
#include "flightlab/sim.hpp"

using namespace flightlab;

namespace {

Dataset one_feature(std::vector<double> x, std::vector<int> y) {
  return Dataset(std::move(x), 1, std::move(y), {"a", "b"});
}

// Two noisy Gaussian blobs in `cols` dimensions.
Dataset blobs(std::size_t per_class, std::size_t cols, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> x;
  std::vector<int> y;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t k = 0; k < cols; ++k) x.push_back(n(rng) + (c == 1 ? gap : 0));
      y.push_back(c);
    }
  }
  return Dataset(std::move(x), cols, std::move(y), {"bad", "good"});
}

double accuracy_on(const TrainedModel& m, const Dataset& d) { return evaluate(m, d).accuracy; }

}  // namespace

TEST_CASE("dataset") {
  CHECK_THROWS_AS(Dataset({1, 2, 3}, 2, {0}, {"a"}), Error);
  CHECK_THROWS_AS(Dataset({1}, 1, {2}, {"a", "b"}), Error);
  const auto d = one_feature({1, 2, 3, 4}, {0, 0, 1, 1});
  const std::vector<std::size_t> idx{3, 0};
  const auto s = d.subset(idx);
  CHECK(s.rows() == 2);
  CHECK(s.at(0, 0) == 4);
  CHECK(s.label(1) == 0);
  const auto r = dataset_from_json(dataset_to_json(d));
  CHECK(r.labels() == d.labels());
  CHECK(r.at(2, 0) == 3);
}

TEST_CASE("gini impurity") {
  const std::vector<std::size_t> pure{10, 0}, even{5, 5}, mixed{2, 6}, empty{0, 0};
  CHECK(gini_impurity(pure) == 0);
  CHECK(gini_impurity(even) == doctest::Approx(0.5));
  CHECK(gini_impurity(mixed) == doctest::Approx(0.375));
  CHECK_THROWS_AS(gini_impurity(empty), Error);
}

TEST_CASE("decision tree") {
  SUBCASE("one split at the midpoint") {
    const auto t = train_tree(one_feature({1, 2, 3, 4}, {0, 0, 1, 1}));
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.nodes()[0].feature == 0);
    CHECK(t.nodes()[0].threshold == doctest::Approx(2.5));
    const double lo = 1.0, hi = 4.0;
    CHECK(t.predict(std::span(&lo, 1)) == 0);
    CHECK(t.predict(std::span(&hi, 1)) == 1);
  }
  SUBCASE("single class gives a single leaf") {
    const auto t = train_tree(one_feature({1, 2, 3}, {1, 1, 1}));
    REQUIRE(t.nodes().size() == 1);
    CHECK(t.nodes()[0].is_leaf());
    CHECK(t.nodes()[0].predicted == 1);
  }
  SUBCASE("fits distinct training points") {
    const auto d = blobs(40, 3, 0.5, 4);
    const auto t = train_tree(d);
    for (std::size_t i = 0; i < d.rows(); ++i) CHECK(t.predict(d.row(i)) == d.label(i));
  }
  SUBCASE("depth limit") {
    TreeParams p;
    p.max_depth = 2;
    CHECK(train_tree(blobs(40, 3, 0.5, 4), p).depth() <= 2);
  }
  SUBCASE("no rows") { CHECK_THROWS_AS(train_tree(Dataset({}, 1, {}, {"a", "b"})), Error); }
}

TEST_CASE("ensembles") {
  const auto d = blobs(40, 4, 1.5, 9);
  SUBCASE("one tree without bootstrap equals a plain tree") {
    EnsembleParams p;
    p.n_trees = 1;
    p.bootstrap = false;
    const auto f = train_ensemble(d, p);
    CHECK(f.trees[0] == train_tree(d));
  }
  SUBCASE("same seed, same model") {
    CHECK(train_ensemble(d, EnsembleParams::random_forest(4, 7)) ==
          train_ensemble(d, EnsembleParams::random_forest(4, 7)));
    CHECK(train_ensemble(d, EnsembleParams::bagging(3)) == train_ensemble(d, EnsembleParams::bagging(3)));
  }
  SUBCASE("forest flag") {
    CHECK(train_ensemble(d, EnsembleParams::random_forest(4)).per_tree_feature_subsampling);
    CHECK_FALSE(train_ensemble(d, EnsembleParams::bagging()).per_tree_feature_subsampling);
  }
}

TEST_CASE("logistic regression") {
  SUBCASE("zero weights give one half") {
    LogisticModel m;
    m.weights = {0, 0};
    m.feature_mean = {0, 0};
    m.feature_scale = {1, 1};
    const std::vector<double> x{3, -7};
    CHECK(m.probability(x) == 0.5);
  }
  SUBCASE("gradient matches finite differences") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> x(15), w(3);
    for (auto& v : x) v = n(rng);
    for (auto& v : w) v = n(rng);
    const std::vector<int> y{0, 1, 1, 0, 1};
    const double b = 0.3, l2 = 0.01, h = 1e-6;
    const auto g = logistic_gradient(x, 3, y, w, b, l2);
    REQUIRE(g.size() == 4);
    for (std::size_t k = 0; k < 3; ++k) {
      auto wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      const double fd = (logistic_objective(x, 3, y, wp, b, l2) - logistic_objective(x, 3, y, wm, b, l2)) / (2 * h);
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-6));
    }
    const double fd = (logistic_objective(x, 3, y, w, b + h, l2) - logistic_objective(x, 3, y, w, b - h, l2)) / (2 * h);
    CHECK(g[3] == doctest::Approx(fd).epsilon(1e-6));
  }
  SUBCASE("separable data, decreasing loss") {
    const auto d = one_feature({-3, -2, -1, 1, 2, 3}, {0, 0, 0, 1, 1, 1});
    const auto m = train_logistic(d);
    for (std::size_t i = 0; i < d.rows(); ++i) CHECK(m.predict(d.row(i)) == d.label(i));
    REQUIRE(m.loss_history.size() > 1);
    CHECK(m.loss_history.back() < m.loss_history.front());
  }
  SUBCASE("single class") { CHECK_THROWS_AS(train_logistic(one_feature({1, 2}, {1, 1})), Error); }
}

TEST_CASE("naive bayes") {
  const auto d = one_feature({0, 0.2, -0.2, 10, 10.2, 9.8}, {0, 0, 0, 1, 1, 1});
  const auto m = train_naive_bayes(d);
  CHECK(m.mean[0][0] == doctest::Approx(0));
  CHECK(m.mean[1][0] == doctest::Approx(10));
  CHECK(m.log_prior[0] == doctest::Approx(std::log(0.5)));
  const double near_b = 9.0;
  const auto p = m.posterior(std::span(&near_b, 1));
  CHECK(p[0] + p[1] == doctest::Approx(1));
  CHECK(m.predict(std::span(&near_b, 1)) == 1);

  const auto constant = one_feature({1, 1, 2, 2}, {0, 0, 1, 1});
  const auto c = train_naive_bayes(constant);
  CHECK(c.variance[0][0] >= 1e-9);
  CHECK_THROWS_AS(train_naive_bayes(one_feature({1, 2}, {0, 0})), Error);
}

TEST_CASE("metrics") {
  const std::vector<int> truth{0, 0, 1, 1}, pred{0, 1, 1, 1};
  const auto r = evaluate_predictions(truth, pred, 2);
  CHECK(r.accuracy == 0.75);
  CHECK(r.average_f1 == doctest::Approx((2.0 / 3 + 0.8) / 2));
  CHECK(r.average_recall == doctest::Approx(0.75));
  CHECK(r.average_specificity == doctest::Approx(0.75));
  CHECK(r.confusion_matrix[0][1] == 1);
  const std::vector<int> shorter{0};
  CHECK_THROWS_AS(evaluate_predictions(truth, shorter, 2), Error);
}

TEST_CASE("balanced split") {
  std::vector<double> x(100);
  std::iota(x.begin(), x.end(), 0.0);
  std::vector<int> y(100, 1);
  for (std::size_t i = 0; i < 12; ++i) y[i * 8] = 0;
  const auto d = one_feature(x, y);
  const auto [train, test] = balanced_split(d, 0.75, 5);
  const auto counts = train.class_counts();
  CHECK(counts[0] == counts[1]);
  CHECK(counts[0] == 9);
  CHECK(train.rows() + test.rows() == d.rows());
  std::set<double> seen;
  for (std::size_t i = 0; i < train.rows(); ++i) seen.insert(train.at(i, 0));
  for (std::size_t i = 0; i < test.rows(); ++i) seen.insert(test.at(i, 0));
  CHECK(seen.size() == d.rows());

  CHECK_THROWS_AS(balanced_split(one_feature({1, 2, 3}, {0, 0, 1}), 0.5, 1), Error);
  CHECK_THROWS_AS(balanced_split(d, 1.0, 1), Error);
}

TEST_CASE("every model family learns separated blobs") {
  const auto d = blobs(60, 5, 4.0, 21);
  const auto [train, test] = balanced_split(d, 0.7, 2);
  for (const char* kind : {"tree", "bag", "rf", "logit", "nb"}) {
    CAPTURE(kind);
    const auto m = train_model(kind, train, 1);
    CHECK(accuracy_on(m, test) >= 0.95);
    const auto back = model_from_json(model_to_json(m));
    for (std::size_t i = 0; i < test.rows(); ++i) CHECK(back.predict(test.row(i)) == m.predict(test.row(i)));
  }
  CHECK_THROWS_AS(train_model("svm", train, 1), Error);
}

TEST_CASE("windowed features") {
  const auto t = random_good_sortie(6, 1.0);
  const auto c = t.slice(0, 61);
  CHECK(windowed_features(c, 10, 10).size() == 6);
  const auto whole = windowed_features(c, c.duration(), 1);
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].as_vector() == compute_summary(c).as_vector());
  CHECK_THROWS_AS(windowed_features(c, 61, 1), Error);
  CHECK_THROWS_AS(windowed_features(c, 10, 0), Error);
}

TEST_CASE("classify windows") {
  const auto t = random_good_sortie(6, 1.0).slice(0, 61);
  const auto windows = windowed_features(t, 10, 5);
  std::vector<double> x;
  std::vector<int> y;
  for (const auto& w : windows) {
    for (double v : w.as_vector()) x.push_back(v);
    y.push_back(1);
  }
  for (const auto& w : windows) {
    for (double v : w.as_vector()) x.push_back(v + 1000);
    y.push_back(0);
  }
  const Dataset d(x, SummaryFeatures::kVectorSize, y, {"bad", "good"});
  const auto f = train_ensemble(d, EnsembleParams::bagging(1));
  const auto r = classify_windows(f, windows);
  CHECK(r.per_window.size() == windows.size());
  CHECK(r.majority == 1);
  CHECK_THROWS_AS(classify_windows(f, {}), Error);
}
