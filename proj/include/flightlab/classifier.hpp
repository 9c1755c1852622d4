#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "flightlab/summary.hpp"
#include "flightlab/trajectory.hpp"

namespace flightlab {

/// Row-major feature matrix with one class index per row.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<double> features, std::size_t cols, std::vector<int> labels,
          std::vector<std::string> class_names);

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * cols_, cols_};
  }
  double at(std::size_t i, std::size_t c) const { return features_[i * cols_ + c]; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::size_t class_count() const noexcept { return class_names_.size(); }
  std::vector<std::size_t> class_counts() const;

  Dataset subset(std::span<const std::size_t> indices) const;

  /// Optional per-row identifiers (e.g. sortie ids), carried through subset().
  std::vector<std::string> row_ids;
  std::vector<std::string> feature_names;

 private:
  std::vector<double> features_;
  std::size_t cols_ = 0;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
};

nlohmann::json dataset_to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);

/// 1 - sum p_k^2. Throws EmptyNode when every count is zero.
double gini_impurity(std::span<const std::size_t> class_counts);

struct TreeParams {
  std::size_t max_depth = 0;       // 0 = unbounded
  std::size_t min_leaf = 1;
  std::size_t feature_subset = 0;  // candidate features per split; 0 = all
  std::uint64_t seed = 0;
};

/// Binary tree stored as a node array; node 0 is the root. Values <= threshold
/// go left.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    std::vector<std::size_t> class_counts;
    int predicted = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  int predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::vector<Node>& mutable_nodes() noexcept { return nodes_; }
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

DecisionTree train_tree(const Dataset& data, const TreeParams& params = {});

struct EnsembleParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  /// 0 = all features (bagging); otherwise candidate features per split.
  std::size_t feature_subset = 0;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;
  std::uint64_t rng_seed = 1;

  static EnsembleParams bagging(std::uint64_t seed = 1);
  static EnsembleParams random_forest(std::size_t feature_count, std::uint64_t seed = 1);
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  bool per_tree_feature_subsampling = false;
  std::uint64_t rng_seed = 0;
  std::size_t class_count = 0;

  /// Majority vote; ties go to the lowest class index.
  int predict(std::span<const double> x) const;
  bool operator==(const ForestModel&) const = default;
};

ForestModel train_ensemble(const Dataset& data, const EnsembleParams& params);

struct LogisticParams {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-3;
};

struct LogisticModel {
  std::vector<double> weights;  // in standardized feature space
  double bias = 0;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::vector<double> loss_history;  // objective before each epoch

  /// P(class 1 | x) for a raw (unstandardized) feature vector.
  double probability(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return probability(x) >= 0.5 ? 1 : 0; }
};

/// Mean negative log-likelihood plus (l2/2)|w|^2 over a standardized,
/// row-major design matrix with 0/1 labels.
double logistic_objective(std::span<const double> x, std::size_t cols, std::span<const int> y,
                          std::span<const double> w, double b, double l2);
/// Gradient of logistic_objective: cols weight entries followed by the bias.
std::vector<double> logistic_gradient(std::span<const double> x, std::size_t cols,
                                      std::span<const int> y, std::span<const double> w,
                                      double b, double l2);

/// Throws SingleClass unless the data has exactly two populated classes.
LogisticModel train_logistic(const Dataset& data, const LogisticParams& params = {});

struct NaiveBayesModel {
  std::vector<double> log_prior;
  std::vector<std::vector<double>> mean;      // [class][feature]
  std::vector<std::vector<double>> variance;  // floored at 1e-9

  std::vector<double> log_posterior(std::span<const double> x) const;  // unnormalized
  std::vector<double> posterior(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

/// Throws EmptyClass when a class has no rows.
NaiveBayesModel train_naive_bayes(const Dataset& data);

/// A trained model of any supported family plus the class names it predicts.
struct TrainedModel {
  std::string kind;  // "tree", "bag", "rf", "logit", "nb"
  std::vector<std::string> class_names;
  std::size_t feature_count = 0;
  std::variant<DecisionTree, ForestModel, LogisticModel, NaiveBayesModel> model;

  int predict(std::span<const double> x) const;
};

/// Trains one of "tree", "bag", "rf", "logit", "nb" with default settings.
TrainedModel train_model(const std::string& kind, const Dataset& data, std::uint64_t seed);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

struct EvalReport {
  double accuracy = 0;
  double average_f1 = 0;
  double average_specificity = 0;
  double average_recall = 0;
  /// confusion_matrix[truth][predicted]
  std::vector<std::vector<std::size_t>> confusion_matrix;
};

/// Accuracy plus one-vs-rest recall, specificity and F1, macro-averaged.
EvalReport metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion);
EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                                std::size_t class_count);
EvalReport evaluate(const TrainedModel& model, const Dataset& test);

nlohmann::json eval_report_to_json(const EvalReport& r, const std::vector<std::string>& classes);

/// Equal per-class training counts (majority downsampled); everything else is
/// test. Throws ClassTooSmall if a class has fewer than two rows.
std::pair<Dataset, Dataset> balanced_split(const Dataset& data, double train_fraction,
                                           std::uint64_t rng_seed);

/// Summary features over sliding windows; windows running past the end are
/// dropped. Throws WindowTooLong when no window fits.
std::vector<SummaryFeatures> windowed_features(const Trajectory& traj, double window,
                                               double stride);

struct WindowClassification {
  std::vector<int> per_window;
  int majority = 0;
};

WindowClassification classify_windows(const ForestModel& model,
                                      std::span<const SummaryFeatures> windows);

}  // namespace flightlab
