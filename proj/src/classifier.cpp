#include "flightlab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <thread>

#include "flightlab/error.hpp"

namespace flightlab {

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(std::vector<double> features, std::size_t cols, std::vector<int> labels,
                 std::vector<std::string> class_names)
    : features_(std::move(features)),
      cols_(cols),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)) {
  if (cols_ == 0 || features_.size() != labels_.size() * cols_) {
    throw Error(Errc::DimensionMismatch, "feature matrix does not match label count");
  }
  for (double v : features_) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite feature value");
  }
  for (int l : labels_) {
    if (l < 0 || static_cast<std::size_t>(l) >= class_names_.size()) {
      throw Error(Errc::InvalidArgument, "label outside class list");
    }
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_count(), 0);
  for (int l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<double> f;
  f.reserve(indices.size() * cols_);
  std::vector<int> l;
  std::vector<std::string> ids;
  for (std::size_t i : indices) {
    auto r = row(i);
    f.insert(f.end(), r.begin(), r.end());
    l.push_back(labels_[i]);
    if (!row_ids.empty()) ids.push_back(row_ids[i]);
  }
  Dataset out(std::move(f), cols_, std::move(l), class_names_);
  out.row_ids = std::move(ids);
  out.feature_names = feature_names;
  return out;
}

nlohmann::json dataset_to_json(const Dataset& data) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    auto r = data.row(i);
    nlohmann::json row = {{"label", data.class_names()[static_cast<std::size_t>(data.label(i))]},
                          {"features", std::vector<double>(r.begin(), r.end())}};
    if (!data.row_ids.empty()) row["sortie_id"] = data.row_ids[i];
    rows.push_back(std::move(row));
  }
  return {{"format_version", 1},
          {"feature_names", data.feature_names},
          {"class_names", data.class_names()},
          {"rows", std::move(rows)}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
  try {
    const auto classes = j.at("class_names").get<std::vector<std::string>>();
    std::vector<double> features;
    std::vector<int> labels;
    std::vector<std::string> ids;
    std::size_t cols = 0;
    for (const auto& row : j.at("rows")) {
      const auto f = row.at("features").get<std::vector<double>>();
      if (cols == 0) cols = f.size();
      if (f.size() != cols) throw Error(Errc::DimensionMismatch, "ragged feature rows");
      features.insert(features.end(), f.begin(), f.end());
      const auto name = row.at("label").get<std::string>();
      const auto it = std::find(classes.begin(), classes.end(), name);
      if (it == classes.end()) throw Error(Errc::InvalidArgument, "unknown label " + name);
      labels.push_back(static_cast<int>(it - classes.begin()));
      if (row.contains("sortie_id")) ids.push_back(row["sortie_id"].get<std::string>());
    }
    if (cols == 0 && j.contains("feature_names")) cols = j["feature_names"].size();
    Dataset d(std::move(features), cols, std::move(labels), classes);
    if (ids.size() == d.rows()) d.row_ids = std::move(ids);
    if (j.contains("feature_names")) {
      d.feature_names = j["feature_names"].get<std::vector<std::string>>();
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed dataset: ") + e.what());
  }
}

// ---------------------------------------------------------------- Trees

double gini_impurity(std::span<const std::size_t> class_counts) {
  const double total =
      static_cast<double>(std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
  if (total == 0) throw Error(Errc::EmptyNode, "no instances");
  double sum_sq = 0;
  for (std::size_t c : class_counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

int argmax_lowest(std::span<const std::size_t> counts) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] > counts[best]) best = k;
  }
  return static_cast<int>(best);
}

// Splitmix64 step; derives independent per-tree seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params)
      : data_(data), params_(params), rng_(params.seed) {}

  DecisionTree build(std::vector<std::size_t> indices) {
    DecisionTree tree;
    nodes_ = &tree.mutable_nodes();
    grow(std::move(indices), 0);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0;
    double impurity = 0;
  };

  std::vector<std::size_t> counts_of(const std::vector<std::size_t>& idx) const {
    std::vector<std::size_t> c(data_.class_count(), 0);
    for (std::size_t i : idx) ++c[static_cast<std::size_t>(data_.label(i))];
    return c;
  }

  void try_feature(std::size_t f, const std::vector<std::size_t>& idx, Split& best) const {
    std::vector<std::pair<double, int>> vals;
    vals.reserve(idx.size());
    for (std::size_t i : idx) vals.emplace_back(data_.at(i, f), data_.label(i));
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    std::vector<std::size_t> left(data_.class_count(), 0);
    std::vector<std::size_t> right = counts_of(idx);
    for (std::size_t pos = 1; pos < n; ++pos) {
      const auto cls = static_cast<std::size_t>(vals[pos - 1].second);
      ++left[cls];
      --right[cls];
      if (!(vals[pos - 1].first < vals[pos].first)) continue;
      if (pos < params_.min_leaf || n - pos < params_.min_leaf) continue;
      const double imp = (static_cast<double>(pos) * gini_impurity(left) +
                          static_cast<double>(n - pos) * gini_impurity(right)) /
                         static_cast<double>(n);
      if (best.feature < 0 || imp < best.impurity) {
        double thr = 0.5 * (vals[pos - 1].first + vals[pos].first);
        if (!(thr < vals[pos].first)) thr = vals[pos - 1].first;
        best = {static_cast<int>(f), thr, imp};
      }
    }
  }

  Split find_split(const std::vector<std::size_t>& idx) {
    Split best;
    const std::size_t p = data_.cols();
    const std::size_t k = params_.feature_subset == 0 ? p : std::min(params_.feature_subset, p);
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    if (k < p) {
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, p - 1);
        std::swap(order[i], order[pick(rng_)]);
      }
    }
    for (std::size_t i = 0; i < k; ++i) try_feature(order[i], idx, best);
    // No usable split among the drawn candidates: fall back to the rest.
    for (std::size_t i = k; i < p && best.feature < 0; ++i) try_feature(order[i], idx, best);
    return best;
  }

  int grow(std::vector<std::size_t> idx, std::size_t depth) {
    const int id = static_cast<int>(nodes_->size());
    nodes_->push_back({});
    auto counts = counts_of(idx);
    {
      auto& node = (*nodes_)[static_cast<std::size_t>(id)];
      node.class_counts = counts;
      node.predicted = argmax_lowest(counts);
    }
    const bool depth_limited = params_.max_depth != 0 && depth >= params_.max_depth;
    if (depth_limited || gini_impurity(counts) == 0.0 || idx.size() < 2 * params_.min_leaf) {
      return id;
    }
    const Split split = find_split(idx);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (data_.at(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right)
          .push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = (*nodes_)[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Dataset& data_;
  TreeParams params_;
  std::mt19937_64 rng_;
  std::vector<DecisionTree::Node>* nodes_ = nullptr;
};

}  // namespace

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                       : n.right);
  }
  return nodes_[i].predicted;
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
    }
  }
  return best;
}

DecisionTree train_tree(const Dataset& data, const TreeParams& params) {
  if (data.rows() == 0) throw Error(Errc::EmptyNode, "no training rows");
  if (params.min_leaf == 0) throw Error(Errc::InvalidArgument, "min_leaf must be >= 1");
  std::vector<std::size_t> idx(data.rows());
  std::iota(idx.begin(), idx.end(), 0);
  return TreeBuilder(data, params).build(std::move(idx));
}

EnsembleParams EnsembleParams::bagging(std::uint64_t seed) {
  EnsembleParams p;
  p.rng_seed = seed;
  return p;
}

EnsembleParams EnsembleParams::random_forest(std::size_t feature_count, std::uint64_t seed) {
  EnsembleParams p;
  p.rng_seed = seed;
  p.feature_subset = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(feature_count)))));
  return p;
}

int ForestModel::predict(std::span<const double> x) const {
  std::vector<std::size_t> votes(class_count, 0);
  for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict(x))];
  return argmax_lowest(votes);
}

ForestModel train_ensemble(const Dataset& data, const EnsembleParams& params) {
  if (params.n_trees == 0) throw Error(Errc::InvalidArgument, "n_trees must be >= 1");
  if (data.rows() == 0) throw Error(Errc::EmptyNode, "no training rows");
  ForestModel model;
  model.per_tree_feature_subsampling = params.feature_subset != 0;
  model.rng_seed = params.rng_seed;
  model.class_count = data.class_count();
  model.trees.resize(params.n_trees);

  auto train_one = [&](std::size_t t) {
    const std::uint64_t seed = mix_seed(params.rng_seed, t);
    std::vector<std::size_t> idx(data.rows());
    if (params.bootstrap) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::size_t> pick(0, data.rows() - 1);
      for (auto& i : idx) i = pick(rng);
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_leaf = params.min_leaf;
    tp.feature_subset = params.feature_subset;
    tp.seed = mix_seed(seed, 0xA5A5);
    model.trees[t] = TreeBuilder(data, tp).build(std::move(idx));
  };

  // Each tree writes only its own slot.
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, params.n_trees);
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t t = w; t < params.n_trees; t += workers) train_one(t);
    }));
  }
  for (auto& j : jobs) j.get();
  return model;
}

// ---------------------------------------------------------------- Logistic

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double logistic_objective(std::span<const double> x, std::size_t cols, std::span<const int> y,
                          std::span<const double> w, double b, double l2) {
  const std::size_t n = y.size();
  double loss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = dot(x.subspan(i * cols, cols), w) + b;
    loss += softplus(z) - static_cast<double>(y[i]) * z;
  }
  return loss / static_cast<double>(n) + 0.5 * l2 * dot(w, w);
}

std::vector<double> logistic_gradient(std::span<const double> x, std::size_t cols,
                                      std::span<const int> y, std::span<const double> w,
                                      double b, double l2) {
  const std::size_t n = y.size();
  std::vector<double> g(cols + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.subspan(i * cols, cols);
    const double r = sigmoid(dot(row, w) + b) - static_cast<double>(y[i]);
    for (std::size_t c = 0; c < cols; ++c) g[c] += r * row[c];
    g[cols] += r;
  }
  for (auto& v : g) v /= static_cast<double>(n);
  for (std::size_t c = 0; c < cols; ++c) g[c] += l2 * w[c];
  return g;
}

double LogisticModel::probability(std::span<const double> x) const {
  double z = bias;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    z += weights[c] * (x[c] - feature_mean[c]) / feature_scale[c];
  }
  return sigmoid(z);
}

LogisticModel train_logistic(const Dataset& data, const LogisticParams& params) {
  const auto counts = data.class_counts();
  if (data.class_count() != 2 || counts[0] == 0 || counts[1] == 0) {
    throw Error(Errc::SingleClass, "logistic regression needs two populated classes");
  }
  const std::size_t n = data.rows();
  const std::size_t p = data.cols();
  LogisticModel m;
  m.feature_mean.assign(p, 0.0);
  m.feature_scale.assign(p, 1.0);
  for (std::size_t c = 0; c < p; ++c) {
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += data.at(i, c);
    mean /= static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (data.at(i, c) - mean) * (data.at(i, c) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    m.feature_mean[c] = mean;
    m.feature_scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  std::vector<double> x(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < p; ++c) {
      x[i * p + c] = (data.at(i, c) - m.feature_mean[c]) / m.feature_scale[c];
    }
  }
  m.weights.assign(p, 0.0);
  for (std::size_t e = 0; e < params.epochs; ++e) {
    m.loss_history.push_back(logistic_objective(x, p, data.labels(), m.weights, m.bias, params.l2));
    const auto g = logistic_gradient(x, p, data.labels(), m.weights, m.bias, params.l2);
    for (std::size_t c = 0; c < p; ++c) m.weights[c] -= params.learning_rate * g[c];
    m.bias -= params.learning_rate * g[p];
  }
  return m;
}

// ---------------------------------------------------------------- Naive Bayes

NaiveBayesModel train_naive_bayes(const Dataset& data) {
  const auto counts = data.class_counts();
  const std::size_t k = data.class_count();
  const std::size_t p = data.cols();
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw Error(Errc::EmptyClass, "class " + data.class_names()[c] + " is empty");
  }
  NaiveBayesModel m;
  m.mean.assign(k, std::vector<double>(p, 0.0));
  m.variance.assign(k, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto c = static_cast<std::size_t>(data.label(i));
    for (std::size_t f = 0; f < p; ++f) m.mean[c][f] += data.at(i, f);
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (auto& v : m.mean[c]) v /= static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto c = static_cast<std::size_t>(data.label(i));
    for (std::size_t f = 0; f < p; ++f) {
      const double d = data.at(i, f) - m.mean[c][f];
      m.variance[c][f] += d * d;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (auto& v : m.variance[c]) v = std::max(v / static_cast<double>(counts[c]), 1e-9);
    m.log_prior.push_back(std::log(static_cast<double>(counts[c]) / static_cast<double>(data.rows())));
  }
  return m;
}

std::vector<double> NaiveBayesModel::log_posterior(std::span<const double> x) const {
  constexpr double kLog2Pi = 1.8378770664093453;
  std::vector<double> out(log_prior.size());
  for (std::size_t c = 0; c < log_prior.size(); ++c) {
    double lp = log_prior[c];
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double d = x[f] - mean[c][f];
      lp -= 0.5 * (kLog2Pi + std::log(variance[c][f])) + d * d / (2.0 * variance[c][f]);
    }
    out[c] = lp;
  }
  return out;
}

std::vector<double> NaiveBayesModel::posterior(std::span<const double> x) const {
  auto lp = log_posterior(x);
  const double mx = *std::max_element(lp.begin(), lp.end());
  double sum = 0;
  for (auto& v : lp) sum += (v = std::exp(v - mx));
  for (auto& v : lp) v /= sum;
  return lp;
}

int NaiveBayesModel::predict(std::span<const double> x) const {
  const auto lp = log_posterior(x);
  return static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
}

// ---------------------------------------------------------------- Model wrapper

int TrainedModel::predict(std::span<const double> x) const {
  if (x.size() != feature_count) throw Error(Errc::DimensionMismatch, "feature count mismatch");
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

TrainedModel train_model(const std::string& kind, const Dataset& data, std::uint64_t seed) {
  TrainedModel out;
  out.kind = kind;
  out.class_names = data.class_names();
  out.feature_count = data.cols();
  if (kind == "tree") {
    TreeParams p;
    p.seed = seed;
    out.model = train_tree(data, p);
  } else if (kind == "bag") {
    out.model = train_ensemble(data, EnsembleParams::bagging(seed));
  } else if (kind == "rf") {
    out.model = train_ensemble(data, EnsembleParams::random_forest(data.cols(), seed));
  } else if (kind == "logit") {
    out.model = train_logistic(data);
  } else if (kind == "nb") {
    out.model = train_naive_bayes(data);
  } else {
    throw Error(Errc::InvalidArgument, "unknown model kind " + kind);
  }
  return out;
}

namespace {

nlohmann::json tree_node_json(const DecisionTree& t, std::size_t i) {
  const auto& n = t.nodes()[i];
  if (n.is_leaf()) return {{"class_counts", n.class_counts}, {"predicted", n.predicted}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"class_counts", n.class_counts},
          {"predicted", n.predicted},
          {"left", tree_node_json(t, static_cast<std::size_t>(n.left))},
          {"right", tree_node_json(t, static_cast<std::size_t>(n.right))}};
}

int tree_node_from_json(const nlohmann::json& j, std::vector<DecisionTree::Node>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.push_back({});
  DecisionTree::Node n;
  n.class_counts = j.at("class_counts").get<std::vector<std::size_t>>();
  n.predicted = j.at("predicted").get<int>();
  if (j.contains("feature")) {
    n.feature = j["feature"].get<int>();
    n.threshold = j.at("threshold").get<double>();
    n.left = tree_node_from_json(j.at("left"), nodes);
    n.right = tree_node_from_json(j.at("right"), nodes);
  }
  nodes[static_cast<std::size_t>(id)] = std::move(n);
  return id;
}

DecisionTree tree_from_json(const nlohmann::json& j) {
  DecisionTree t;
  tree_node_from_json(j, t.mutable_nodes());
  return t;
}

}  // namespace

nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json body;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DecisionTree>) {
          body = {{"tree", tree_node_json(m, 0)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          auto trees = nlohmann::json::array();
          for (const auto& t : m.trees) trees.push_back(tree_node_json(t, 0));
          body = {{"trees", std::move(trees)},
                  {"per_tree_feature_subsampling", m.per_tree_feature_subsampling},
                  {"rng_seed", m.rng_seed},
                  {"class_count", m.class_count}};
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          body = {{"weights", m.weights},
                  {"bias", m.bias},
                  {"feature_mean", m.feature_mean},
                  {"feature_scale", m.feature_scale}};
        } else {
          body = {{"log_prior", m.log_prior}, {"mean", m.mean}, {"variance", m.variance}};
        }
      },
      model.model);
  return {{"format_version", 1},
          {"kind", model.kind},
          {"class_names", model.class_names},
          {"feature_count", model.feature_count},
          {"model", std::move(body)}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw Error(Errc::InvalidArgument, "unsupported model format version");
    }
    TrainedModel out;
    out.kind = j.at("kind").get<std::string>();
    out.class_names = j.at("class_names").get<std::vector<std::string>>();
    out.feature_count = j.at("feature_count").get<std::size_t>();
    const auto& body = j.at("model");
    if (out.kind == "tree") {
      out.model = tree_from_json(body.at("tree"));
    } else if (out.kind == "bag" || out.kind == "rf") {
      ForestModel f;
      for (const auto& t : body.at("trees")) f.trees.push_back(tree_from_json(t));
      f.per_tree_feature_subsampling = body.at("per_tree_feature_subsampling").get<bool>();
      f.rng_seed = body.at("rng_seed").get<std::uint64_t>();
      f.class_count = body.at("class_count").get<std::size_t>();
      out.model = std::move(f);
    } else if (out.kind == "logit") {
      LogisticModel m;
      m.weights = body.at("weights").get<std::vector<double>>();
      m.bias = body.at("bias").get<double>();
      m.feature_mean = body.at("feature_mean").get<std::vector<double>>();
      m.feature_scale = body.at("feature_scale").get<std::vector<double>>();
      out.model = std::move(m);
    } else if (out.kind == "nb") {
      NaiveBayesModel m;
      m.log_prior = body.at("log_prior").get<std::vector<double>>();
      m.mean = body.at("mean").get<std::vector<std::vector<double>>>();
      m.variance = body.at("variance").get<std::vector<std::vector<double>>>();
      out.model = std::move(m);
    } else {
      throw Error(Errc::InvalidArgument, "unknown model kind " + out.kind);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed model: ") + e.what());
  }
}

// ---------------------------------------------------------------- Evaluation

EvalReport metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion) {
  EvalReport r;
  r.confusion_matrix = confusion;
  const std::size_t k = confusion.size();
  std::size_t total = 0, correct = 0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) total += confusion[a][b];
    correct += confusion[a][a];
  }
  if (total == 0) throw Error(Errc::InvalidArgument, "empty confusion matrix");
  r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  for (std::size_t c = 0; c < k; ++c) {
    double tp = static_cast<double>(confusion[c][c]);
    double fn = 0, fp = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fn += static_cast<double>(confusion[c][o]);
      fp += static_cast<double>(confusion[o][c]);
    }
    const double tn = static_cast<double>(total) - tp - fn - fp;
    const double recall = ratio(tp, tp + fn);
    const double precision = ratio(tp, tp + fp);
    r.average_recall += recall;
    r.average_specificity += ratio(tn, tn + fp);
    r.average_f1 += ratio(2 * precision * recall, precision + recall);
  }
  r.average_recall /= static_cast<double>(k);
  r.average_specificity /= static_cast<double>(k);
  r.average_f1 /= static_cast<double>(k);
  return r;
}

EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                                std::size_t class_count) {
  if (truth.size() != predicted.size()) throw Error(Errc::DimensionMismatch, "length mismatch");
  std::vector<std::vector<std::size_t>> cm(class_count, std::vector<std::size_t>(class_count, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++cm[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return metrics_from_confusion(cm);
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test) {
  if (test.rows() == 0) throw Error(Errc::InvalidArgument, "empty test set");
  if (test.class_names() != model.class_names) {
    throw Error(Errc::InvalidArgument, "test classes differ from model classes");
  }
  std::vector<int> pred(test.rows());
  for (std::size_t i = 0; i < test.rows(); ++i) pred[i] = model.predict(test.row(i));
  return evaluate_predictions(test.labels(), pred, test.class_count());
}

nlohmann::json eval_report_to_json(const EvalReport& r, const std::vector<std::string>& classes) {
  return {{"accuracy", r.accuracy},
          {"average_f1", r.average_f1},
          {"average_specificity", r.average_specificity},
          {"average_recall", r.average_recall},
          {"class_names", classes},
          {"confusion_matrix", r.confusion_matrix}};
}

std::pair<Dataset, Dataset> balanced_split(const Dataset& data, double train_fraction,
                                           std::uint64_t rng_seed) {
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw Error(Errc::InvalidArgument, "train_fraction must be in (0, 1)");
  }
  const auto counts = data.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 2) {
      throw Error(Errc::ClassTooSmall, "class " + data.class_names()[c] + " has < 2 rows");
    }
  }
  const std::size_t smallest = *std::min_element(counts.begin(), counts.end());
  const std::size_t per_class = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(smallest))), 1,
      smallest - 1);

  std::mt19937_64 rng(rng_seed);
  std::vector<std::size_t> train, test;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (static_cast<std::size_t>(data.label(i)) == c) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(per_class));
    test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(per_class), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

// ---------------------------------------------------------------- Windows

std::vector<SummaryFeatures> windowed_features(const Trajectory& traj, double window,
                                               double stride) {
  if (!(stride > 0)) throw Error(Errc::InvalidArgument, "stride must be > 0");
  if (!(window >= 2 * native_period(traj) - 1e-9)) {
    throw Error(Errc::InvalidArgument, "window shorter than two sample periods");
  }
  if (window > traj.duration() + 1e-9) {
    throw Error(Errc::WindowTooLong, "window exceeds trajectory duration");
  }
  const auto s = traj.samples();
  const std::size_t count =
      static_cast<std::size_t>(std::floor((traj.duration() - window) / stride + 1e-9)) + 1;
  std::vector<SummaryFeatures> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double start = traj.t_first() + static_cast<double>(k) * stride;
    const double end = start + window;
    auto lo = std::lower_bound(s.begin(), s.end(), start - 1e-9,
                               [](const TrajectorySample& a, double t) { return a.t < t; });
    auto hi = std::upper_bound(s.begin(), s.end(), end + 1e-9,
                               [](double t, const TrajectorySample& a) { return t < a.t; });
    const auto b = static_cast<std::size_t>(lo - s.begin());
    const auto e = static_cast<std::size_t>(hi - s.begin());
    if (e < b + 2) throw Error(Errc::InvalidArgument, "window holds fewer than two samples");
    out.push_back(compute_summary(traj.slice(b, e)));
  }
  return out;
}

WindowClassification classify_windows(const ForestModel& model,
                                      std::span<const SummaryFeatures> windows) {
  if (windows.empty()) throw Error(Errc::WindowTooLong, "no windows to classify");
  WindowClassification out;
  std::vector<std::size_t> votes(model.class_count, 0);
  for (const auto& w : windows) {
    const int c = model.predict(w.as_vector());
    out.per_window.push_back(c);
    ++votes[static_cast<std::size_t>(c)];
  }
  out.majority = argmax_lowest(votes);
  return out;
}

}  // namespace flightlab
