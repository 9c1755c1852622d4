#include "flightlab/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "flightlab/error.hpp"
#include "flightlab/tsv.hpp"

namespace flightlab {

DtwResult dtw(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptySequence, "DTW input is empty");
  const std::size_t m = b.size();
  std::vector<double> prev_cost(m), cur_cost(m);
  std::vector<std::size_t> prev_len(m), cur_len(m);

  // Picks the cheaper predecessor; equal costs prefer the shorter path.
  auto better = [](double c1, std::size_t l1, double c2, std::size_t l2) {
    return c1 < c2 || (c1 == c2 && l1 < l2);
  };

  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = std::abs(a[i] - b[j]);
      if (i == 0 && j == 0) {
        cur_cost[j] = local;
        cur_len[j] = 1;
        continue;
      }
      double best_cost = std::numeric_limits<double>::infinity();
      std::size_t best_len = 0;
      if (i > 0 && j > 0 && better(prev_cost[j - 1], prev_len[j - 1], best_cost, best_len)) {
        best_cost = prev_cost[j - 1];
        best_len = prev_len[j - 1];
      }
      if (i > 0 && better(prev_cost[j], prev_len[j], best_cost, best_len)) {
        best_cost = prev_cost[j];
        best_len = prev_len[j];
      }
      if (j > 0 && better(cur_cost[j - 1], cur_len[j - 1], best_cost, best_len)) {
        best_cost = cur_cost[j - 1];
        best_len = cur_len[j - 1];
      }
      cur_cost[j] = best_cost + local;
      cur_len[j] = best_len + 1;
    }
    std::swap(prev_cost, cur_cost);
    std::swap(prev_len, cur_len);
  }
  return {prev_cost[m - 1], prev_len[m - 1]};
}

// ---------------------------------------------------------------- Correlation

CorrelationMatrix::CorrelationMatrix(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0 || values_.size() != dim_ * dim_) {
    throw Error(Errc::DimensionMismatch, "correlation matrix is not square");
  }
}

CorrelationMatrix correlation_matrix(std::span<const std::vector<double>> series) {
  const std::size_t k = series.size();
  if (k == 0) throw Error(Errc::InvalidArgument, "no channels");
  const std::size_t n = series.front().size();
  if (n < 2) throw Error(Errc::TooShort, "correlation needs two samples");
  for (const auto& s : series) {
    if (s.size() != n) throw Error(Errc::DimensionMismatch, "channels differ in length");
  }
  std::vector<std::vector<double>> centered(k, std::vector<double>(n));
  std::vector<double> norm(k);
  for (std::size_t c = 0; c < k; ++c) {
    double mean = 0;
    for (double v : series[c]) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      centered[c][i] = series[c][i] - mean;
      ss += centered[c][i] * centered[c][i];
    }
    norm[c] = std::sqrt(ss);
  }
  // Treat channels whose spread is pure rounding noise as constant.
  std::vector<bool> constant(k);
  for (std::size_t c = 0; c < k; ++c) {
    double scale = 0;
    for (double v : series[c]) scale = std::max(scale, std::abs(v));
    constant[c] = norm[c] <= 1e-12 * std::max(1.0, scale) * std::sqrt(static_cast<double>(n));
  }
  std::vector<double> values(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    values[a * k + a] = 1.0;
    for (std::size_t b = a + 1; b < k; ++b) {
      double r = 0;
      if (!constant[a] && !constant[b]) {
        double cov = 0;
        for (std::size_t i = 0; i < n; ++i) cov += centered[a][i] * centered[b][i];
        r = std::clamp(cov / (norm[a] * norm[b]), -1.0, 1.0);
      }
      values[a * k + b] = r;
      values[b * k + a] = r;
    }
  }
  return CorrelationMatrix(k, std::move(values));
}

CorrelationMatrix correlation_matrix(const Trajectory& traj, std::span<const Channel> channels) {
  if (channels.empty()) throw Error(Errc::InvalidArgument, "no channels");
  std::vector<std::vector<double>> series;
  const bool any_derived = std::any_of(channels.begin(), channels.end(), is_derived);
  for (Channel ch : channels) {
    auto s = channel_extract(traj, ch);
    // Mixed raw/derived selections are aligned on the interval starts.
    if (any_derived && !is_derived(ch)) s.pop_back();
    series.push_back(std::move(s));
  }
  return correlation_matrix(series);
}

double cmd(const CorrelationMatrix& a, const CorrelationMatrix& b) {
  if (a.dim() != b.dim()) throw Error(Errc::DimensionMismatch, "correlation matrix sizes differ");
  double inner = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    inner += a.values()[i] * b.values()[i];
    na += a.values()[i] * a.values()[i];
    nb += b.values()[i] * b.values()[i];
  }
  return std::clamp(1.0 - inner / std::sqrt(na * nb), 0.0, 2.0);
}

// ---------------------------------------------------------------- Scores

ManeuverTemplate::ManeuverTemplate(std::string name_, Trajectory trajectory_,
                                   std::vector<Channel> channels_)
    : name(std::move(name_)), trajectory(std::move(trajectory_)), channels(std::move(channels_)) {
  if (channels.empty()) throw Error(Errc::InvalidArgument, "template needs at least one channel");
}

namespace {

std::vector<double> z_normalized(std::vector<double> s) {
  double mean = 0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double ss = 0;
  for (double v : s) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(s.size()));
  for (auto& v : s) v = sd > 1e-12 ? (v - mean) / sd : 0.0;
  return s;
}

double normalized_dtw(std::span<const double> a, std::span<const double> b) {
  const auto r = dtw(a, b);
  return r.cost / static_cast<double>(r.path_length);
}

Trajectory prepare(const Trajectory& traj, double dt) {
  return traj.duration() >= dt ? resample(traj, dt) : traj;
}

}  // namespace

UnivariateBreakdown univariate_breakdown(const ManeuverTemplate& tmpl, const Trajectory& sortie,
                                         bool z_normalize) {
  UnivariateBreakdown out;
  for (Channel ch : tmpl.channels) {
    auto a = channel_extract(tmpl.trajectory, ch);
    auto b = channel_extract(sortie, ch);
    if (z_normalize) {
      a = z_normalized(std::move(a));
      b = z_normalized(std::move(b));
    }
    out.dtw_raw += normalized_dtw(a, b);
    out.dtw_diff += normalized_dtw(first_difference(a), first_difference(b));
  }
  return out;
}

double univariate_score(const ManeuverTemplate& tmpl, const Trajectory& sortie, bool z_normalize) {
  return univariate_breakdown(tmpl, sortie, z_normalize).total();
}

double multivariate_score(const ManeuverTemplate& tmpl, const Trajectory& sortie) {
  return cmd(correlation_matrix(tmpl.trajectory, tmpl.channels),
             correlation_matrix(sortie, tmpl.channels));
}

std::vector<double> match_probabilities(std::span<const double> distances, double temperature) {
  if (distances.empty()) throw Error(Errc::InvalidArgument, "no distances");
  if (!(temperature > 0)) throw Error(Errc::InvalidArgument, "temperature must be > 0");
  std::vector<double> p(distances.size());
  const double lowest = *std::min_element(distances.begin(), distances.end());
  double sum = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp(-(distances[k] - lowest) / temperature);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::vector<MatchResult> match_sortie(std::span<const ManeuverTemplate> templates,
                                      const Trajectory& sortie, const MatchConfig& cfg) {
  if (templates.empty()) throw Error(Errc::InvalidArgument, "no templates");
  if (cfg.combination_weight < 0 || cfg.combination_weight > 1) {
    throw Error(Errc::InvalidArgument, "combination_weight must be in [0, 1]");
  }
  const Trajectory grid_sortie = prepare(sortie, cfg.resample_dt);
  std::vector<MatchResult> results(templates.size());
  std::vector<double> uni(templates.size()), multi(templates.size());
  for (std::size_t k = 0; k < templates.size(); ++k) {
    ManeuverTemplate tmpl = templates[k];
    tmpl.trajectory = prepare(tmpl.trajectory, cfg.resample_dt);
    const auto u = univariate_breakdown(tmpl, grid_sortie, cfg.z_normalize);
    results[k].name = tmpl.name;
    results[k].dtw_raw = u.dtw_raw;
    results[k].dtw_diff = u.dtw_diff;
    results[k].cmd = multivariate_score(tmpl, grid_sortie);
    uni[k] = u.total();
    multi[k] = results[k].cmd;
  }
  const auto pu = match_probabilities(uni, cfg.temperature);
  const auto pm = match_probabilities(multi, cfg.temperature);
  std::vector<double> blended(templates.size());
  const double w = cfg.combination_weight;
  for (std::size_t k = 0; k < templates.size(); ++k) blended[k] = w * uni[k] + (1 - w) * multi[k];
  const auto pc = match_probabilities(blended, cfg.temperature);
  for (std::size_t k = 0; k < templates.size(); ++k) {
    results[k].univariate_prob = pu[k];
    results[k].multivariate_prob = pm[k];
    results[k].combined_prob = pc[k];
  }
  std::stable_sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    if (a.combined_prob != b.combined_prob) return a.combined_prob > b.combined_prob;
    return a.name < b.name;
  });
  return results;
}

RollingMatch rolling_match(const ManeuverTemplate& tmpl_in, const Trajectory& sortie,
                           double window, double stride, const MatchConfig& cfg) {
  if (!(stride > 0)) throw Error(Errc::InvalidArgument, "stride must be > 0");
  if (window < 0.5 * tmpl_in.trajectory.duration() - 1e-9) {
    throw Error(Errc::WindowTooLong, "window shorter than half the template");
  }
  if (window > sortie.duration() + 1e-9) {
    throw Error(Errc::WindowTooLong, "window longer than the sortie");
  }
  ManeuverTemplate tmpl = tmpl_in;
  tmpl.trajectory = prepare(tmpl.trajectory, cfg.resample_dt);
  const Trajectory grid = prepare(sortie, cfg.resample_dt);
  const auto s = grid.samples();
  const double w = cfg.combination_weight;

  const std::size_t count =
      static_cast<std::size_t>(std::floor((sortie.duration() - window) / stride + 1e-9)) + 1;
  RollingMatch out;
  out.window_start.resize(count);
  out.score.resize(count);

  auto score_window = [&](std::size_t k) {
    const double start = sortie.t_first() + static_cast<double>(k) * stride;
    auto lo = std::lower_bound(s.begin(), s.end(), start - 1e-9,
                               [](const TrajectorySample& a, double t) { return a.t < t; });
    auto hi = std::upper_bound(s.begin(), s.end(), start + window + 1e-9,
                               [](double t, const TrajectorySample& a) { return t < a.t; });
    const auto b = static_cast<std::size_t>(lo - s.begin());
    const auto e = static_cast<std::size_t>(hi - s.begin());
    out.window_start[k] = start;
    if (e < b + 3) {
      out.score[k] = std::numeric_limits<double>::infinity();
      return;
    }
    const Trajectory part = grid.slice(b, e);
    out.score[k] = w * univariate_score(tmpl, part, cfg.z_normalize) +
                   (1 - w) * multivariate_score(tmpl, part);
  };

  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, count);
  std::vector<std::future<void>> jobs;
  for (std::size_t t = 0; t < workers; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t k = t; k < count; k += workers) score_window(k);
    }));
  }
  for (auto& j : jobs) j.get();

  out.best = static_cast<std::size_t>(std::min_element(out.score.begin(), out.score.end()) -
                                      out.score.begin());
  return out;
}

nlohmann::json match_results_to_json(std::span<const MatchResult> results) {
  auto arr = nlohmann::json::array();
  for (const auto& r : results) {
    arr.push_back({{"name", r.name},
                   {"dtw_raw", r.dtw_raw},
                   {"dtw_diff", r.dtw_diff},
                   {"cmd", r.cmd},
                   {"univariate_prob", r.univariate_prob},
                   {"multivariate_prob", r.multivariate_prob},
                   {"combined_prob", r.combined_prob}});
  }
  return arr;
}

std::vector<ManeuverTemplate> load_template_library(const std::filesystem::path& manifest) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("template manifest is not JSON: ") + e.what());
  }
  if (!j.is_array()) throw Error(Errc::InvalidArgument, "template manifest must be an array");
  std::vector<ManeuverTemplate> out;
  const auto base = manifest.parent_path();
  for (const auto& entry : j) {
    try {
      const auto name = entry.at("name").get<std::string>();
      std::vector<Channel> channels;
      for (const auto& c : entry.at("channels")) {
        const auto ch = channel_from_name(c.get<std::string>());
        if (!ch) throw Error(Errc::InvalidArgument, "unknown channel " + c.get<std::string>());
        channels.push_back(*ch);
      }
      auto traj = load_tsv(base / entry.at("file").get<std::string>()).with_id(name);
      out.emplace_back(name, std::move(traj), std::move(channels));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidArgument, std::string("malformed template entry: ") + e.what());
    }
  }
  return out;
}

void save_template_library(std::span<const ManeuverTemplate> templates,
                           const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IOFailure, "cannot create " + dir.string());
  auto manifest = nlohmann::json::array();
  for (const auto& t : templates) {
    const std::string file = t.name + ".tsv";
    write_text_file(dir / file, write_tsv(t.trajectory));
    std::vector<std::string> channels;
    for (Channel c : t.channels) channels.emplace_back(channel_name(c));
    manifest.push_back({{"name", t.name}, {"file", file}, {"channels", channels}});
  }
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace flightlab
