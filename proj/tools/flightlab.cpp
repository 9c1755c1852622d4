#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flightlab/classifier.hpp"
#include "flightlab/corpus.hpp"
#include "flightlab/error.hpp"
#include "flightlab/irregularity.hpp"
#include "flightlab/matcher.hpp"
#include "flightlab/render.hpp"
#include "flightlab/rules.hpp"
#include "flightlab/service.hpp"
#include "flightlab/sim.hpp"
#include "flightlab/summary.hpp"
#include "flightlab/tsv.hpp"

namespace fs = std::filesystem;
using namespace flightlab;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

void print_error(std::string_view error, std::string_view detail) {
  std::cerr << json{{"error", error}, {"detail", detail}}.dump() << "\n";
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text_file(out, j.dump(2) + "\n");
  }
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, path + " is not valid JSON: " + e.what());
  }
}

int cmd_validate(const std::vector<std::string>& files) {
  bool any = false;
  auto results = json::array();
  for (const auto& f : files) {
    auto issues = json::array();
    auto report = [&](std::string_view kind, std::size_t row, const std::string& detail) {
      any = true;
      issues.push_back({{"kind", kind}, {"row_index", row}, {"detail", detail}});
      std::cerr << json{{"error", "ValidationIssue"}, {"file", f}, {"kind", kind},
                        {"row_index", row}, {"detail", detail}}.dump()
                << "\n";
    };
    try {
      for (const auto& is : validate(read_table(read_text_file(f)))) {
        report(issue_kind_name(is.kind), is.row_index, is.detail);
      }
    } catch (const Error& e) {
      report(errc_name(e.code()), 0, e.detail());
    }
    results.push_back({{"file", f}, {"valid", issues.empty()}, {"issues", std::move(issues)}});
  }
  std::cout << results.dump(2) << "\n";
  return any ? kFailure : kOk;
}

int cmd_label(const std::string& dir, const std::string& report_path, const std::string& detector) {
  DetectorConfig cfg = detector.empty() ? DetectorConfig{} : load_detector_config(detector);
  std::vector<IrregularityReport> reports;
  std::size_t flagged = 0;
  for (const auto& c : load_corpus(dir)) {
    reports.push_back(label_sortie(c.trajectory, cfg));
    if (!reports.back().clean) ++flagged;
  }
  const std::string csv = write_report(reports);
  if (report_path.empty() || report_path == "-") {
    std::cout << csv;
  } else {
    write_text_file(report_path, csv);
    std::cout << json{{"sorties", reports.size()}, {"flagged", flagged}, {"report", report_path}}.dump()
              << "\n";
  }
  return kOk;
}

struct SortArgs {
  std::string dir, rules = "table1", truth, report, tune, rules_out;
};

int cmd_sort(const SortArgs& a) {
  auto corpus = load_corpus(a.dir);
  if (!a.truth.empty()) {
    const auto manifest = load_manifest(a.truth);
    std::map<std::string, bool> truth;
    for (const auto& e : manifest.entries) truth[e.sortie_id] = e.truth_good;
    for (auto& c : corpus) {
      auto it = truth.find(c.trajectory.sortie_id());
      c.truth_good = it == truth.end() ? std::nullopt : std::optional<bool>(it->second);
    }
  }
  std::vector<SummaryFeatures> features;
  std::vector<ScoredSortie> scored;
  for (const auto& c : corpus) {
    features.push_back(compute_summary(c.trajectory));
    if (c.truth_good) scored.push_back({features.back(), *c.truth_good});
  }

  RuleSet rules = load_rules(a.rules);
  json out;
  if (!a.tune.empty()) {
    const json spec = read_json(a.tune);
    std::vector<std::vector<double>> grid;
    try {
      grid = spec.at("grid").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidArgument, std::string("tuning file needs a grid: ") + e.what());
    }
    const RuleSet shape = spec.contains("rules") ? rules_from_json(spec["rules"]) : rules;
    rules = tune_rules(scored, shape, grid).rules;
    out["tuned"] = true;
    if (!a.rules_out.empty()) write_text_file(a.rules_out, rules_to_json(rules).dump(2) + "\n");
  }
  out["rules"] = rules_to_json(rules);

  auto verdicts = json::array();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    json v = {{"sortie_id", corpus[i].trajectory.sortie_id()},
              {"auto_quality", evaluate_rules(features[i], rules) ? "good" : "bad"}};
    if (corpus[i].truth_good) v["truth_quality"] = *corpus[i].truth_good ? "good" : "bad";
    verdicts.push_back(std::move(v));
  }
  out["verdicts"] = std::move(verdicts);
  if (!scored.empty()) {
    const auto s = score_corpus(scored, rules);
    out["tp"] = s.tp;
    out["tn"] = s.tn;
    out["fp"] = s.fp;
    out["fn"] = s.fn;
    out["true_positive_rate"] = s.true_positive_rate;
    out["true_negative_rate"] = s.true_negative_rate;
    out["balanced_accuracy"] = s.balanced_accuracy();
  }
  emit(out, a.report);
  return kOk;
}

int cmd_features(const std::string& dir, const std::string& out) {
  const auto corpus = load_corpus(dir);
  emit(dataset_to_json(quality_dataset(corpus)), out);
  return kOk;
}

int cmd_train(const std::string& kind, const std::string& data, const std::string& out,
              std::uint64_t seed) {
  const auto model = train_model(kind, dataset_from_json(read_json(data)), seed);
  emit(model_to_json(model), out);
  return kOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& data, double min_accuracy) {
  const auto model = model_from_json(read_json(model_path));
  const auto test = dataset_from_json(read_json(data));
  const auto report = evaluate(model, test);
  std::cout << eval_report_to_json(report, test.class_names()).dump(2) << "\n";
  if (report.accuracy < min_accuracy) {
    print_error("BelowThreshold", "accuracy " + std::to_string(report.accuracy) + " < " +
                                      std::to_string(min_accuracy));
    return kFailure;
  }
  return kOk;
}

int cmd_split(const std::string& data, double fraction, std::uint64_t seed, const std::string& train_out,
              const std::string& test_out) {
  const auto [train, test] = balanced_split(dataset_from_json(read_json(data)), fraction, seed);
  write_text_file(train_out, dataset_to_json(train).dump() + "\n");
  write_text_file(test_out, dataset_to_json(test).dump() + "\n");
  std::cout << json{{"train_rows", train.rows()}, {"test_rows", test.rows()}}.dump() << "\n";
  return kOk;
}

struct MatchArgs {
  std::string templates, sortie;
  std::vector<double> rolling;
  MatchConfig cfg;
};

int cmd_match(const MatchArgs& a) {
  const auto templates = load_template_library(a.templates);
  const auto sortie = load_tsv(a.sortie);
  json out = {{"sortie_id", sortie.sortie_id()}};
  out["results"] = match_results_to_json(match_sortie(templates, sortie, a.cfg));
  if (!a.rolling.empty()) {
    auto rolling = json::array();
    for (const auto& t : templates) {
      const auto r = rolling_match(t, sortie, a.rolling[0], a.rolling[1], a.cfg);
      rolling.push_back({{"name", t.name},
                         {"best_start", r.best_start()},
                         {"best_end", r.best_start() + a.rolling[0]},
                         {"best_score", r.score[r.best]},
                         {"window_start", r.window_start},
                         {"score", r.score}});
    }
    out["rolling"] = std::move(rolling);
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_gen(std::size_t good, std::optional<std::size_t> bad, bool imbalanced, std::uint64_t seed,
            const std::string& out, double dt) {
  const std::size_t n_bad = imbalanced ? imbalanced_bad_count(good) : bad.value_or(0);
  const auto manifest = gen_corpus(good, n_bad, seed, out, dt);
  std::cout << json{{"out", out}, {"good", good}, {"bad", n_bad}, {"files", manifest.entries.size()}}.dump()
            << "\n";
  return kOk;
}

int cmd_gen_templates(const std::string& out, double dt) {
  const auto templates = standard_templates(dt);
  save_template_library(templates, out);
  std::cout << json{{"manifest", (fs::path(out) / "manifest.json").string()},
                    {"templates", templates.size()}}.dump()
            << "\n";
  return kOk;
}

int cmd_render(const std::string& file, const std::string& out, bool altitude, bool as_json,
               const PlotSpec& spec) {
  const auto traj = load_tsv(file);
  std::string doc;
  if (as_json) {
    doc = export_json(traj).dump() + "\n";
  } else {
    doc = altitude ? render_altitude(traj, spec) : render_topdown(traj, spec);
  }
  if (out.empty() || out == "-") {
    std::cout << doc;
  } else {
    write_text_file(out, doc);
  }
  return kOk;
}

int cmd_serve(const ServiceConfig& cfg, const std::string& bind) {
  const auto [host, port] = parse_bind_address(bind);
  LabelService svc(cfg);
  HttpService http(svc);
  const int bound = http.bind(host, port);
  std::cerr << json{{"listening", host + ":" + std::to_string(bound)}}.dump() << "\n";
  http.listen();
  return kOk;
}

bool is_usage_error(Errc c) {
  return c == Errc::InvalidArgument || c == Errc::IOFailure || c == Errc::CorpusNotFound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flight trajectory toolkit"};
  app.set_config("--config", "", "key=value file supplying option defaults");
  app.require_subcommand(1);

  std::vector<std::string> files;
  auto* validate_cmd = app.add_subcommand("validate", "Check TSV files");
  validate_cmd->add_option("files", files)->required()->check(CLI::ExistingFile);

  std::string dir, report, detector;
  auto* label_cmd = app.add_subcommand("label-irregularities", "Flag infeasible behavior");
  label_cmd->add_option("dir", dir)->envname("FLIGHTLAB_CORPUS")->required();
  label_cmd->add_option("--report", report, "CSV output (default stdout)");
  label_cmd->add_option("--detector", detector, "key=value detector thresholds");

  SortArgs sort_args;
  auto* sort_cmd = app.add_subcommand("sort", "Rule-based good/bad sorting");
  sort_cmd->add_option("dir", sort_args.dir)->envname("FLIGHTLAB_CORPUS")->required();
  sort_cmd->add_option("--rules", sort_args.rules, "table1 or a rules JSON file");
  sort_cmd->add_option("--truth", sort_args.truth, "corpus manifest.json");
  sort_cmd->add_option("--report", sort_args.report, "JSON output (default stdout)");
  sort_cmd->add_option("--tune", sort_args.tune, "JSON with \"grid\" (and optional \"rules\" shape)");
  sort_cmd->add_option("--rules-out", sort_args.rules_out, "write tuned rules here");

  std::string out;
  auto* features_cmd = app.add_subcommand("features", "Summary-feature dataset");
  features_cmd->add_option("dir", dir)->envname("FLIGHTLAB_CORPUS")->required();
  features_cmd->add_option("--out", out);

  std::string model_kind, data, model_path;
  std::uint64_t seed = 1;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  train_cmd->add_option("--model", model_kind)->required()->check(
      CLI::IsMember({"rf", "bag", "tree", "logit", "nb"}));
  train_cmd->add_option("--data", data)->required();
  train_cmd->add_option("--out", out);
  train_cmd->add_option("--seed", seed);

  double min_accuracy = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on a dataset");
  eval_cmd->add_option("--model", model_path)->required();
  eval_cmd->add_option("--data", data)->required();
  eval_cmd->add_option("--min-accuracy", min_accuracy, "exit 1 below this accuracy");

  double fraction = 0.75;
  std::string train_out, test_out;
  auto* split_cmd = app.add_subcommand("split", "Balanced train/test split");
  split_cmd->add_option("--data", data)->required();
  split_cmd->add_option("--train-fraction", fraction);
  split_cmd->add_option("--seed", seed);
  split_cmd->add_option("--train-out", train_out)->required();
  split_cmd->add_option("--test-out", test_out)->required();

  MatchArgs match_args;
  auto* match_cmd = app.add_subcommand("match", "Maneuver template matching");
  match_cmd->add_option("--templates", match_args.templates)->required();
  match_cmd->add_option("--sortie", match_args.sortie)->required();
  match_cmd->add_option("--rolling", match_args.rolling, "WINDOW STRIDE (s)")->expected(2);
  match_cmd->add_option("--temperature", match_args.cfg.temperature);
  match_cmd->add_option("--weight", match_args.cfg.combination_weight);
  match_cmd->add_flag("--z-normalize", match_args.cfg.z_normalize);

  std::size_t n_good = 0, n_bad = 0;
  bool imbalanced = false;
  double dt = 0.2;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen_cmd->add_option("--good", n_good)->required();
  auto* bad_opt = gen_cmd->add_option("--bad", n_bad);
  gen_cmd->add_flag("--imbalanced", imbalanced, "bad count for an 88:12 split")->excludes(bad_opt);
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--out", out)->required();
  gen_cmd->add_option("--dt", dt);

  auto* gen_templates_cmd = app.add_subcommand("gen-templates", "Write the standard template library");
  gen_templates_cmd->add_option("--out", out)->required();
  gen_templates_cmd->add_option("--dt", dt);

  std::string file;
  bool altitude = false, as_json = false;
  PlotSpec plot;
  auto* render_cmd = app.add_subcommand("render", "SVG ground track or altitude profile");
  render_cmd->add_option("file", file)->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--out", out);
  render_cmd->add_flag("--altitude", altitude);
  render_cmd->add_flag("--json", as_json, "trajectory JSON export instead of SVG");
  render_cmd->add_option("--width", plot.width);
  render_cmd->add_option("--height", plot.height);
  render_cmd->add_option("--margin", plot.margin);
  render_cmd->add_option("--decimation", plot.decimation);

  ServiceConfig svc_cfg;
  std::string bind = "127.0.0.1:8080", svc_rules, svc_templates, svc_ui, svc_corpus, svc_journal;
  auto* serve_cmd = app.add_subcommand("serve", "Run the label service");
  serve_cmd->add_option("--corpus", svc_corpus)->envname("FLIGHTLAB_CORPUS")->required();
  serve_cmd->add_option("--journal", svc_journal)->required();
  serve_cmd->add_option("--bind", bind, "HOST:PORT");
  serve_cmd->add_option("--rules", svc_rules, "table1 or a rules JSON file");
  serve_cmd->add_option("--templates", svc_templates, "template library manifest");
  serve_cmd->add_option("--ui", svc_ui, "static UI directory mounted at /ui");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return kUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(files);
    if (*label_cmd) return cmd_label(dir, report, detector);
    if (*sort_cmd) return cmd_sort(sort_args);
    if (*features_cmd) return cmd_features(dir, out);
    if (*train_cmd) return cmd_train(model_kind, data, out, seed);
    if (*eval_cmd) return cmd_evaluate(model_path, data, min_accuracy);
    if (*split_cmd) return cmd_split(data, fraction, seed, train_out, test_out);
    if (*match_cmd) return cmd_match(match_args);
    if (*gen_cmd) return cmd_gen(n_good, bad_opt->count() ? std::optional(n_bad) : std::nullopt,
                                 imbalanced, seed, out, dt);
    if (*gen_templates_cmd) return cmd_gen_templates(out, dt);
    if (*render_cmd) return cmd_render(file, out, altitude, as_json, plot);
    if (*serve_cmd) {
      svc_cfg.corpus_dir = svc_corpus;
      svc_cfg.journal_path = svc_journal;
      if (!svc_rules.empty()) svc_cfg.rules = load_rules(svc_rules);
      if (!svc_templates.empty()) svc_cfg.templates = svc_templates;
      if (!svc_ui.empty()) svc_cfg.ui_dir = svc_ui;
      return cmd_serve(svc_cfg, bind);
    }
  } catch (const Error& e) {
    print_error(errc_name(e.code()), e.detail());
    return is_usage_error(e.code()) ? kUsage : kFailure;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return kFailure;
  }
  return kUsage;
}
