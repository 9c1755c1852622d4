#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "flightlab/irregularity.hpp"
#include "flightlab/journal.hpp"
#include "flightlab/matcher.hpp"
#include "flightlab/rules.hpp"
#include "flightlab/trajectory.hpp"

namespace flightlab {

struct ServiceConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path journal_path;
  std::optional<RuleSet> rules;  // table1 when unset
  DetectorConfig detector;
  std::optional<std::filesystem::path> templates;  // template library manifest
  std::optional<std::filesystem::path> ui_dir;     // served under /ui
};

struct SortieSummary {
  std::string sortie_id;
  double duration = 0;
  std::size_t sample_count = 0;
  std::optional<bool> truth_good;
  bool auto_good = false;
  std::vector<std::string> irregularities;  // distinct behavior names
  std::size_t label_count = 0;
};

nlohmann::json summary_to_json(const SortieSummary& s);

/// Corpus index, cached auto-analysis and the label journal, independent of
/// the HTTP transport.
class LabelService {
 public:
  /// Throws CorpusNotFound (missing directory or no .tsv files) and
  /// JournalLocked.
  explicit LabelService(ServiceConfig cfg);

  std::vector<SortieSummary> sorties() const;
  const Trajectory& trajectory(const std::string& sortie_id) const;  // UnknownSortie
  nlohmann::json auto_labels(const std::string& sortie_id) const;

  /// Validates a POST body (LabelRecord minus sortie_id, record_id and
  /// created_at) and appends it. A non-empty labeler_header wins over the
  /// body's labeler_id. Throws UnknownSortie, InvalidInterval, MalformedRecord.
  LabelRecord append_label(const std::string& sortie_id, const nlohmann::json& body,
                           const std::string& labeler_header = "");

  std::vector<LabelRecord> export_labels(const LabelFilter& filter = {}) const;

  const ServiceConfig& config() const noexcept { return cfg_; }

 private:
  struct Entry {
    Trajectory trajectory;
    std::optional<bool> truth_good;
  };
  struct Auto {
    bool good;
    IrregularityReport report;
  };

  const Entry& entry(const std::string& sortie_id) const;
  const Auto& analysis(const std::string& sortie_id) const;

  ServiceConfig cfg_;
  RuleSet rules_;
  std::map<std::string, Entry> corpus_;
  std::vector<ManeuverTemplate> templates_;
  std::unique_ptr<LabelJournal> journal_;
  mutable std::mutex cache_mu_;
  mutable std::map<std::string, Auto> cache_;
};

/// HTTP/1.1 JSON front end over a LabelService.
class HttpService {
 public:
  explicit HttpService(LabelService& service);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  /// Throws BindFailure.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Parses "HOST:PORT" (HOST may be empty for 0.0.0.0). Throws InvalidArgument.
std::pair<std::string, int> parse_bind_address(const std::string& addr);

/// Runs the service until the process is stopped.
void serve(const ServiceConfig& cfg, const std::string& bind_address);

}  // namespace flightlab
