#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace flightlab {

enum class LabelKind { quality, maneuver };

std::string_view label_kind_name(LabelKind k) noexcept;
std::optional<LabelKind> label_kind_from_name(std::string_view s) noexcept;

struct LabelRecord {
  std::string sortie_id;
  LabelKind label_kind = LabelKind::quality;
  std::string value;
  std::optional<double> t_start;
  std::optional<double> t_end;
  std::string labeler_id;
  std::string created_at;  // ISO-8601 UTC, microseconds
  std::string record_id;

  bool operator==(const LabelRecord&) const = default;
};

nlohmann::json label_to_json(const LabelRecord& r);
LabelRecord label_from_json(const nlohmann::json& j);  // throws MalformedRecord

struct LabelFilter {
  std::optional<std::string> sortie_id;
  std::optional<LabelKind> label_kind;
  std::optional<std::string> labeler_id;

  bool matches(const LabelRecord& r) const;
};

/// Current UTC time as "YYYY-MM-DDTHH:MM:SS.uuuuuuZ".
std::string utc_timestamp();

/// Append-only JSON-lines label store. The file is opened, replayed and
/// exclusively locked on construction (JournalLocked on failure). Appends
/// are serialized and fsync'ed before returning.
class LabelJournal {
 public:
  explicit LabelJournal(std::filesystem::path path);
  ~LabelJournal();
  LabelJournal(const LabelJournal&) = delete;
  LabelJournal& operator=(const LabelJournal&) = delete;

  /// Fills record_id and created_at, appends, returns the stored record.
  LabelRecord append(LabelRecord record);

  /// Matching records ordered by created_at, then append order.
  std::vector<LabelRecord> export_labels(const LabelFilter& filter = {}) const;

  std::size_t size() const;
  std::size_t count_for(std::string_view sortie_id) const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::vector<LabelRecord> records_;
  std::uint64_t next_id_ = 1;
};

}  // namespace flightlab
