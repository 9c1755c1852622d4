#include "flightlab/journal.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>

#include "flightlab/error.hpp"
#include "flightlab/tsv.hpp"

namespace flightlab {

std::string_view label_kind_name(LabelKind k) noexcept {
  return k == LabelKind::quality ? "quality" : "maneuver";
}

std::optional<LabelKind> label_kind_from_name(std::string_view s) noexcept {
  if (s == "quality") return LabelKind::quality;
  if (s == "maneuver") return LabelKind::maneuver;
  return std::nullopt;
}

nlohmann::json label_to_json(const LabelRecord& r) {
  nlohmann::json j = {{"record_id", r.record_id},
                      {"sortie_id", r.sortie_id},
                      {"label_kind", label_kind_name(r.label_kind)},
                      {"value", r.value}};
  if (r.t_start) j["t_start"] = *r.t_start;
  if (r.t_end) j["t_end"] = *r.t_end;
  j["labeler_id"] = r.labeler_id;
  j["created_at"] = r.created_at;
  return j;
}

LabelRecord label_from_json(const nlohmann::json& j) {
  try {
    LabelRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    r.sortie_id = j.at("sortie_id").get<std::string>();
    const auto kind = label_kind_from_name(j.at("label_kind").get<std::string>());
    if (!kind) throw Error(Errc::MalformedRecord, "unknown label_kind");
    r.label_kind = *kind;
    r.value = j.at("value").get<std::string>();
    if (j.contains("t_start")) r.t_start = j["t_start"].get<double>();
    if (j.contains("t_end")) r.t_end = j["t_end"].get<double>();
    r.labeler_id = j.at("labeler_id").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedRecord, e.what());
  }
}

bool LabelFilter::matches(const LabelRecord& r) const {
  return (!sortie_id || *sortie_id == r.sortie_id) && (!label_kind || *label_kind == r.label_kind) &&
         (!labeler_id || *labeler_id == r.labeler_id);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(us / 1000000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<long long>(us % 1000000));
  return buf;
}

LabelJournal::LabelJournal(std::filesystem::path path) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_RDWR | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(Errc::JournalLocked, "cannot open journal " + path_.string() + ": " + std::strerror(errno));
  }
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(Errc::JournalLocked, "journal " + path_.string() + " is held by another process");
  }

  std::string text;
  try {
    text = read_text_file(path_);
  } catch (const Error&) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
  // A torn final line (crash mid-write) is cut off so later appends stay line-aligned.
  const auto last_nl = text.rfind('\n');
  const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  if (keep != text.size()) {
    if (::ftruncate(fd_, static_cast<off_t>(keep)) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw Error(Errc::JournalLocked, "cannot repair journal tail");
    }
    text.resize(keep);
  }
  std::size_t pos = 0, line_no = 0;
  try {
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      const std::string_view line(text.data() + pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (line.empty()) continue;
      records_.push_back(label_from_json(nlohmann::json::parse(line)));
    }
  } catch (const std::exception& e) {
    ::close(fd_);
    fd_ = -1;
    throw Error(Errc::MalformedRecord,
                "journal line " + std::to_string(line_no) + " unreadable: " + e.what());
  }
  next_id_ = records_.size() + 1;
}

LabelJournal::~LabelJournal() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

LabelRecord LabelJournal::append(LabelRecord record) {
  std::lock_guard lock(mu_);
  char id[32];
  std::snprintf(id, sizeof id, "rec-%06llu", static_cast<unsigned long long>(next_id_));
  record.record_id = id;
  record.created_at = utc_timestamp();
  const std::string line = label_to_json(record).dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::IOFailure, std::string("journal write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error(Errc::IOFailure, "journal fsync failed");
  ++next_id_;
  records_.push_back(record);
  return record;
}

std::vector<LabelRecord> LabelJournal::export_labels(const LabelFilter& filter) const {
  std::vector<LabelRecord> out;
  {
    std::lock_guard lock(mu_);
    for (const auto& r : records_) {
      if (filter.matches(r)) out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LabelRecord& a, const LabelRecord& b) { return a.created_at < b.created_at; });
  return out;
}

std::size_t LabelJournal::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::size_t LabelJournal::count_for(std::string_view sortie_id) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [&](const LabelRecord& r) { return r.sortie_id == sortie_id; }));
}

}  // namespace flightlab
