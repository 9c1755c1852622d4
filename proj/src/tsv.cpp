#include "flightlab/tsv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flightlab/error.hpp"

namespace flightlab {

const std::array<std::string_view, TrajectorySample::kFieldCount> kTsvHeader = {
    "time (sec)", "xEast (m)",  "yNorth (m)", "zUp (m)",    "vx (m/s)",
    "vy (m/s)",   "vz (m/s)",   "head (deg)", "pitch (deg)", "roll (deg)"};

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    cells.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

// "xEast (m)" -> "xeast"
std::string canonical_column(std::string_view cell) {
  const auto paren = cell.find('(');
  if (paren != std::string_view::npos) cell = cell.substr(0, paren);
  cell = trim(cell);
  std::string out;
  for (char c : cell) {
    if (c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (out == "heading") out = "head";
  if (out == "t") out = "time";
  return out;
}

bool header_matches(const std::vector<std::string>& cells, std::size_t offset) {
  static const std::array<std::string_view, TrajectorySample::kFieldCount> names = {
      "time", "xeast", "ynorth", "zup", "vx", "vy", "vz", "head", "pitch", "roll"};
  if (cells.size() != names.size() + offset) return false;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (canonical_column(cells[i + offset]) != names[i]) return false;
  }
  return true;
}

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct ConvertedRows {
  std::vector<TrajectorySample> samples;
  std::vector<std::size_t> row_index;
  std::vector<ValidationIssue> cell_issues;
};

ConvertedRows convert(const RawTable& table) {
  ConvertedRows out;
  for (const auto& row : table.rows) {
    if (row.cells.size() != TrajectorySample::kFieldCount) {
      out.cell_issues.push_back({ValidationIssue::Kind::column_mismatch, row.row_index,
                                 "expected 10 cells, found " + std::to_string(row.cells.size())});
      continue;
    }
    std::array<double, TrajectorySample::kFieldCount> f{};
    bool ok = true;
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (!parse_number(row.cells[c], f[c]) || !std::isfinite(f[c])) {
        out.cell_issues.push_back({ValidationIssue::Kind::non_finite_value, row.row_index,
                                   "column " + std::string(kTsvHeader[c]) + ": '" +
                                       row.cells[c] + "'"});
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    out.samples.push_back(TrajectorySample::from_fields(f));
    out.row_index.push_back(row.row_index);
  }
  return out;
}

}  // namespace

RawTable read_table(std::string_view text) {
  RawTable table;
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.push_back(line);
    start = pos + 1;
  }
  if (lines.empty()) throw Error(Errc::EmptyFile, "no header");
  // Strip a UTF-8 byte order mark.
  if (lines.front().starts_with("\xEF\xBB\xBF")) lines.front().remove_prefix(3);

  const auto header = split_tabs(lines.front());
  if (header_matches(header, 1)) {
    table.had_index_column = true;
  } else if (!header_matches(header, 0)) {
    throw Error(Errc::MalformedHeader, "expected columns: time xEast yNorth zUp vx vy vz head pitch roll");
  }
  if (lines.size() == 1) throw Error(Errc::EmptyFile, "header without data rows");

  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = split_tabs(lines[i]);
    if (cells.size() == TrajectorySample::kFieldCount + 1) {
      cells.erase(cells.begin());
      table.had_index_column = true;
    }
    table.rows.push_back({i, std::move(cells)});
  }
  return table;
}

std::vector<ValidationIssue> validate(const RawTable& table) {
  auto converted = convert(table);
  auto issues = std::move(converted.cell_issues);
  for (auto issue : validate_samples(converted.samples)) {
    if (issue.kind == ValidationIssue::Kind::short_record) continue;
    issue.row_index = converted.row_index[issue.row_index - 1];
    issues.push_back(std::move(issue));
  }
  if (table.rows.size() < 2) {
    issues.push_back({ValidationIssue::Kind::short_record, table.rows.size(),
                      "fewer than two data rows"});
  }
  std::stable_sort(issues.begin(), issues.end(),
                   [](const auto& a, const auto& b) { return a.row_index < b.row_index; });
  return issues;
}

Trajectory parse_tsv(std::string_view text, const ParseOptions& opts) {
  const RawTable table = read_table(text);
  const auto issues = validate(table);
  if (issues.empty()) {
    return Trajectory(opts.sortie_id, convert(table).samples);
  }
  if (!opts.drop_invalid_rows) {
    const auto& first = issues.front();
    throw Error(Errc::MalformedRow, "row " + std::to_string(first.row_index) + ": " +
                                        std::string(issue_kind_name(first.kind)) + " (" +
                                        first.detail + ")");
  }
  auto converted = convert(table);
  std::vector<TrajectorySample> kept;
  for (const auto& s : converted.samples) {
    if (s.pitch < -90.0 || s.pitch > 90.0) continue;
    if (!kept.empty() && !(s.t > kept.back().t)) continue;
    kept.push_back(s);
  }
  if (kept.size() < 2) throw Error(Errc::MalformedRow, "fewer than two valid rows remain");
  return Trajectory(opts.sortie_id, std::move(kept));
}

std::string write_tsv(const Trajectory& traj) {
  std::string out;
  out.reserve(traj.size() * 140 + 128);
  for (std::size_t i = 0; i < kTsvHeader.size(); ++i) {
    if (i) out.push_back('\t');
    out.append(kTsvHeader[i]);
  }
  out.push_back('\n');
  char buf[64];
  for (const auto& s : traj.samples()) {
    const auto f = s.fields();
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out.push_back('\t');
      const int n = std::snprintf(buf, sizeof buf, "%.6E", f[i]);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back('\n');
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IOFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IOFailure, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::IOFailure, "short write to " + path.string());
}

Trajectory load_tsv(const std::filesystem::path& path, bool drop_invalid_rows) {
  ParseOptions opts;
  opts.sortie_id = path.stem().string();
  opts.drop_invalid_rows = drop_invalid_rows;
  auto traj = parse_tsv(read_text_file(path), opts);
  return Trajectory(traj.sortie_id(), {traj.samples().begin(), traj.samples().end()},
                    path.string());
}

}  // namespace flightlab
