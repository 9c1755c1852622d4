#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flightlab/trajectory.hpp"

namespace flightlab {

/// Column names as they appear in the recorder's header (units included).
extern const std::array<std::string_view, TrajectorySample::kFieldCount> kTsvHeader;

/// A tokenized file before any invariant is enforced. An unlabeled leading
/// index column, when present, has already been stripped from every row.
struct RawTable {
  struct Row {
    std::size_t row_index;  // 1-based, counting data rows only
    std::vector<std::string> cells;
  };
  bool had_index_column = false;
  std::vector<Row> rows;
};

/// Tokenizes and checks the header. Throws MalformedHeader or EmptyFile.
RawTable read_table(std::string_view text);

/// One issue per violated invariant, in row order; empty iff the table
/// converts into a Trajectory.
std::vector<ValidationIssue> validate(const RawTable& table);

struct ParseOptions {
  std::string sortie_id;
  /// Drop rows flagged by validate() instead of failing.
  bool drop_invalid_rows = false;
};

/// Throws MalformedHeader, MalformedRow (with row index) or EmptyFile.
Trajectory parse_tsv(std::string_view text, const ParseOptions& opts = {});

/// Header row, then one row per sample in %.6E notation.
std::string write_tsv(const Trajectory& traj);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Reads a TSV file; the sortie id defaults to the file stem.
Trajectory load_tsv(const std::filesystem::path& path, bool drop_invalid_rows = false);

}  // namespace flightlab
