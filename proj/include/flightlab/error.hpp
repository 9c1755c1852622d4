#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flightlab {

enum class Errc {
  MalformedHeader,
  MalformedRow,
  EmptyFile,
  InvalidTrajectory,
  DegenerateSpan,
  TooShort,
  InvalidArgument,
  NoPositives,
  NoNegatives,
  EmptyGrid,
  EmptyNode,
  SingleClass,
  EmptyClass,
  ClassTooSmall,
  WindowTooLong,
  EmptySequence,
  DimensionMismatch,
  InvalidSegment,
  DefectOutOfRange,
  DoesNotFit,
  IOFailure,
  BindFailure,
  CorpusNotFound,
  JournalLocked,
  UnknownSortie,
  InvalidInterval,
  MalformedRecord,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace flightlab
