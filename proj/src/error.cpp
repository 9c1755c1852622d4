#include "flightlab/error.hpp"

namespace flightlab {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::InvalidTrajectory: return "InvalidTrajectory";
    case Errc::DegenerateSpan: return "DegenerateSpan";
    case Errc::TooShort: return "TooShort";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NoPositives: return "NoPositives";
    case Errc::NoNegatives: return "NoNegatives";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::EmptyNode: return "EmptyNode";
    case Errc::SingleClass: return "SingleClass";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::ClassTooSmall: return "ClassTooSmall";
    case Errc::WindowTooLong: return "WindowTooLong";
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidSegment: return "InvalidSegment";
    case Errc::DefectOutOfRange: return "DefectOutOfRange";
    case Errc::DoesNotFit: return "DoesNotFit";
    case Errc::IOFailure: return "IOFailure";
    case Errc::BindFailure: return "BindFailure";
    case Errc::CorpusNotFound: return "CorpusNotFound";
    case Errc::JournalLocked: return "JournalLocked";
    case Errc::UnknownSortie: return "UnknownSortie";
    case Errc::InvalidInterval: return "InvalidInterval";
    case Errc::MalformedRecord: return "MalformedRecord";
  }
  return "Unknown";
}

}  // namespace flightlab
