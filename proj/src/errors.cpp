#include "condmix/errors.hpp"

namespace condmix {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::RaggedRows: return "RaggedRows";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::MissingResponse: return "MissingResponse";
    case Errc::EmptyPointSet: return "EmptyPointSet";
    case Errc::EmptyTraining: return "EmptyTraining";
    case Errc::ClassOutOfRange: return "ClassOutOfRange";
    case Errc::EmptyList: return "EmptyList";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::NotSorted: return "NotSorted";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
    case Errc::DegenerateColumn: return "DegenerateColumn";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::MixedBandwidth: return "MixedBandwidth";
    case Errc::LevelBeyondDeficit: return "LevelBeyondDeficit";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::NonPositiveInput: return "NonPositiveInput";
  }
  return "Unknown";
}

bool is_data_error(Errc code) noexcept {
  switch (code) {
    case Errc::DegenerateColumn:
    case Errc::NotPositiveDefinite:
    case Errc::MixedBandwidth:
    case Errc::LevelBeyondDeficit:
    case Errc::OutOfDomain:
    case Errc::NonPositiveInput:
      return false;
    default:
      return true;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

void raise(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace condmix
