#pragma once

#include <stdexcept>
#include <string>

namespace condmix {

// Every failure the library can raise, named after the condition it reports.
enum class Errc {
  // data / contract errors (CLI exit code 3)
  NonFiniteValue,
  RaggedRows,
  EmptyTable,
  DimensionMismatch,
  MissingResponse,
  EmptyPointSet,
  EmptyTraining,
  ClassOutOfRange,
  EmptyList,
  TooFewPoints,
  NotSorted,
  EmptyGrid,
  KTooLarge,
  InvalidArgument,
  Io,
  // numeric errors (CLI exit code 4)
  DegenerateColumn,
  NotPositiveDefinite,
  MixedBandwidth,
  LevelBeyondDeficit,
  OutOfDomain,
  NonPositiveInput,
};

const char* errc_name(Errc code) noexcept;

// Data-shaped failures map to exit code 3, numeric ones to 4.
bool is_data_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& message);

}  // namespace condmix
