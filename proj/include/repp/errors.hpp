#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace repp {

enum class ErrorCode {
  DomainEscape,
  NearSingularity,
  NoConvergence,
  NotRepelling,
  LevelOutOfRange,
  LinearizationBreakdown,
  DepthOverflow,
  MissingPotential,
  TailUnavailable,
  WindowBeyondHorizon,
  TooFewClusters,
  TooFewObservations,
  SizeZero,
  DegenerateEvent,
  ReturnCapExceeded,
  MismatchedTau,
  ConfigInvalid,
  MissingTable,
  PrecisionExhausted,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

/// Runs fn() and prefixes any library error with the trial index.
template <class Fn>
decltype(auto) in_trial(std::size_t trial, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "trial " + std::to_string(trial) + ": " + e.detail());
  }
}

}  // namespace repp
