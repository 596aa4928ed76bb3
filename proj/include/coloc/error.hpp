#pragma once

#include <stdexcept>
#include <string>

namespace coloc {

// Stable numeric categories; the CLI maps these onto process exit codes.
enum class ErrorCode {
  kInvalidArgument = 2,
  kIo = 3,
  kInsufficientData = 4,
  kDegenerateGeometry = 5,
  kInconsistentData = 6,
  kUndefinedYaw = 7,
  kUndefinedCorrelation = 8,
  kMalformedFrame = 9,
  kNetwork = 10,
  kRegistration = 11,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coloc
