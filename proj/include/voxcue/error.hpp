#pragma once

#include <stdexcept>
#include <string>

namespace voxcue {

enum class ErrorCode {
  InvalidArgument,
  Io,                   // file missing or unreadable
  Format,               // malformed input file
  UnsupportedEncoding,  // WAV that is not linear PCM
  EmptyAudio,
  DuplicateKey,
  InsufficientData,     // statistical precondition not met
  Degenerate,           // zero variance, zero vector, constant column
  NotFound,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace voxcue
