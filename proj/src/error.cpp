#include "voxcue/error.hpp"

namespace voxcue {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Format: return "format error";
    case ErrorCode::UnsupportedEncoding: return "unsupported encoding";
    case ErrorCode::EmptyAudio: return "empty audio";
    case ErrorCode::DuplicateKey: return "duplicate key";
    case ErrorCode::InsufficientData: return "insufficient data";
    case ErrorCode::Degenerate: return "degenerate input";
    case ErrorCode::NotFound: return "not found";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace voxcue
