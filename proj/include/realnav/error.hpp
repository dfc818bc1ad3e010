#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace realnav {

enum class ErrorCode {
  kInvalidArgument,
  kDegeneratePose,
  kDegenerateConfiguration,
  kParse,
  kValidation,
  kEmptyDatabase,
  kEmptyMap,
  kInvalidEndpoint,
  kInfeasibleMap,
  kInvalidResult,
  kProtocol,
  kTimeout,
  kIo,
  kNoEpisodes,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception. The code identifies the failure class; the message
/// carries the human-readable detail (and the line number for parse errors).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParse,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace realnav
