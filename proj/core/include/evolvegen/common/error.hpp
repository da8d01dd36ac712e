#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evolvegen {

// Stable error codes. The CLI prints these on stderr and tests match on them.
enum class ErrorCode {
  kSchemaViolation,
  kPlacementInfeasible,
  kGenerationStalled,
  kResourceBound,
  kSignatureMismatch,
  kFormatError,
  kSpawnError,
  kParseError,
  kSchemaMismatch,
  kDegenerateData,
  kEmptyPool,
  kConfigError,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define EVOLVEGEN_DEFINE_ERROR(Name, Code)                        \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(Code, what) {} \
  };

EVOLVEGEN_DEFINE_ERROR(SchemaViolation, ErrorCode::kSchemaViolation)
EVOLVEGEN_DEFINE_ERROR(PlacementInfeasible, ErrorCode::kPlacementInfeasible)
EVOLVEGEN_DEFINE_ERROR(GenerationStalled, ErrorCode::kGenerationStalled)
EVOLVEGEN_DEFINE_ERROR(ResourceBound, ErrorCode::kResourceBound)
EVOLVEGEN_DEFINE_ERROR(SignatureMismatch, ErrorCode::kSignatureMismatch)
EVOLVEGEN_DEFINE_ERROR(SpawnError, ErrorCode::kSpawnError)
EVOLVEGEN_DEFINE_ERROR(ParseError, ErrorCode::kParseError)
EVOLVEGEN_DEFINE_ERROR(SchemaMismatch, ErrorCode::kSchemaMismatch)
EVOLVEGEN_DEFINE_ERROR(DegenerateData, ErrorCode::kDegenerateData)
EVOLVEGEN_DEFINE_ERROR(EmptyPool, ErrorCode::kEmptyPool)
EVOLVEGEN_DEFINE_ERROR(ConfigError, ErrorCode::kConfigError)
EVOLVEGEN_DEFINE_ERROR(IoError, ErrorCode::kIoError)

#undef EVOLVEGEN_DEFINE_ERROR

// Malformed AIGER / DIMACS input. `position` is a byte offset for AIGER and a
// 1-based line number for DIMACS.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t position)
      : Error(ErrorCode::kFormatError,
              what + " (at " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace evolvegen
