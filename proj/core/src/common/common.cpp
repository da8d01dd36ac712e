#include "evolvegen/common/error.hpp"
#include "evolvegen/common/word.hpp"

#include <algorithm>
#include <stdexcept>

namespace evolvegen {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kPlacementInfeasible: return "PlacementInfeasible";
    case ErrorCode::kGenerationStalled: return "GenerationStalled";
    case ErrorCode::kResourceBound: return "ResourceBound";
    case ErrorCode::kSignatureMismatch: return "SignatureMismatch";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kSpawnError: return "SpawnError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::string word_to_decimal(Word value) {
  if (value == 0) return "0";
  std::string out;
  while (value != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string sword_to_decimal(SWord value) {
  if (value < 0) return "-" + word_to_decimal(static_cast<Word>(-(value + 1)) + 1);
  return word_to_decimal(static_cast<Word>(value));
}

Word word_from_decimal(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  Word value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad digit in '" + text + "'");
    Word next = value * 10 + static_cast<Word>(c - '0');
    if (next / 10 != value) throw std::invalid_argument("number overflows: " + text);
    value = next;
  }
  return value;
}

}  // namespace evolvegen
