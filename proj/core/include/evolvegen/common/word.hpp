#pragma once

#include <cstdint>
#include <string>

namespace evolvegen {

// Bit-vector payload for word-level simulation. Design values are at most 64
// bits wide, but fixed-point intermediates need up to 128.
using Word = unsigned __int128;
using SWord = __int128;

inline constexpr unsigned kMaxExprWidth = 128;

inline Word width_mask(unsigned width) {
  if (width >= 128) return ~Word{0};
  return (Word{1} << width) - 1;
}

inline Word truncate(Word value, unsigned width) { return value & width_mask(width); }

// Two's-complement interpretation of the low `width` bits.
inline SWord to_signed(Word value, unsigned width) {
  value = truncate(value, width);
  if (width == 0) return 0;
  if (width < 128 && ((value >> (width - 1)) & 1)) {
    return static_cast<SWord>(value | ~width_mask(width));
  }
  return static_cast<SWord>(value);
}

inline Word from_signed(SWord value, unsigned width) {
  return truncate(static_cast<Word>(value), width);
}

inline bool test_bit(Word value, unsigned bit) { return ((value >> bit) & 1) != 0; }

std::string word_to_decimal(Word value);
std::string sword_to_decimal(SWord value);
// Parses an unsigned decimal string; throws std::invalid_argument.
Word word_from_decimal(const std::string& text);

}  // namespace evolvegen
