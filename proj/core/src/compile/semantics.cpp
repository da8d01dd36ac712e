#include "evolvegen/compile/semantics.hpp"

#include <algorithm>

namespace evolvegen::compile {

using graph::OpKind;
using graph::ValueType;

namespace {

SWord value_of(Word raw, const ValueType& t) {
  return t.is_signed ? to_signed(raw, t.width) : static_cast<SWord>(truncate(raw, t.width));
}

SWord wrap_signed(SWord x, unsigned bits) { return to_signed(from_signed(x, bits), bits); }

unsigned ext_bits(const ValueType& t, unsigned frac) { return t.width + (frac - t.frac) + (t.is_signed ? 0 : 1); }

SWord shift_left(SWord x, unsigned k) { return static_cast<SWord>(static_cast<Word>(x) << k); }

SWord floor_shift(SWord x, unsigned k) {
  if (k >= 127) return x < 0 ? -1 : 0;
  return x >> k;
}

}  // namespace

unsigned intermediate_frac(const graph::OpAttrs& attrs, std::span<const ValueType> t) {
  switch (attrs.kind) {
    case OpKind::kMul: return t[0].frac + t[1].frac;
    case OpKind::kNot:
    case OpKind::kShl:
    case OpKind::kShr: return t[0].frac;
    case OpKind::kMux: return std::max(t[1].frac, t[2].frac);
    default: return std::max(t[0].frac, t[1].frac);
  }
}

unsigned intermediate_width(const graph::OpAttrs& attrs, std::span<const ValueType> t) {
  const unsigned F = intermediate_frac(attrs, t);
  unsigned n = 0;
  switch (attrs.kind) {
    case OpKind::kAdd:
    case OpKind::kSub: n = std::max(ext_bits(t[0], F), ext_bits(t[1], F)) + 1; break;
    case OpKind::kAnd:
    case OpKind::kOr:
    case OpKind::kXor:
    case OpKind::kEq:
    case OpKind::kNeq:
    case OpKind::kLt:
    case OpKind::kLe: n = std::max(ext_bits(t[0], F), ext_bits(t[1], F)); break;
    case OpKind::kMux: n = std::max(ext_bits(t[1], F), ext_bits(t[2], F)); break;
    case OpKind::kNot:
    case OpKind::kShr: n = t[0].width + (t[0].is_signed ? 0 : 1); break;
    case OpKind::kMul: n = t[0].width + t[1].width + (!t[0].is_signed && !t[1].is_signed ? 1 : 0); break;
    case OpKind::kShl: n = 64; break;
  }
  return std::min(64u, n);
}

Word eval_op_scalar(const graph::OpAttrs& attrs, std::span<const Word> raw, std::span<const ValueType> t) {
  const unsigned F = intermediate_frac(attrs, t);
  auto aligned = [&](int k) { return shift_left(value_of(raw[k], t[k]), F - t[k].frac); };

  if (graph::is_comparison(attrs.kind)) {
    SWord a = aligned(0), b = aligned(1);
    bool r = false;
    switch (attrs.kind) {
      case OpKind::kEq: r = a == b; break;
      case OpKind::kNeq: r = a != b; break;
      case OpKind::kLt: r = a < b; break;
      default: r = a <= b; break;
    }
    return r ? 1 : 0;
  }

  const unsigned E = intermediate_width(attrs, t);
  SWord x = 0;
  switch (attrs.kind) {
    case OpKind::kAdd: x = aligned(0) + aligned(1); break;
    case OpKind::kSub: x = aligned(0) - aligned(1); break;
    case OpKind::kAnd: x = aligned(0) & aligned(1); break;
    case OpKind::kOr: x = aligned(0) | aligned(1); break;
    case OpKind::kXor: x = aligned(0) ^ aligned(1); break;
    case OpKind::kMux: x = truncate(raw[0], 1) ? aligned(1) : aligned(2); break;
    case OpKind::kNot: x = ~value_of(raw[0], t[0]); break;
    case OpKind::kMul: x = value_of(raw[0], t[0]) * value_of(raw[1], t[1]); break;
    case OpKind::kShl: {
      Word amt = truncate(raw[1], t[1].width);
      x = amt >= 64 ? 0 : shift_left(value_of(raw[0], t[0]), static_cast<unsigned>(amt));
      break;
    }
    case OpKind::kShr: {
      Word amt = truncate(raw[1], t[1].width);
      x = floor_shift(value_of(raw[0], t[0]), amt >= 127 ? 127u : static_cast<unsigned>(amt));
      break;
    }
    default: break;
  }
  x = wrap_signed(x, E);

  const unsigned f = attrs.frac_bits();
  SWord y;
  if (f >= F) {
    y = shift_left(x, f - F);
  } else {
    const unsigned k = F - f;
    if (attrs.rounding == graph::Rounding::kRoundHalfUp) {
      y = floor_shift(x + shift_left(1, k - 1), k);
    } else {
      y = floor_shift(x, k);
    }
  }

  const unsigned W = attrs.width;
  if (attrs.saturation == graph::Saturation::kSaturate) {
    SWord hi = attrs.is_signed ? shift_left(1, W - 1) - 1 : shift_left(1, W) - 1;
    SWord lo = attrs.is_signed ? -shift_left(1, W - 1) : 0;
    y = std::clamp(y, lo, hi);
  }
  return from_signed(y, W);
}

Word cast_scalar(Word raw, const ValueType& from, const ValueType& to) {
  SWord v = value_of(raw, from);
  if (to.frac >= from.frac) {
    v = shift_left(v, to.frac - from.frac);
  } else {
    v = floor_shift(v, from.frac - to.frac);
  }
  return from_signed(v, to.width);
}

}  // namespace evolvegen::compile
