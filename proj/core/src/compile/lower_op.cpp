#include "lower_op.hpp"

#include <algorithm>

#include "evolvegen/compile/semantics.hpp"

namespace evolvegen::compile {

using graph::OpKind;
using graph::ValueType;
using ts::ExprId;
using ts::ExprOp;
using ts::TransitionSystem;

namespace {

ExprId extend(TransitionSystem& t, ExprId e, const ValueType& type, unsigned width) {
  return t.resize(e, width, type.is_signed);
}

// Operand extended to `width` bits and shifted left to `frac` fraction bits.
ExprId align(TransitionSystem& t, ExprId e, const ValueType& type, unsigned frac, unsigned width) {
  ExprId x = extend(t, e, type, width);
  unsigned sh = frac - type.frac;
  if (sh == 0) return x;
  if (sh >= width) return t.zero(width);
  return t.op2(ExprOp::kShl, x, t.constant(width, sh));
}

unsigned ext_bits(const ValueType& t, unsigned frac) { return t.width + (frac - t.frac) + (t.is_signed ? 0 : 1); }

Word pow2(unsigned k) { return Word{1} << k; }

}  // namespace

ExprId lower_op(TransitionSystem& t, const graph::OpAttrs& attrs, std::span<const ExprId> ops,
                std::span<const ValueType> types) {
  const unsigned F = intermediate_frac(attrs, types);

  if (graph::is_comparison(attrs.kind)) {
    unsigned n = std::max(ext_bits(types[0], F), ext_bits(types[1], F));
    ExprId a = align(t, ops[0], types[0], F, n);
    ExprId b = align(t, ops[1], types[1], F, n);
    switch (attrs.kind) {
      case OpKind::kEq: return t.eq(a, b);
      case OpKind::kNeq: return t.ne(a, b);
      case OpKind::kLt: return t.slt(a, b);
      default: return t.bnot(t.slt(b, a));
    }
  }

  const unsigned E = intermediate_width(attrs, types);
  ExprId x = 0;
  switch (attrs.kind) {
    case OpKind::kAdd: x = t.add(align(t, ops[0], types[0], F, E), align(t, ops[1], types[1], F, E)); break;
    case OpKind::kSub: x = t.sub(align(t, ops[0], types[0], F, E), align(t, ops[1], types[1], F, E)); break;
    case OpKind::kAnd: x = t.band(align(t, ops[0], types[0], F, E), align(t, ops[1], types[1], F, E)); break;
    case OpKind::kOr: x = t.bor(align(t, ops[0], types[0], F, E), align(t, ops[1], types[1], F, E)); break;
    case OpKind::kXor: x = t.bxor(align(t, ops[0], types[0], F, E), align(t, ops[1], types[1], F, E)); break;
    case OpKind::kMux: {
      ExprId sel = t.extract(ops[0], 0, 1);
      x = t.ite(sel, align(t, ops[1], types[1], F, E), align(t, ops[2], types[2], F, E));
      break;
    }
    case OpKind::kNot: x = t.bnot(extend(t, ops[0], types[0], E)); break;
    case OpKind::kMul: x = t.mul(extend(t, ops[0], types[0], E), extend(t, ops[1], types[1], E)); break;
    case OpKind::kShl: {
      // E is 64 and the amount is at most 64 bits wide.
      ExprId amt = t.zext(ops[1], E);
      x = t.op2(ExprOp::kShl, extend(t, ops[0], types[0], E), amt);
      break;
    }
    case OpKind::kShr: {
      unsigned n = types[0].width + (types[0].is_signed ? 0 : 1);
      unsigned wide = std::max(n, types[1].width);
      ExprId v = extend(t, ops[0], types[0], wide);
      ExprId amt = t.zext(ops[1], wide);
      x = t.extract(t.op2(types[0].is_signed ? ExprOp::kAshr : ExprOp::kLshr, v, amt), 0, E);
      break;
    }
    default: break;
  }

  // Requantize from F to the result's fraction bits.
  const unsigned f = attrs.frac_bits();
  ExprId y;
  unsigned wy;
  if (f >= F) {
    unsigned sh = f - F;
    wy = E + sh;
    y = t.sext(x, wy);
    if (sh) y = t.op2(ExprOp::kShl, y, t.constant(wy, sh));
  } else {
    unsigned k = F - f;
    if (attrs.rounding == graph::Rounding::kRoundHalfUp) {
      wy = std::max(E, k) + 1;
      ExprId z = t.add(t.sext(x, wy), t.constant(wy, pow2(k - 1)));
      y = t.op2(ExprOp::kAshr, z, t.constant(wy, k));
    } else {
      wy = E;
      y = t.op2(ExprOp::kAshr, x, t.constant(wy, std::min(k, wy - 1)));
    }
  }

  const unsigned W = attrs.width;
  if (attrs.saturation == graph::Saturation::kSaturate) {
    unsigned wz = std::max(wy, W + 1);
    ExprId yz = t.sext(y, wz);
    Word hi = attrs.is_signed ? pow2(W - 1) - 1 : pow2(W) - 1;
    Word lo = attrs.is_signed ? truncate(~(pow2(W - 1) - 1), wz) : 0;
    ExprId chi = t.constant(wz, hi), clo = t.constant(wz, lo);
    ExprId clamped = t.ite(t.slt(chi, yz), chi, t.ite(t.slt(yz, clo), clo, yz));
    return t.extract(clamped, 0, W);
  }
  if (wy < W) y = t.sext(y, W);
  return t.extract(y, 0, W);
}

ExprId lower_cast(TransitionSystem& t, ExprId raw, const ValueType& from, const ValueType& to) {
  unsigned up = to.frac > from.frac ? to.frac - from.frac : 0;
  unsigned wt = from.width + 1 + up;
  ExprId v = t.resize(raw, wt, from.is_signed);
  if (to.frac > from.frac) {
    v = t.op2(ExprOp::kShl, v, t.constant(wt, up));
  } else if (to.frac < from.frac) {
    v = t.op2(ExprOp::kAshr, v, t.constant(wt, std::min(from.frac - to.frac, wt - 1)));
  }
  return t.resize(v, to.width, true);
}

}  // namespace evolvegen::compile
