#include "evolvegen/netlist/bitblast.hpp"

#include <stdexcept>

namespace evolvegen::netlist {

using ts::ExprId;
using ts::ExprNode;
using ts::ExprOp;
using Bits = std::vector<AigLit>;

namespace {

class Blaster {
 public:
  explicit Blaster(const ts::TransitionSystem& t) : t_(t) {}

  AigCircuit run(const BitblastOptions& opt) {
    const auto& inputs = t_.inputs();
    const auto& states = t_.states();
    std::vector<Bits> in_bits(inputs.size()), st_bits(states.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      for (unsigned k = 0; k < inputs[i].width; ++k) in_bits[i].push_back(m_.new_input());
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (unsigned k = 0; k < states[i].width; ++k) st_bits[i].push_back(m_.new_input());
    }

    std::vector<bool> live(states.size(), true);
    if (opt.prune_latches) live = live_states(opt.keep_outputs);

    bits_.assign(t_.num_exprs(), {});
    done_.assign(t_.num_exprs(), false);
    for (ExprId e = 0; e < t_.num_exprs(); ++e) {
      const ExprNode& n = t_.expr(e);
      if (n.op == ExprOp::kInput) {
        bits_[e] = in_bits[n.aux];
        done_[e] = true;
      } else if (n.op == ExprOp::kState) {
        bits_[e] = st_bits[n.aux];
        done_[e] = true;
      }
    }

    SequentialSpec spec;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      for (unsigned k = 0; k < inputs[i].width; ++k) {
        spec.inputs.push_back(in_bits[i][k]);
        spec.input_names.push_back(inputs[i].name + "[" + std::to_string(k) + "]");
      }
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!live[i]) continue;
      const Bits& next = blast(states[i].next);
      for (unsigned k = 0; k < states[i].width; ++k) {
        spec.latches.push_back(st_bits[i][k]);
        spec.latch_next.push_back(next[k]);
        spec.latch_init.push_back(test_bit(states[i].init, k) ? LatchInit::kOne : LatchInit::kZero);
        spec.latch_names.push_back(states[i].name + "[" + std::to_string(k) + "]");
      }
    }
    if (opt.keep_outputs) {
      for (const ts::TsOutput& o : t_.outputs()) {
        for (AigLit l : blast(o.expr)) spec.outputs.push_back(l);
      }
    }
    if (t_.bad()) spec.bad.push_back(blast(*t_.bad())[0]);
    return export_circuit(m_, spec);
  }

 private:
  std::vector<bool> live_states(bool with_outputs) {
    std::vector<bool> live(t_.states().size(), false);
    std::vector<bool> seen(t_.num_exprs(), false);
    std::vector<ExprId> stack;
    auto push = [&](ExprId e) {
      if (!seen[e]) {
        seen[e] = true;
        stack.push_back(e);
      }
    };
    if (with_outputs) {
      for (const ts::TsOutput& o : t_.outputs()) push(o.expr);
    }
    if (t_.bad()) push(*t_.bad());
    while (!stack.empty()) {
      ExprId e = stack.back();
      stack.pop_back();
      const ExprNode& n = t_.expr(e);
      if (n.op == ExprOp::kState) {
        if (!live[n.aux]) {
          live[n.aux] = true;
          push(t_.states()[n.aux].next);
        }
        continue;
      }
      for (int k = 0; k < arity(n.op); ++k) push(n.args[k]);
    }
    return live;
  }

  static int arity(ExprOp op) {
    switch (op) {
      case ExprOp::kConst:
      case ExprOp::kInput:
      case ExprOp::kState: return 0;
      case ExprOp::kNot:
      case ExprOp::kZext:
      case ExprOp::kSext:
      case ExprOp::kExtract: return 1;
      case ExprOp::kIte: return 3;
      default: return 2;
    }
  }

  // Iterative over the arena prefix so deep expressions do not recurse.
  const Bits& blast(ExprId root) {
    if (done_[root]) return bits_[root];
    std::vector<ExprId> stack{root};
    while (!stack.empty()) {
      ExprId e = stack.back();
      if (done_[e]) {
        stack.pop_back();
        continue;
      }
      const ExprNode& n = t_.expr(e);
      bool ready = true;
      for (int k = 0; k < arity(n.op); ++k) {
        if (!done_[n.args[k]]) {
          stack.push_back(n.args[k]);
          ready = false;
        }
      }
      if (!ready) continue;
      bits_[e] = compute(n);
      done_[e] = true;
      stack.pop_back();
    }
    return bits_[root];
  }

  Bits compute(const ExprNode& n) {
    const unsigned w = n.width;
    auto arg = [&](int k) -> const Bits& { return bits_[n.args[k]]; };
    Bits out(w, kAigFalse);
    switch (n.op) {
      case ExprOp::kConst:
        for (unsigned k = 0; k < w; ++k) out[k] = test_bit(n.value, k) ? kAigTrue : kAigFalse;
        return out;
      case ExprOp::kInput:
      case ExprOp::kState: throw std::logic_error("leaf not bound");
      case ExprOp::kNot:
        for (unsigned k = 0; k < w; ++k) out[k] = aig_not(arg(0)[k]);
        return out;
      case ExprOp::kAnd:
        for (unsigned k = 0; k < w; ++k) out[k] = m_.make_and(arg(0)[k], arg(1)[k]);
        return out;
      case ExprOp::kOr:
        for (unsigned k = 0; k < w; ++k) out[k] = m_.make_or(arg(0)[k], arg(1)[k]);
        return out;
      case ExprOp::kXor:
        for (unsigned k = 0; k < w; ++k) out[k] = m_.make_xor(arg(0)[k], arg(1)[k]);
        return out;
      case ExprOp::kAdd: return add(arg(0), arg(1), kAigFalse);
      case ExprOp::kSub: return add(arg(0), invert(arg(1)), kAigTrue);
      case ExprOp::kMul: return mul(arg(0), arg(1));
      case ExprOp::kShl:
      case ExprOp::kLshr:
      case ExprOp::kAshr: return shift(n.op, arg(0), arg(1));
      case ExprOp::kEq: {
        Bits x;
        for (std::size_t k = 0; k < arg(0).size(); ++k) x.push_back(m_.make_xnor(arg(0)[k], arg(1)[k]));
        return {m_.make_and_all(x)};
      }
      case ExprOp::kUlt: return {ult(arg(0), arg(1))};
      case ExprOp::kSlt: {
        Bits a = arg(0), b = arg(1);
        a.back() = aig_not(a.back());
        b.back() = aig_not(b.back());
        return {ult(a, b)};
      }
      case ExprOp::kIte:
        for (unsigned k = 0; k < w; ++k) out[k] = m_.make_mux(arg(0)[0], arg(1)[k], arg(2)[k]);
        return out;
      case ExprOp::kZext:
      case ExprOp::kSext: {
        const Bits& a = arg(0);
        for (unsigned k = 0; k < w; ++k) {
          out[k] = k < a.size() ? a[k] : (n.op == ExprOp::kSext ? a.back() : kAigFalse);
        }
        return out;
      }
      case ExprOp::kExtract:
        for (unsigned k = 0; k < w; ++k) out[k] = arg(0)[n.aux + k];
        return out;
    }
    return out;
  }

  static Bits invert(const Bits& a) {
    Bits r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) r[k] = aig_not(a[k]);
    return r;
  }

  // Ripple-carry: sum = a^b^c, carry = (a&b) | ((a^b)&c).
  Bits add(const Bits& a, const Bits& b, AigLit carry) {
    Bits s(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      AigLit t = m_.make_xor(a[k], b[k]);
      s[k] = m_.make_xor(t, carry);
      if (k + 1 < a.size()) carry = m_.make_or(m_.make_and(a[k], b[k]), m_.make_and(t, carry));
    }
    return s;
  }

  // a < b unsigned: no carry out of a + ~b + 1.
  AigLit ult(const Bits& a, const Bits& b) {
    AigLit carry = kAigTrue;
    for (std::size_t k = 0; k < a.size(); ++k) {
      AigLit nb = aig_not(b[k]);
      AigLit t = m_.make_xor(a[k], nb);
      carry = m_.make_or(m_.make_and(a[k], nb), m_.make_and(t, carry));
    }
    return aig_not(carry);
  }

  // Shift-and-add array, truncated to the operand width.
  Bits mul(const Bits& a, const Bits& b) {
    const std::size_t w = a.size();
    Bits acc(w, kAigFalse);
    for (std::size_t i = 0; i < w; ++i) {
      if (b[i] == kAigFalse) continue;
      Bits pp(w, kAigFalse);
      for (std::size_t k = i; k < w; ++k) pp[k] = m_.make_and(a[k - i], b[i]);
      acc = add(acc, pp, kAigFalse);
    }
    return acc;
  }

  // Logarithmic barrel shifter; amounts of at least the width saturate.
  Bits shift(ExprOp op, const Bits& a, const Bits& amt) {
    const std::size_t w = a.size();
    const AigLit fill = op == ExprOp::kAshr ? a.back() : kAigFalse;
    Bits cur = a;
    std::vector<AigLit> overflow;
    for (std::size_t k = 0; k < amt.size(); ++k) {
      if (k >= 63 || (std::size_t{1} << k) >= w) {
        overflow.push_back(amt[k]);
        continue;
      }
      const std::size_t sh = std::size_t{1} << k;
      Bits next(w);
      for (std::size_t j = 0; j < w; ++j) {
        AigLit moved;
        if (op == ExprOp::kShl) {
          moved = j >= sh ? cur[j - sh] : kAigFalse;
        } else {
          moved = j + sh < w ? cur[j + sh] : fill;
        }
        next[j] = m_.make_mux(amt[k], moved, cur[j]);
      }
      cur = std::move(next);
    }
    AigLit over = m_.make_or_all(overflow);
    for (std::size_t j = 0; j < w; ++j) cur[j] = m_.make_mux(over, fill, cur[j]);
    return cur;
  }

  const ts::TransitionSystem& t_;
  AigManager m_;
  std::vector<Bits> bits_;
  std::vector<bool> done_;
};

}  // namespace

AigCircuit bitblast(const ts::TransitionSystem& ts, const BitblastOptions& options) {
  return Blaster(ts).run(options);
}

AigCircuit bitblast_property(const ts::TransitionSystem& ts) {
  return Blaster(ts).run({false, true});
}

}  // namespace evolvegen::netlist
