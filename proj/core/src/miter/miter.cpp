#include "evolvegen/miter/miter.hpp"

#include <stdexcept>

#include "evolvegen/common/error.hpp"

namespace evolvegen::miter {

using ts::ExprId;
using ts::ExprNode;
using ts::ExprOp;
using ts::TransitionSystem;

namespace {

struct Side {
  ExprId valid = 0;
  ExprId result = 0;
};

// Copies `src` into `dst`: inputs become `held`, states become prefixed
// states. Returns the side's valid and result expressions.
Side embed(TransitionSystem& dst, const TransitionSystem& src, const std::string& prefix,
           const std::vector<ExprId>& held) {
  std::vector<std::uint32_t> states;
  for (const ts::StateVar& s : src.states()) states.push_back(dst.add_state(prefix + s.name, s.width, s.init));
  std::vector<ExprId> map(src.num_exprs());
  for (ExprId e = 0; e < src.num_exprs(); ++e) {
    const ExprNode& n = src.expr(e);
    auto a = [&](int k) { return map[n.args[k]]; };
    switch (n.op) {
      case ExprOp::kConst: map[e] = dst.constant(n.width, n.value); break;
      case ExprOp::kInput: map[e] = held[n.aux]; break;
      case ExprOp::kState: map[e] = dst.state_ref(states[n.aux]); break;
      case ExprOp::kNot: map[e] = dst.op1(ExprOp::kNot, a(0)); break;
      case ExprOp::kIte: map[e] = dst.ite(a(0), a(1), a(2)); break;
      case ExprOp::kZext: map[e] = dst.zext(a(0), n.width); break;
      case ExprOp::kSext: map[e] = dst.sext(a(0), n.width); break;
      case ExprOp::kExtract: map[e] = dst.extract(a(0), n.aux, n.width); break;
      default: map[e] = dst.op2(n.op, a(0), a(1)); break;
    }
  }
  for (std::size_t i = 0; i < states.size(); ++i) dst.set_next(states[i], map[src.states()[i].next]);
  auto valid = src.output("valid");
  auto result = src.output("result");
  if (!valid || !result) throw SignatureMismatch("design lacks valid/result outputs");
  return {map[*valid], map[*result]};
}

}  // namespace

TransitionSystem build_miter(const TransitionSystem& a, const TransitionSystem& b) {
  if (a.inputs().size() != b.inputs().size()) throw SignatureMismatch("input counts differ");
  for (std::size_t i = 0; i < a.inputs().size(); ++i) {
    if (a.inputs()[i].name != b.inputs()[i].name || a.inputs()[i].width != b.inputs()[i].width) {
      throw SignatureMismatch("input '" + a.inputs()[i].name + "' differs between variants");
    }
  }
  auto ra = a.output("result"), rb = b.output("result");
  if (!ra || !rb || !a.output("valid") || !b.output("valid")) {
    throw SignatureMismatch("design lacks valid/result outputs");
  }
  if (a.width(*ra) != b.width(*rb)) {
    throw SignatureMismatch("result widths differ (" + std::to_string(a.width(*ra)) + " vs " +
                            std::to_string(b.width(*rb)) + ")");
  }

  TransitionSystem m;
  m.name = "miter";
  const std::uint32_t started = m.add_state("started", 1, 0);
  m.set_next(started, m.ones(1));
  std::vector<ExprId> held;
  for (std::size_t i = 0; i < a.inputs().size(); ++i) {
    const ts::TsInput& in = a.inputs()[i];
    std::uint32_t x = m.add_input(in.name, in.width);
    std::uint32_t sh = m.add_state("shadow." + in.name, in.width, 0);
    ExprId h = m.ite(m.state_ref(started), m.state_ref(sh), m.input_ref(x));
    m.set_next(sh, h);
    held.push_back(h);
  }

  Side sa = embed(m, a, "A.", held);
  Side sb = embed(m, b, "B.", held);

  // Sticky capture of each side's first valid result.
  auto capture = [&](const Side& s, const std::string& p) {
    const unsigned w = m.width(s.result);
    std::uint32_t done = m.add_state(p + "cap_done", 1, 0);
    std::uint32_t res = m.add_state(p + "cap_result", w, 0);
    ExprId done_q = m.state_ref(done);
    m.set_next(done, m.bor(done_q, s.valid));
    m.set_next(res, m.ite(done_q, m.state_ref(res), s.result));
    return Side{m.bor(done_q, s.valid), m.ite(done_q, m.state_ref(res), s.result)};
  };
  Side ca = capture(sa, "A.");
  Side cb = capture(sb, "B.");
  ExprId bad = m.band(m.band(ca.valid, cb.valid), m.ne(ca.result, cb.result));
  m.set_output("unsafe_signal", bad);
  m.set_bad(bad);
  return m;
}

}  // namespace evolvegen::miter
