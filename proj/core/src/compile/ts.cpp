#include "evolvegen/compile/ts.hpp"

#include <array>
#include <stdexcept>

namespace evolvegen::ts {

namespace {

constexpr std::array<std::string_view, 20> kOpNames = {
    "const", "input", "state", "not", "and", "or",  "xor", "add",  "sub",  "mul",
    "shl",   "lshr",  "ashr",  "eq",  "ult", "slt", "ite", "zext", "sext", "extract"};

bool commutative(ExprOp op) {
  return op == ExprOp::kAnd || op == ExprOp::kOr || op == ExprOp::kXor || op == ExprOp::kAdd ||
         op == ExprOp::kMul || op == ExprOp::kEq;
}

std::string key_of(const ExprNode& n) {
  std::string k;
  k.reserve(40);
  k.push_back(static_cast<char>(n.op));
  auto put32 = [&](std::uint32_t v) { k.append(reinterpret_cast<const char*>(&v), sizeof v); };
  put32(n.width);
  put32(n.aux);
  for (ExprId a : n.args) put32(a);
  if (n.op == ExprOp::kConst) k.append(reinterpret_cast<const char*>(&n.value), sizeof n.value);
  return k;
}

}  // namespace

std::string_view expr_op_name(ExprOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

Word eval_op(const ExprNode& n, Word a, Word b, Word c) {
  const unsigned w = n.width;
  const Word mask = width_mask(w);
  switch (n.op) {
    case ExprOp::kConst: return n.value;
    case ExprOp::kInput:
    case ExprOp::kState: return a;
    case ExprOp::kNot: return ~a & mask;
    case ExprOp::kAnd: return a & b;
    case ExprOp::kOr: return a | b;
    case ExprOp::kXor: return a ^ b;
    case ExprOp::kAdd: return (a + b) & mask;
    case ExprOp::kSub: return (a - b) & mask;
    case ExprOp::kMul: return (a * b) & mask;
    case ExprOp::kShl: return b >= w ? 0 : (a << static_cast<unsigned>(b)) & mask;
    case ExprOp::kLshr: return b >= w ? 0 : a >> static_cast<unsigned>(b);
    case ExprOp::kAshr: {
      SWord sa = to_signed(a, w);
      if (b >= w) return sa < 0 ? mask : 0;
      return from_signed(sa >> static_cast<unsigned>(b), w);
    }
    case ExprOp::kEq: return a == b ? 1 : 0;
    case ExprOp::kUlt: return a < b ? 1 : 0;
    case ExprOp::kSlt: return to_signed(a, n.aux) < to_signed(b, n.aux) ? 1 : 0;
    case ExprOp::kIte: return a ? b : c;
    case ExprOp::kZext: return a;
    case ExprOp::kSext: return from_signed(to_signed(a, n.aux), w);
    case ExprOp::kExtract: return (a >> n.aux) & mask;
  }
  return 0;
}

std::uint32_t TransitionSystem::add_input(std::string input_name, unsigned width) {
  auto idx = static_cast<std::uint32_t>(inputs_.size());
  inputs_.push_back({std::move(input_name), width});
  ExprNode n;
  n.op = ExprOp::kInput;
  n.width = width;
  n.aux = idx;
  input_refs_.push_back(intern(n));
  return idx;
}

std::uint32_t TransitionSystem::add_state(std::string state_name, unsigned width, Word init) {
  auto idx = static_cast<std::uint32_t>(states_.size());
  ExprNode n;
  n.op = ExprOp::kState;
  n.width = width;
  n.aux = idx;
  ExprId ref = intern(n);
  state_refs_.push_back(ref);
  states_.push_back({std::move(state_name), width, truncate(init, width), ref});
  return idx;
}

void TransitionSystem::set_next(std::uint32_t state, ExprId next) {
  if (width(next) != states_.at(state).width) {
    throw std::logic_error("next-state width mismatch for " + states_[state].name);
  }
  states_[state].next = next;
}

void TransitionSystem::set_output(std::string output_name, ExprId e) {
  for (TsOutput& o : outputs_) {
    if (o.name == output_name) {
      o.expr = e;
      return;
    }
  }
  outputs_.push_back({std::move(output_name), e});
}

void TransitionSystem::set_bad(ExprId e) {
  if (width(e) != 1) throw std::logic_error("bad must be 1 bit wide");
  bad_ = e;
}

std::optional<ExprId> TransitionSystem::output(std::string_view output_name) const {
  for (const TsOutput& o : outputs_) {
    if (o.name == output_name) return o.expr;
  }
  return std::nullopt;
}

ExprId TransitionSystem::intern(const ExprNode& n) {
  std::string k = key_of(n);
  auto it = table_.find(k);
  if (it != table_.end()) return it->second;
  auto id = static_cast<ExprId>(exprs_.size());
  exprs_.push_back(n);
  table_.emplace(std::move(k), id);
  return id;
}

ExprId TransitionSystem::constant(unsigned width, Word value) {
  ExprNode n;
  n.op = ExprOp::kConst;
  n.width = width;
  n.value = truncate(value, width);
  return intern(n);
}

ExprId TransitionSystem::input_ref(std::uint32_t i) { return input_refs_.at(i); }
ExprId TransitionSystem::state_ref(std::uint32_t s) { return state_refs_.at(s); }

ExprId TransitionSystem::fold(const ExprNode& n) {
  int arity = n.op == ExprOp::kIte ? 3 : (n.op == ExprOp::kNot || n.op >= ExprOp::kZext) ? 1 : 2;
  bool all_const = true;
  for (int i = 0; i < arity; ++i) all_const = all_const && is_const(n.args[i]);
  if (all_const) {
    Word v[3] = {0, 0, 0};
    for (int i = 0; i < arity; ++i) v[i] = exprs_[n.args[i]].value;
    return constant(n.width, eval_op(n, v[0], v[1], v[2]));
  }
  return intern(n);
}

ExprId TransitionSystem::op1(ExprOp op, ExprId a) {
  if (op != ExprOp::kNot) throw std::logic_error("op1 supports only not");
  const ExprNode& x = exprs_[a];
  if (x.op == ExprOp::kNot) return x.args[0];
  ExprNode n;
  n.op = op;
  n.width = x.width;
  n.args[0] = a;
  return fold(n);
}

ExprId TransitionSystem::op2(ExprOp op, ExprId a, ExprId b) {
  const unsigned w = width(a);
  if (w != width(b)) {
    throw std::logic_error(std::string("width mismatch in ") + std::string(expr_op_name(op)) + ": " +
                           std::to_string(w) + " vs " + std::to_string(width(b)));
  }
  if (commutative(op) && a > b) std::swap(a, b);
  auto cval = [&](ExprId e) -> std::optional<Word> {
    if (!is_const(e)) return std::nullopt;
    return exprs_[e].value;
  };
  auto ca = cval(a), cb = cval(b);
  const Word all = width_mask(w);
  switch (op) {
    case ExprOp::kAnd:
      if (a == b) return a;
      if ((ca && *ca == 0) || (cb && *cb == 0)) return zero(w);
      if (ca && *ca == all) return b;
      if (cb && *cb == all) return a;
      break;
    case ExprOp::kOr:
      if (a == b) return a;
      if ((ca && *ca == all) || (cb && *cb == all)) return ones(w);
      if (ca && *ca == 0) return b;
      if (cb && *cb == 0) return a;
      break;
    case ExprOp::kXor:
      if (a == b) return zero(w);
      if (ca && *ca == 0) return b;
      if (cb && *cb == 0) return a;
      break;
    case ExprOp::kAdd:
      if (ca && *ca == 0) return b;
      if (cb && *cb == 0) return a;
      break;
    case ExprOp::kSub:
      if (cb && *cb == 0) return a;
      if (a == b) return zero(w);
      break;
    case ExprOp::kMul:
      if ((ca && *ca == 0) || (cb && *cb == 0)) return zero(w);
      if (ca && *ca == 1) return b;
      if (cb && *cb == 1) return a;
      break;
    case ExprOp::kShl:
    case ExprOp::kLshr:
    case ExprOp::kAshr:
      if (cb && *cb == 0) return a;
      break;
    case ExprOp::kEq:
      if (a == b) return constant(1, 1);
      if (w == 1 && cb) return *cb ? a : bnot(a);
      if (w == 1 && ca) return *ca ? b : bnot(b);
      break;
    case ExprOp::kUlt:
    case ExprOp::kSlt:
      if (a == b) return constant(1, 0);
      break;
    default: throw std::logic_error("op2 does not support this operator");
  }
  ExprNode n;
  n.op = op;
  n.width = (op == ExprOp::kEq || op == ExprOp::kUlt || op == ExprOp::kSlt) ? 1 : w;
  n.args = {a, b, 0};
  if (op == ExprOp::kSlt) n.aux = w;
  return fold(n);
}

ExprId TransitionSystem::ite(ExprId c, ExprId t, ExprId e) {
  if (width(c) != 1) throw std::logic_error("ite condition must be 1 bit");
  if (width(t) != width(e)) throw std::logic_error("ite branch width mismatch");
  if (is_const(c)) return exprs_[c].value ? t : e;
  if (t == e) return t;
  if (width(t) == 1 && is_const(t) && is_const(e)) return exprs_[t].value ? c : bnot(c);
  if (exprs_[c].op == ExprOp::kNot) return ite(exprs_[c].args[0], e, t);
  ExprNode n;
  n.op = ExprOp::kIte;
  n.width = width(t);
  n.args = {c, t, e};
  return fold(n);
}

ExprId TransitionSystem::zext(ExprId a, unsigned w) {
  if (w == width(a)) return a;
  if (w < width(a)) throw std::logic_error("zext to a narrower width");
  ExprNode n;
  n.op = ExprOp::kZext;
  n.width = w;
  n.args[0] = a;
  return fold(n);
}

ExprId TransitionSystem::sext(ExprId a, unsigned w) {
  if (w == width(a)) return a;
  if (w < width(a)) throw std::logic_error("sext to a narrower width");
  ExprNode n;
  n.op = ExprOp::kSext;
  n.width = w;
  n.args[0] = a;
  n.aux = width(a);
  return fold(n);
}

ExprId TransitionSystem::extract(ExprId a, unsigned lo, unsigned w) {
  if (lo + w > width(a)) throw std::logic_error("extract out of range");
  if (lo == 0 && w == width(a)) return a;
  const ExprNode& x = exprs_[a];
  if ((x.op == ExprOp::kZext || x.op == ExprOp::kSext) && lo + w <= width(x.args[0])) {
    return extract(x.args[0], lo, w);
  }
  if (x.op == ExprOp::kExtract) return extract(x.args[0], x.aux + lo, w);
  ExprNode n;
  n.op = ExprOp::kExtract;
  n.width = w;
  n.args[0] = a;
  n.aux = lo;
  return fold(n);
}

ExprId TransitionSystem::resize(ExprId a, unsigned w, bool is_signed) {
  if (w == width(a)) return a;
  if (w < width(a)) return extract(a, 0, w);
  return is_signed ? sext(a, w) : zext(a, w);
}

void TransitionSystem::check_well_typed() const {
  for (ExprId id = 0; id < exprs_.size(); ++id) {
    const ExprNode& n = exprs_[id];
    auto arg_w = [&](int i) {
      if (n.args[i] >= id) throw std::logic_error("expression argument does not precede its user");
      return exprs_[n.args[i]].width;
    };
    if (n.width < 1 || n.width > kMaxExprWidth) throw std::logic_error("expression width out of range");
    switch (n.op) {
      case ExprOp::kConst: break;
      case ExprOp::kInput:
        if (n.aux >= inputs_.size() || inputs_[n.aux].width != n.width) throw std::logic_error("bad input ref");
        break;
      case ExprOp::kState:
        if (n.aux >= states_.size() || states_[n.aux].width != n.width) throw std::logic_error("bad state ref");
        break;
      case ExprOp::kNot:
        if (arg_w(0) != n.width) throw std::logic_error("not width");
        break;
      case ExprOp::kEq:
      case ExprOp::kUlt:
      case ExprOp::kSlt:
        if (arg_w(0) != arg_w(1) || n.width != 1) throw std::logic_error("comparison width");
        break;
      case ExprOp::kIte:
        if (arg_w(0) != 1 || arg_w(1) != n.width || arg_w(2) != n.width) throw std::logic_error("ite width");
        break;
      case ExprOp::kZext:
      case ExprOp::kSext:
        if (arg_w(0) > n.width) throw std::logic_error("extension width");
        break;
      case ExprOp::kExtract:
        if (n.aux + n.width > arg_w(0)) throw std::logic_error("extract range");
        break;
      default:
        if (arg_w(0) != n.width || arg_w(1) != n.width) throw std::logic_error("binary operator width");
    }
  }
  for (const StateVar& s : states_) {
    if (s.next >= exprs_.size() || exprs_[s.next].width != s.width) throw std::logic_error("state next width");
  }
  if (bad_ && exprs_[*bad_].width != 1) throw std::logic_error("bad width");
}

std::vector<Word> evaluate_all(const TransitionSystem& ts, const std::vector<Word>& inputs,
                               const std::vector<Word>& states) {
  std::vector<Word> v(ts.num_exprs());
  for (ExprId id = 0; id < ts.num_exprs(); ++id) {
    const ExprNode& n = ts.expr(id);
    switch (n.op) {
      case ExprOp::kConst: v[id] = n.value; break;
      case ExprOp::kInput: v[id] = truncate(inputs[n.aux], n.width); break;
      case ExprOp::kState: v[id] = states[n.aux]; break;
      case ExprOp::kNot:
      case ExprOp::kZext:
      case ExprOp::kSext:
      case ExprOp::kExtract: v[id] = eval_op(n, v[n.args[0]], 0, 0); break;
      case ExprOp::kIte: v[id] = v[n.args[0]] ? v[n.args[1]] : v[n.args[2]]; break;
      default: v[id] = eval_op(n, v[n.args[0]], v[n.args[1]], 0); break;
    }
  }
  return v;
}

Trace simulate(const TransitionSystem& ts, const std::vector<Word>& inputs, std::uint64_t max_cycles,
               bool record) {
  Trace trace;
  std::vector<Word> state(ts.states().size());
  for (std::size_t i = 0; i < state.size(); ++i) state[i] = ts.states()[i].init;
  auto valid = ts.output("valid");
  auto result = ts.output("result");
  for (std::uint64_t cycle = 0; cycle < max_cycles; ++cycle) {
    std::vector<Word> v = evaluate_all(ts, inputs, state);
    trace.cycles_run = cycle + 1;
    if (record) {
      trace.states.push_back(state);
      std::vector<Word> outs;
      for (const TsOutput& o : ts.outputs()) outs.push_back(v[o.expr]);
      trace.outputs.push_back(std::move(outs));
    }
    if (valid && v[*valid] && !trace.first_valid_cycle) {
      trace.first_valid_cycle = cycle;
      trace.result_at_valid = result ? v[*result] : 0;
      if (!record) break;
    }
    for (std::size_t i = 0; i < state.size(); ++i) state[i] = v[ts.states()[i].next];
  }
  return trace;
}

Trace simulate(const TransitionSystem& ts, const std::unordered_map<std::string, Word>& inputs,
               std::uint64_t max_cycles, bool record) {
  std::vector<Word> vec(ts.inputs().size(), 0);
  for (std::size_t i = 0; i < vec.size(); ++i) {
    auto it = inputs.find(ts.inputs()[i].name);
    if (it != inputs.end()) vec[i] = it->second;
  }
  return simulate(ts, vec, max_cycles, record);
}

}  // namespace evolvegen::ts
